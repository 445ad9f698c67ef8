//! Numerical core for the wave equation `∂ₜ²u + a(t)ℛu = f` in a discrete
//! spectral model of a positive homogeneous operator `ℛ`.
//!
//! * [`coefficients`]: distributional propagation speeds, Friedrichs
//!   mollifiers and the regularization `a_ε = a ∗ ψ_{ω(ε)}`.
//! * [`spectral`]: mode frequencies, Plancherel weights, Sobolev and Gevrey
//!   norms.
//! * [`solver`]: per-mode integration of `v″ + β²a(t)v = f(t)` and the
//!   symmetriser and quasi-symmetriser energies.
//! * [`lab`]: ε-nets of regularized solutions and the experiments built on
//!   them.

pub mod coefficients;
pub mod error;
pub mod fit;
pub mod grid;
pub mod lab;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use coefficients::{
    mollify, Atom, Jump, Mollifier, MollifierShape, RoughCoefficient, SampledCoefficient, ScaleSchedule, SmoothPart,
    TimeSignal,
};
pub use error::{Error, Result};
pub use fit::{fit_power_law, GrowthFit, PowerLawFit};
pub use grid::UniformGrid;
pub use num_complex::Complex64;
pub use spectral::{build_model, gevrey_norm, sobolev_norm, ModeField, ModelSpec, SpectralModel};
