//! Per-mode integration of `v″ + β²a(t)v = f(t)` and its energies.
//!
//! The scalar equation is carried as the first-order system for
//! `(v, v′)`; energies and bounds are phrased in terms of
//! `V = (iβv, v′)`, so `|V|² = β²|v|² + |v′|²`.

mod energy;
mod quasi;
pub(crate) mod rk4;

pub use energy::{
    check_energy_bounds, energy_trace, gronwall_envelope, BoundKind, BoundViolation, EnergyConstants, EnergyTrace,
    GronwallReport, GRONWALL_SLACK_FACTOR,
};
pub use quasi::{default_delta, quasi_energy_trace, QuasiEnergyTrace};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{Regularization, TimeSignal};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use rk4::Kernel;

pub const DEFAULT_RTOL: f64 = 1e-11;
pub const DEFAULT_MAX_STEPS: usize = 200_000;
pub const LARGE_MAX_STEPS: usize = 2_000_000;
/// Factor by which [`classical_reference`] tightens the tolerance.
pub const REFERENCE_TIGHTENING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with step-doubling error control.
    Rk4,
    /// Velocity Verlet at the planned step, without error control.
    Verlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Relative local tolerance per step pair.
    pub rtol: f64,
    pub max_steps: usize,
    /// Number of output intervals; `None` records every step.
    pub output_intervals: Option<usize>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            method: Method::Rk4,
            rtol: DEFAULT_RTOL,
            max_steps: DEFAULT_MAX_STEPS,
            output_intervals: None,
        }
    }
}

impl IntegratorOptions {
    pub fn with_output(mut self, intervals: usize) -> Self {
        self.output_intervals = Some(intervals);
        self
    }

    pub fn large(mut self) -> Self {
        self.max_steps = LARGE_MAX_STEPS;
        self
    }
}

/// Separable forcing `f(t) = g(t) ĥ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub profile: TimeSignal,
    pub spatial: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeProblem {
    /// Mode frequency `β = π_m`.
    pub beta: f64,
    pub coefficient: TimeSignal,
    pub source: Option<SourceTerm>,
    pub v0: Complex64,
    pub v1: Complex64,
}

impl ModeProblem {
    pub fn new(beta: f64, coefficient: TimeSignal, v0: Complex64, v1: Complex64) -> Self {
        ModeProblem {
            beta,
            coefficient,
            source: None,
            v0,
            v1,
        }
    }

    pub fn with_source(mut self, profile: TimeSignal, spatial: Complex64) -> Self {
        self.source = Some(SourceTerm { profile, spatial });
        self
    }

    pub fn horizon(&self) -> f64 {
        self.coefficient.horizon()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorMeta {
    pub method: Method,
    pub step: f64,
    pub steps: usize,
    /// How many times the step count was doubled after a failed error check.
    pub doublings: u32,
    pub worst_local_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub beta: f64,
    pub grid: UniformGrid,
    pub v: Vec<Complex64>,
    pub vt: Vec<Complex64>,
    /// `f(t_i)` at the recorded times.
    pub forcing: Vec<Complex64>,
    pub meta: IntegratorMeta,
}

impl ModeTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times().collect()
    }

    /// `V(t_i) = (iβv, v′)`.
    pub fn state(&self, i: usize) -> [Complex64; 2] {
        [Complex64::new(0.0, self.beta) * self.v[i], self.vt[i]]
    }

    /// `|V(t_i)|²`.
    pub fn state_norm_sq(&self, i: usize) -> f64 {
        self.beta * self.beta * self.v[i].norm_sqr() + self.vt[i].norm_sqr()
    }
}

/// Phase advanced per step, `β√a h`, for a given tolerance.
pub(crate) fn phase_per_step(rtol: f64) -> f64 {
    (0.5 * (120.0 * rtol).powf(0.2)).min(0.1)
}

/// Initial step count: resolves the fastest oscillation and any time scale
/// of the coefficient, rounded up to a multiple of `quantum`.
pub(crate) fn plan_steps(
    beta: f64,
    a_bound: f64,
    resolution: Option<f64>,
    horizon: f64,
    rtol: f64,
    quantum: usize,
) -> usize {
    let mut h = phase_per_step(rtol) / (beta * a_bound.max(0.0).sqrt().max(1.0));
    if let Some(r) = resolution {
        h = h.min(r / 4.0);
    }
    let n = (horizon / h).ceil().max(1.0) as usize;
    n.div_ceil(quantum) * quantum
}

pub(crate) fn step_quantum(output_intervals: Option<usize>) -> usize {
    match output_intervals {
        Some(k) if k % 2 == 0 => k,
        Some(k) => 2 * k,
        None => 2,
    }
}

pub(crate) fn min_resolution(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn check_problem(p: &ModeProblem) -> Result<()> {
    let mut errors = Vec::new();
    if !(p.beta > 0.0 && p.beta.is_finite()) {
        errors.push(format!("β = {} must be positive and finite", p.beta));
    }
    if !(p.horizon() > 0.0 && p.horizon().is_finite()) {
        errors.push(format!("horizon T = {} must be positive", p.horizon()));
    }
    for (name, z) in [("v0", p.v0), ("v1", p.v1)] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            errors.push(format!("initial datum {name} is not finite"));
        }
    }
    if let Some(s) = &p.source {
        if (s.profile.horizon() - p.horizon()).abs() > 1e-12 * p.horizon() {
            errors.push("source profile and coefficient have different horizons".to_string());
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(errors))
    }
}

/// Integrates one mode on `[0, T]`.
///
/// The step starts from an a priori plan and is halved, by re-solving with
/// twice as many steps, until every step pair passes the error check; the
/// budget `opts.max_steps` bounds the search.
pub fn solve_mode(p: &ModeProblem, opts: &IntegratorOptions) -> Result<ModeTrajectory> {
    check_problem(p)?;
    let horizon = p.horizon();
    let quantum = step_quantum(opts.output_intervals);
    let resolution = min_resolution(
        p.coefficient.resolution_scale(),
        p.source.as_ref().and_then(|s| s.profile.resolution_scale()),
    );
    let mut steps = plan_steps(p.beta, p.coefficient.sup_bound(), resolution, horizon, opts.rtol, quantum);
    let floor = {
        let v0 = (p.beta * p.beta * p.v0.norm_sqr() + p.v1.norm_sqr()).sqrt();
        let src = p
            .source
            .as_ref()
            .map_or(0.0, |s| s.spatial.norm() * s.profile.sup_bound() * horizon);
        v0 + src
    };
    let mut doublings = 0;
    let mut last_error = 0.0;
    loop {
        if steps > opts.max_steps {
            let prev = if doublings > 0 { steps / 2 } else { steps };
            return Err(Error::StepBudget {
                beta: p.beta,
                min_dt: horizon / prev as f64,
                steps: prev,
                local_error: last_error,
            });
        }
        let half = UniformGrid::covering(horizon, 2 * steps);
        let a_half = p.coefficient.sample(&half, 0)?;
        let g_half = match &p.source {
            Some(s) => Some(s.profile.sample(&half, 0)?),
            None => None,
        };
        let stride = opts.output_intervals.map_or(1, |k| steps / k);
        let kernel = Kernel {
            beta: p.beta,
            a_half: a_half.values(),
            g_half: g_half.as_ref().map(|g| g.values()),
            h_hat: p.source.as_ref().map_or(Complex64::new(0.0, 0.0), |s| s.spatial),
            h: horizon / steps as f64,
            steps,
            stride,
        };
        let out = match opts.method {
            Method::Rk4 => kernel.rk4(p.v0, p.v1, opts.rtol, floor),
            Method::Verlet => kernel.verlet(p.v0, p.v1),
        };
        last_error = out.worst_error;
        if out.worst_ratio <= 1.0 {
            let recorded = steps / stride;
            let forcing = (0..=recorded)
                .map(|i| match &g_half {
                    Some(g) => kernel.h_hat * g.values()[2 * stride * i],
                    None => Complex64::new(0.0, 0.0),
                })
                .collect();
            return Ok(ModeTrajectory {
                beta: p.beta,
                grid: UniformGrid::covering(horizon, recorded),
                v: out.v,
                vt: out.vt,
                forcing,
                meta: IntegratorMeta {
                    method: opts.method,
                    step: kernel.h,
                    steps,
                    doublings,
                    worst_local_error: out.worst_error,
                },
            });
        }
        steps *= 2;
        doublings += 1;
    }
}

/// High-accuracy solve of the classical problem with an exact coefficient.
pub fn classical_reference(p: &ModeProblem, opts: &IntegratorOptions) -> Result<ModeTrajectory> {
    if p.coefficient.regularization != Regularization::Exact {
        return Err(Error::Refused(
            "the classical reference needs the exact coefficient, not a regularization".into(),
        ));
    }
    let tight = IntegratorOptions {
        method: Method::Rk4,
        rtol: opts.rtol / REFERENCE_TIGHTENING,
        ..*opts
    };
    solve_mode(p, &tight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{RoughCoefficient, SmoothPart};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn exact(a: RoughCoefficient) -> TimeSignal {
        TimeSignal::exact(a)
    }

    #[test]
    fn harmonic_oscillator() {
        let horizon = PI / 2.0;
        let p = ModeProblem::new(2.0, exact(RoughCoefficient::constant(1.0, horizon)), c(1.0), c(0.0));
        let tr = solve_mode(&p, &IntegratorOptions::default()).unwrap();
        assert!((tr.v.last().unwrap() - c(-1.0)).norm() < 1e-6);
        assert_eq!(tr.v[0], c(1.0));
        assert_eq!(tr.vt[0], c(0.0));
    }

    #[test]
    fn sine_closed_form() {
        let p = ModeProblem::new(1.0, exact(RoughCoefficient::constant(4.0, 1.0)), c(0.0), c(2.0));
        let tr = solve_mode(&p, &IntegratorOptions::default()).unwrap();
        for (i, t) in tr.grid.times().enumerate() {
            assert!((tr.v[i] - c((2.0 * t).sin())).norm() < 1e-9);
            assert!((tr.vt[i] - c(2.0 * (2.0 * t).cos())).norm() < 1e-9);
        }
    }

    #[test]
    fn particular_solution() {
        let p = ModeProblem::new(1.0, exact(RoughCoefficient::constant(1.0, 1.0)), c(0.0), c(0.0))
            .with_source(exact(RoughCoefficient::constant(1.0, 1.0)), c(1.0));
        let tr = solve_mode(&p, &IntegratorOptions::default()).unwrap();
        for (i, t) in tr.grid.times().enumerate() {
            assert!((tr.v[i] - c(1.0 - t.cos())).norm() < 1e-10);
            assert!((tr.forcing[i] - c(1.0)).norm() == 0.0);
        }
    }

    #[test]
    fn variation_of_parameters() {
        let g = RoughCoefficient::smooth(SmoothPart::Affine { c0: 0.0, c1: 1.0 }, 2.0);
        let p = ModeProblem::new(1.0, exact(RoughCoefficient::constant(1.0, 2.0)), c(0.0), c(0.0))
            .with_source(exact(g), c(1.0));
        let tr = classical_reference(&p, &IntegratorOptions::default()).unwrap();
        for (i, t) in tr.grid.times().enumerate() {
            assert!((tr.v[i] - c(t - t.sin())).norm() < 1e-8);
        }
    }

    #[test]
    fn output_subsampling_matches_full_record() {
        let a = RoughCoefficient::smooth(SmoothPart::Affine { c0: 1.0, c1: 0.5 }, 1.0);
        let p = ModeProblem::new(3.0, exact(a), c(1.0), c(0.5));
        let opts = IntegratorOptions::default();
        let sub = solve_mode(&p, &opts.with_output(10)).unwrap();
        let full = solve_mode(&p, &opts.with_output(sub.meta.steps)).unwrap();
        assert_eq!(full.meta.steps, sub.meta.steps);
        assert_eq!(sub.v.len(), 11);
        let r = full.grid.stride_to(&sub.grid).unwrap();
        for i in 0..=10 {
            assert!((sub.v[i] - full.v[i * r]).norm() < 1e-12);
        }
    }

    #[test]
    fn budget_error_names_beta() {
        let p = ModeProblem::new(1e4, exact(RoughCoefficient::constant(1.0, 1.0)), c(1.0), c(0.0));
        let opts = IntegratorOptions {
            max_steps: 1000,
            ..Default::default()
        };
        match solve_mode(&p, &opts) {
            Err(Error::StepBudget { beta, min_dt, .. }) => {
                assert_eq!(beta, 1e4);
                assert!(min_dt > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verlet_is_second_order_accurate() {
        let p = ModeProblem::new(1.0, exact(RoughCoefficient::constant(1.0, 1.0)), c(1.0), c(0.0));
        let opts = IntegratorOptions {
            method: Method::Verlet,
            ..Default::default()
        };
        let tr = solve_mode(&p, &opts).unwrap();
        assert!((tr.v.last().unwrap() - c(1f64.cos())).norm() < 1e-4);
    }

    #[test]
    fn reference_refuses_mollified_coefficient() {
        use crate::coefficients::{Mollifier, MollifierShape};
        let psi = Mollifier::new(MollifierShape::Bump, 1e-12).unwrap();
        let sig = TimeSignal::mollified(RoughCoefficient::constant(1.0, 1.0), psi, 0.1);
        let p = ModeProblem::new(1.0, sig, c(1.0), c(0.0));
        assert!(matches!(
            classical_reference(&p, &IntegratorOptions::default()),
            Err(Error::Refused(_))
        ));
    }
}
