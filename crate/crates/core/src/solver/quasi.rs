use serde::{Deserialize, Serialize};

use super::ModeTrajectory;
use crate::coefficients::SampledCoefficient;
use crate::error::{Error, Result};

/// Smallest δ used when no mollifier width is available.
pub const MIN_DEFAULT_DELTA: f64 = 1e-3;

/// `δ = max(ω, 1e-3)`.
pub fn default_delta(omega: Option<f64>) -> f64 {
    omega.unwrap_or(0.0).max(MIN_DEFAULT_DELTA)
}

/// Quasi-symmetriser energy `E_δ = (a + δ²)β²|v|² + |v′|²` and its
/// differential inequality `Eₜ ≤ K_δ E_δ + |f|²` with
/// `K_δ = sup|a′| / min(δ², 1) + βδ + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiEnergyTrace {
    pub delta: f64,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Analytic `∂ₜE_δ = a′β²|v|² + 2δ²β² Re(v̄v′) + 2 Re(v̄′f)`.
    pub derivative: Vec<f64>,
    pub bound_constant: f64,
    /// `max (∂ₜE_δ − |f|²) / E_δ` over points with `E_δ > 0`.
    pub worst_constant: f64,
    pub holds: bool,
    /// `E_δ > 0` wherever `V ≠ 0`.
    pub positive: bool,
}

pub fn quasi_energy_trace(traj: &ModeTrajectory, a: &SampledCoefficient, delta: f64) -> Result<QuasiEnergyTrace> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("δ = {delta} must be positive")));
    }
    let (values, da, sup_da) = super::energy::coefficient_on_trajectory(traj, a)?;
    let b2 = traj.beta * traj.beta;
    let d2 = delta * delta;
    let mut energy = Vec::with_capacity(values.len());
    let mut derivative = Vec::with_capacity(values.len());
    let mut worst_constant = 0.0_f64;
    let mut positive = true;
    for i in 0..values.len() {
        let (v, w, f) = (traj.v[i], traj.vt[i], traj.forcing[i]);
        let e = (values[i] + d2) * b2 * v.norm_sqr() + w.norm_sqr();
        let d = da[i] * b2 * v.norm_sqr() + 2.0 * d2 * b2 * (v.conj() * w).re + 2.0 * (w.conj() * f).re;
        if e > 0.0 {
            worst_constant = worst_constant.max((d - f.norm_sqr()) / e);
        } else if traj.state_norm_sq(i) > 0.0 {
            positive = false;
        }
        energy.push(e);
        derivative.push(d);
    }
    let bound_constant = sup_da / d2.min(1.0) + traj.beta * delta + 1.0;
    Ok(QuasiEnergyTrace {
        delta,
        times: traj.times(),
        energy,
        derivative,
        bound_constant,
        worst_constant,
        holds: worst_constant <= bound_constant,
        positive,
    })
}
