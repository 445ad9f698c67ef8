use serde::{Deserialize, Serialize};

use super::ModeTrajectory;
use crate::coefficients::SampledCoefficient;
use crate::error::{Error, Result};

/// Allowed discretization slack in the differential Gronwall check,
/// relative to the envelope.
pub const GRONWALL_SLACK_FACTOR: f64 = 1e-6;
const BOUND_SLACK: f64 = 1e-12;

/// Constants of the symmetriser energy `E = (SV, V)`, `S = diag(2a, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants {
    pub a_min: f64,
    pub a_max: f64,
    /// `c₀ = 2 min(a_min, 1)`.
    pub c0: f64,
    /// `c₁ = 2 max(a_max, 1)`.
    pub c1: f64,
    pub sup_da: f64,
    /// `K = max(‖Sₜ‖ + 1, ‖S‖²) = max(2 sup|a′| + 1, c₁²)`.
    pub k: f64,
    /// `C₁ = K / c₀`.
    pub gronwall_c1: f64,
    /// `C₂ = K`.
    pub gronwall_c2: f64,
    /// Smallest `C₁` for which the analytic derivative obeys
    /// `Eₜ ≤ C₁E + C₂|f|²` on the recorded times.
    pub empirical_c1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Analytic `Eₜ = 2a′β²|v|² + 4 Re(v̄′ f)`.
    pub derivative: Vec<f64>,
    pub forcing_sq: Vec<f64>,
    pub constants: EnergyConstants,
}

pub(crate) fn coefficient_on_trajectory(traj: &ModeTrajectory, a: &SampledCoefficient) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let values = a.restrict(0, &traj.grid)?;
    let (da, sup_da) = match a.derivative(1) {
        Some(_) => (a.restrict(1, &traj.grid)?, a.sup_abs(1)),
        None => {
            let fine = centered_difference(a.values(), a.grid.step);
            let r = a.grid.stride_to(&traj.grid).expect("checked by restrict");
            let sup = fine.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            ((0..traj.grid.len).map(|i| fine[i * r]).collect(), sup)
        }
    };
    Ok((values, da, sup_da))
}

pub(crate) fn centered_difference(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| match i {
            0 => (y[1] - y[0]) / h,
            i if i == n - 1 => (y[n - 1] - y[n - 2]) / h,
            i => (y[i + 1] - y[i - 1]) / (2.0 * h),
        })
        .collect()
}

pub fn energy_trace(traj: &ModeTrajectory, a: &SampledCoefficient) -> Result<EnergyTrace> {
    let (values, da, sup_da) = coefficient_on_trajectory(traj, a)?;
    let b2 = traj.beta * traj.beta;
    let mut energy = Vec::with_capacity(values.len());
    let mut derivative = Vec::with_capacity(values.len());
    let mut forcing_sq = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let (v, w, f) = (traj.v[i], traj.vt[i], traj.forcing[i]);
        energy.push(2.0 * values[i] * b2 * v.norm_sqr() + 2.0 * w.norm_sqr());
        derivative.push(2.0 * da[i] * b2 * v.norm_sqr() + 4.0 * (w.conj() * f).re);
        forcing_sq.push(f.norm_sqr());
    }
    let a_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let a_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c0 = 2.0 * a_min.min(1.0);
    let c1 = 2.0 * a_max.max(1.0);
    let k = (2.0 * sup_da + 1.0).max(c1 * c1);
    let empirical_c1 = energy
        .iter()
        .zip(&derivative)
        .zip(&forcing_sq)
        .filter(|((e, _), _)| **e > 0.0)
        .map(|((e, d), f)| (d - k * f).max(0.0) / e)
        .fold(0.0, f64::max);
    Ok(EnergyTrace {
        times: traj.times(),
        energy,
        derivative,
        forcing_sq,
        constants: EnergyConstants {
            a_min,
            a_max,
            c0,
            c1,
            sup_da,
            k,
            gronwall_c1: k / c0,
            gronwall_c2: k,
            empirical_c1,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `c₀|V|² > E`.
    Lower,
    /// `E > c₁|V|²`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub index: usize,
    pub t: f64,
    pub kind: BoundKind,
    pub excess: f64,
}

/// Grid points where `c₀|V|² ≤ E ≤ c₁|V|²` fails by more than a relative
/// slack of `1e-12`.
pub fn check_energy_bounds(tr: &EnergyTrace, traj: &ModeTrajectory) -> Result<Vec<BoundViolation>> {
    let c = &tr.constants;
    if c.a_min <= 0.0 {
        return Err(Error::Refused(format!(
            "the two-sided bound needs a strictly positive coefficient (min a = {:e}); use quasi_energy_trace",
            c.a_min
        )));
    }
    let mut out = Vec::new();
    for (i, e) in tr.energy.iter().enumerate() {
        let v2 = traj.state_norm_sq(i);
        let slack = BOUND_SLACK * c.c1 * v2;
        let lower = c.c0 * v2 - e;
        let upper = e - c.c1 * v2;
        if lower > slack {
            out.push(BoundViolation {
                index: i,
                t: tr.times[i],
                kind: BoundKind::Lower,
                excess: lower,
            });
        }
        if upper > slack {
            out.push(BoundViolation {
                index: i,
                t: tr.times[i],
                kind: BoundKind::Upper,
                excess: upper,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    /// `e^{C₁t}(E(0) + C₂∫₀ᵗ|f|²)`.
    pub envelope: Vec<f64>,
    /// `min_{t>0} (envelope − E)`.
    pub worst_margin: f64,
    pub envelope_holds: bool,
    /// Per interval: `max(0, (E_{i+1} − E_i)/Δt − C₁E_i − C₂|f_i|²)`.
    pub needed_slack: Vec<f64>,
    /// Largest ratio of needed slack to `1e-6 · envelope`.
    pub worst_slack_ratio: f64,
    pub differential_holds: bool,
}

impl GronwallReport {
    pub fn holds(&self) -> bool {
        self.envelope_holds && self.differential_holds
    }
}

pub fn gronwall_envelope(tr: &EnergyTrace) -> GronwallReport {
    let c = &tr.constants;
    let n = tr.energy.len();
    let mut envelope = Vec::with_capacity(n);
    let mut integral = 0.0;
    for i in 0..n {
        if i > 0 {
            integral += 0.5 * (tr.times[i] - tr.times[i - 1]) * (tr.forcing_sq[i] + tr.forcing_sq[i - 1]);
        }
        envelope.push((c.gronwall_c1 * tr.times[i]).exp() * (tr.energy[0] + c.gronwall_c2 * integral));
    }
    let worst_margin = (1..n)
        .map(|i| envelope[i] - tr.energy[i])
        .fold(f64::INFINITY, f64::min);
    let envelope_holds = (0..n).all(|i| tr.energy[i] <= envelope[i] * (1.0 + BOUND_SLACK));
    let mut needed_slack = Vec::with_capacity(n.saturating_sub(1));
    let mut worst_slack_ratio = 0.0_f64;
    #[allow(clippy::needless_range_loop)]
    for i in 0..n.saturating_sub(1) {
        let dt = tr.times[i + 1] - tr.times[i];
        let fd = (tr.energy[i + 1] - tr.energy[i]) / dt;
        let need = (fd - c.gronwall_c1 * tr.energy[i] - c.gronwall_c2 * tr.forcing_sq[i]).max(0.0);
        let allowed = GRONWALL_SLACK_FACTOR * envelope[i];
        let ratio = if need == 0.0 {
            0.0
        } else if allowed > 0.0 {
            need / allowed
        } else {
            f64::INFINITY
        };
        worst_slack_ratio = worst_slack_ratio.max(ratio);
        needed_slack.push(need);
    }
    GronwallReport {
        envelope,
        worst_margin,
        envelope_holds,
        needed_slack,
        worst_slack_ratio,
        differential_holds: worst_slack_ratio <= 1.0,
    }
}
