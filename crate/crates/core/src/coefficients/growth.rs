use super::{mollify, Mollifier, RoughCoefficient, ScaleSchedule};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, GrowthFit, DEFAULT_ENVELOPE_FACTOR};
use crate::grid::UniformGrid;

/// Allowed excess of a fitted slope over the declared bound exponent.
pub const GROWTH_SLOPE_SLACK: f64 = 0.1;

/// Grid points per mollifier half-width when sampling for growth fits.
const POINTS_PER_OMEGA: f64 = 32.0;
const MIN_INTERVALS: usize = 1000;

/// Growth of `sup_t |∂ₜ^k a_ε|` against `1/ω(ε)` for one derivative order.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeGrowth {
    pub order: usize,
    pub omegas: Vec<f64>,
    pub sups: Vec<f64>,
    pub fit: GrowthFit,
    /// Exponent of the bound `c ω^{-(L+k)}` implied by the declared order.
    pub bound_exponent: f64,
    /// Smallest `c` with `sup ≤ c ω^{-(L+k)}` on the net.
    pub bound_constant: f64,
    pub moderate: bool,
}

/// Fits the scaling of mollified derivatives over an ε-net.
pub fn fit_derivative_growth(
    a: &RoughCoefficient,
    psi: &Mollifier,
    schedule: &ScaleSchedule,
    eps_net: &[f64],
    k_max: usize,
) -> Result<Vec<DerivativeGrowth>> {
    if eps_net.len() < 4 {
        return Err(Error::Domain(format!(
            "derivative growth needs at least 4 net points, got {}",
            eps_net.len()
        )));
    }
    let lo = eps_net.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps_net.iter().copied().fold(0.0, f64::max);
    if hi / lo < 100.0 {
        return Err(Error::Domain(format!(
            "ε-net [{lo:e}, {hi:e}] spans less than two decades"
        )));
    }
    a.validate()?;
    let omegas = eps_net
        .iter()
        .map(|e| schedule.omega(*e))
        .collect::<Result<Vec<_>>>()?;
    let mut sups = vec![Vec::with_capacity(omegas.len()); k_max + 1];
    for &omega in &omegas {
        let step = omega / POINTS_PER_OMEGA;
        let n = ((a.horizon / step).ceil() as usize).max(MIN_INTERVALS);
        let sampled = mollify(a, psi, omega, &UniformGrid::covering(a.horizon, n), k_max)?;
        for (k, s) in sups.iter_mut().enumerate() {
            s.push(sampled.sup_abs(k));
        }
    }
    let inv: Vec<f64> = omegas.iter().map(|w| 1.0 / w).collect();
    Ok(sups
        .into_iter()
        .enumerate()
        .map(|(k, sups)| {
            let fit = fit_power_law(&inv, &sups, DEFAULT_ENVELOPE_FACTOR);
            let bound_exponent = (a.order as usize + k) as f64;
            let bound_constant = omegas
                .iter()
                .zip(&sups)
                .map(|(w, s)| s * w.powf(bound_exponent))
                .fold(0.0, f64::max);
            let moderate = match fit {
                GrowthFit::IdenticallyZero => true,
                GrowthFit::Fitted(f) => f.slope <= bound_exponent + GROWTH_SLOPE_SLACK,
            };
            DerivativeGrowth {
                order: k,
                omegas: omegas.clone(),
                sups,
                fit,
                bound_exponent,
                bound_constant,
                moderate,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::MollifierShape;
    use super::*;

    fn net() -> Vec<f64> {
        vec![1e-1, 1e-2, 1e-3, 1e-4]
    }

    #[test]
    fn constant_has_zero_slope_and_degenerate_derivative() {
        let psi = Mollifier::new(MollifierShape::Bump, 1e-10).unwrap();
        let a = RoughCoefficient::constant(1.0, 1.0);
        let g = fit_derivative_growth(&a, &psi, &ScaleSchedule::Identity, &net(), 1).unwrap();
        assert_eq!(g[0].fit.slope(), Some(0.0));
        assert_eq!(g[1].fit, GrowthFit::IdenticallyZero);
        assert!(g.iter().all(|g| g.moderate));
    }

    #[test]
    fn short_net_rejected() {
        let psi = Mollifier::new(MollifierShape::Bump, 1e-10).unwrap();
        let a = RoughCoefficient::constant(1.0, 1.0);
        assert!(fit_derivative_growth(&a, &psi, &ScaleSchedule::Identity, &[0.1, 0.05, 0.02, 0.01], 0).is_err());
        assert!(fit_derivative_growth(&a, &psi, &ScaleSchedule::Identity, &[0.1, 0.001], 0).is_err());
    }

    #[test]
    fn undeclared_order_is_not_moderate() {
        // δ' grows like ω^{-2}; declaring L = 1 only admits ω^{-1} at k = 0.
        let psi = Mollifier::new(MollifierShape::Bump, 1e-10).unwrap();
        let mut a = RoughCoefficient::constant(0.0, 1.0).with_atom(0.5, 1.0, 1);
        a.order = 1;
        let g = fit_derivative_growth(&a, &psi, &ScaleSchedule::Identity, &net(), 0).unwrap();
        assert!(!g[0].moderate);
        a.order = 2;
        let g = fit_derivative_growth(&a, &psi, &ScaleSchedule::Identity, &net(), 0).unwrap();
        assert!(g[0].moderate);
    }
}
