use serde::{Deserialize, Serialize};

use super::{ModeField, SpectralModel};
use crate::error::{Error, Result};
use crate::fit::least_squares;

/// Resolution of the reported growth exponent.
const ETA_RESOLUTION: f64 = 1e-3;
/// Relative band within which head and tail slopes count as equal.
const SLOPE_BAND: f64 = 0.1;
const MIN_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVerdict {
    /// Growth slower than any `e^{δπ^{1/s}}`.
    RoumieuType,
    /// Growth of exactly exponential type `e^{ηπ^{1/s}}`.
    BeurlingType,
    /// Growth accelerating faster than exponential in `π^{1/s}`.
    Unbounded,
    /// Every coefficient vanishes.
    TriviallyBoth,
}

/// Envelope `log|u_m| ≤ log C + η π_m^{1/s}` fitted on the nonzero modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltraFit {
    pub eta: f64,
    pub log_constant: f64,
    /// `log|u_m| − (log C + η π_m^{1/s})` per nonzero mode, all `≤ 0`.
    pub residuals: Vec<f64>,
    pub head_slope: f64,
    pub tail_slope: f64,
    pub verdict: GrowthVerdict,
}

pub fn ultradistribution_fit(u: &ModeField, model: &SpectralModel, s: f64) -> Result<UltraFit> {
    u.check(model)?;
    if s < 1.0 {
        return Err(Error::Domain(format!("Gevrey order s = {s} must be at least 1")));
    }
    if model.len() < MIN_MODES {
        return Err(Error::Domain(format!(
            "an ultradistribution fit needs at least {MIN_MODES} modes, got {}",
            model.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = u
        .0
        .iter()
        .zip(model.frequencies())
        .filter(|(z, _)| z.norm() > 0.0)
        .map(|(z, pi)| (pi.powf(1.0 / s), z.norm().ln()))
        .unzip();
    if x.is_empty() {
        return Ok(UltraFit {
            eta: 0.0,
            log_constant: f64::NEG_INFINITY,
            residuals: Vec::new(),
            head_slope: 0.0,
            tail_slope: 0.0,
            verdict: GrowthVerdict::TriviallyBoth,
        });
    }
    let slope = if x.len() >= 2 { least_squares(&x, &y).1 } else { 0.0 };
    let eta = (slope.max(0.0) / ETA_RESOLUTION).ceil() * ETA_RESOLUTION;
    let log_constant = x
        .iter()
        .zip(&y)
        .map(|(x, y)| y - eta * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let residuals = x.iter().zip(&y).map(|(x, y)| y - log_constant - eta * x).collect();

    let half = x.len() / 2;
    let half_slope = |xs: &[f64], ys: &[f64]| if xs.len() >= 2 { least_squares(xs, ys).1 } else { 0.0 };
    let head_slope = half_slope(&x[..half], &y[..half]);
    let tail_slope = half_slope(&x[half..], &y[half..]);
    let verdict = if tail_slope <= ETA_RESOLUTION || tail_slope <= (1.0 - SLOPE_BAND) * head_slope {
        GrowthVerdict::RoumieuType
    } else if tail_slope <= (1.0 + SLOPE_BAND) * head_slope {
        GrowthVerdict::BeurlingType
    } else {
        GrowthVerdict::Unbounded
    };
    Ok(UltraFit {
        eta,
        log_constant,
        residuals,
        head_slope,
        tail_slope,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_model, ModelSpec};
    use super::*;

    fn power(m: usize) -> SpectralModel {
        build_model(&ModelSpec::Power { modes: m, nu: 2.0 }).unwrap()
    }

    #[test]
    fn exponential_growth_recovers_eta() {
        let model = power(16);
        let u = ModeField::from_real(model.frequencies().iter().map(|p| (2.0 * p).exp()));
        let fit = ultradistribution_fit(&u, &model, 1.0).unwrap();
        assert!((fit.eta - 2.0).abs() < 0.05, "{fit:?}");
        assert_eq!(fit.verdict, GrowthVerdict::BeurlingType);
        assert!(fit.residuals.iter().all(|r| *r <= 1e-12));
    }

    #[test]
    fn decaying_field_has_zero_eta() {
        let model = power(16);
        let u = ModeField::from_real(model.frequencies().iter().map(|p| 1.0 / (1.0 + p * p)));
        let fit = ultradistribution_fit(&u, &model, 1.0).unwrap();
        assert_eq!(fit.eta, 0.0);
        assert_eq!(fit.verdict, GrowthVerdict::RoumieuType);
    }

    #[test]
    fn synthetic_half_power_growth() {
        let model = power(64);
        let u = ModeField::from_real(model.frequencies().iter().map(|p| (3.0 * p.sqrt()).exp()));
        let fit = ultradistribution_fit(&u, &model, 2.0).unwrap();
        assert!((fit.eta - 3.0).abs() < 0.1, "{fit:?}");
        assert_eq!(fit.verdict, GrowthVerdict::BeurlingType);
    }

    #[test]
    fn round_trip_with_constant() {
        let model = power(64);
        let u = ModeField::from_real(model.frequencies().iter().map(|p| 5.0 * (0.7 * p.powf(1.0 / 1.5)).exp()));
        let fit = ultradistribution_fit(&u, &model, 1.5).unwrap();
        assert!((fit.eta - 0.7).abs() < 0.05);
        assert_eq!(fit.verdict, GrowthVerdict::BeurlingType);
    }

    #[test]
    fn sub_exponential_growth_is_roumieu() {
        let model = power(64);
        let u = ModeField::from_real(model.frequencies().iter().map(|p| (p / (1.0 + p).ln()).exp()));
        let fit = ultradistribution_fit(&u, &model, 1.0).unwrap();
        assert_eq!(fit.verdict, GrowthVerdict::RoumieuType, "{fit:?}");
    }

    #[test]
    fn super_exponential_growth_is_unbounded() {
        let model = power(32);
        let u = ModeField::from_real(model.frequencies().iter().map(|p| (0.1 * p * p).exp()));
        let fit = ultradistribution_fit(&u, &model, 1.0).unwrap();
        assert_eq!(fit.verdict, GrowthVerdict::Unbounded);
    }

    #[test]
    fn zero_field_is_trivially_both() {
        let model = power(8);
        let fit = ultradistribution_fit(&ModeField::zeros(8), &model, 1.0).unwrap();
        assert_eq!(fit.verdict, GrowthVerdict::TriviallyBoth);
        assert_eq!(fit.eta, 0.0);
    }

    #[test]
    fn too_few_modes() {
        let model = power(4);
        assert!(ultradistribution_fit(&ModeField::zeros(4), &model, 1.0).is_err());
    }
}
