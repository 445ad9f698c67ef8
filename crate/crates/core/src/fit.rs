//! Log–log power-law fits with upper envelopes.

use serde::{Deserialize, Serialize};

/// Default factor by which the raised envelope may sit above the
/// least-squares line before the power law is considered a poor description.
pub const DEFAULT_ENVELOPE_FACTOR: f64 = 10.0;

/// Fit of `value ≈ exp(log_constant) * x^slope` in log–log coordinates.
///
/// `log_constant` is the *envelope* intercept: the least-squares line raised
/// until no sample lies above it, so `value_i <= exp(log_constant) * x_i^slope`
/// holds on every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub log_constant: f64,
    /// Intercept of the plain least-squares line.
    pub ls_intercept: f64,
    pub r_squared: f64,
    /// Largest positive least-squares residual (the envelope lift).
    pub lift: f64,
    pub envelope_ok: bool,
}

impl PowerLawFit {
    pub fn envelope(&self, x: f64) -> f64 {
        (self.log_constant + self.slope * x.ln()).exp()
    }
}

/// Outcome of fitting a series that may be identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrowthFit {
    Fitted(PowerLawFit),
    /// Every sample is zero: bounded by any power, slope undefined.
    IdenticallyZero,
}

impl GrowthFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            GrowthFit::Fitted(f) => Some(f.slope),
            GrowthFit::IdenticallyZero => None,
        }
    }
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r²)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (a, b, r2)
}

/// Fits `values ≈ C x^N` with an upper envelope. Zero samples are skipped in
/// the regression; returns `IdenticallyZero` if nothing positive remains.
pub fn fit_power_law(x: &[f64], values: &[f64], envelope_factor: f64) -> GrowthFit {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(x, v)| (x.ln(), v.ln()))
        .unzip();
    if lx.is_empty() {
        return GrowthFit::IdenticallyZero;
    }
    let (a, b, r2) = if lx.len() == 1 {
        (ly[0], 0.0, 1.0)
    } else {
        least_squares(&lx, &ly)
    };
    let lift = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| y - (a + b * x))
        .fold(0.0_f64, f64::max);
    GrowthFit::Fitted(PowerLawFit {
        slope: b,
        log_constant: a + lift,
        ls_intercept: a,
        r_squared: r2,
        lift,
        envelope_ok: lift <= envelope_factor.ln(),
    })
}

/// Log–log slopes between consecutive samples of a positive series.
pub fn local_slopes(x: &[f64], values: &[f64]) -> Vec<f64> {
    x.windows(2)
        .zip(values.windows(2))
        .map(|(xs, vs)| (vs[1].ln() - vs[0].ln()) / (xs[1].ln() - xs[0].ln()))
        .collect()
}
