//! Discrete spectral picture of a positive Rockland operator.
//!
//! The operator acts on mode `m` as multiplication by `π_m²`; the unitary
//! dual and its Plancherel measure are replaced by the finite list of
//! frequencies `π_m` and weights `μ_m`. Norms are accumulated in ascending
//! `m` so results do not depend on how callers parallelize.

pub(crate) mod norms;
mod ultra;

pub use norms::{gevrey_norm, plancherel_assemble, sobolev_norm, GevreySign, GEVREY_EXPONENT_CAP};
pub use ultra::{ultradistribution_fit, GrowthVerdict, UltraFit};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    Power,
    Table,
    HeisenbergLike,
}

/// Declarative description of a model, resolvable at any mode count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `π_m = m^{ν/2}`, `μ_m = 1`, `m = 1..=modes`.
    Power { modes: usize, nu: f64 },
    /// Explicit `(π_m, μ_m)` pairs.
    Table { entries: Vec<(f64, f64)>, nu: f64 },
    /// `π = (λ (2k + n))^{1/2}` on `λ = j Δλ`, `j = 1..=lambda_count`,
    /// `k = 0..levels`, with weight `λ^n Δλ`; coincident frequencies merge.
    HeisenbergLike {
        n: u32,
        lambda_max: f64,
        lambda_count: usize,
        levels: usize,
    },
}

impl ModelSpec {
    /// The same family with roughly `factor` times as many modes.
    pub fn scaled(&self, factor: usize) -> Result<ModelSpec> {
        match self {
            ModelSpec::Power { modes, nu } => Ok(ModelSpec::Power {
                modes: modes * factor,
                nu: *nu,
            }),
            ModelSpec::HeisenbergLike {
                n,
                lambda_max,
                lambda_count,
                levels,
            } => Ok(ModelSpec::HeisenbergLike {
                n: *n,
                lambda_max: *lambda_max,
                lambda_count: *lambda_count,
                levels: levels * factor,
            }),
            ModelSpec::Table { .. } => Err(Error::Refused(
                "a tabulated spectrum cannot be resized".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub family: ModelFamily,
    /// Homogeneous degree `ν` of the operator.
    pub nu: f64,
    frequencies: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralModel {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Eigenvalue `π_m²` of the operator on mode `m` (zero-based).
    pub fn eigenvalue(&self, m: usize) -> f64 {
        self.frequencies[m] * self.frequencies[m]
    }

    pub fn max_frequency(&self) -> f64 {
        *self.frequencies.last().expect("nonempty model")
    }

    pub fn from_table(entries: &[(f64, f64)], nu: f64) -> Result<Self> {
        build_model(&ModelSpec::Table {
            entries: entries.to_vec(),
            nu,
        })
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<SpectralModel> {
    let (family, nu, pairs) = match spec {
        ModelSpec::Power { modes, nu } => {
            if *modes < 1 {
                return Err(Error::invalid("mode count M must be at least 1"));
            }
            check_nu(*nu)?;
            let pairs = (1..=*modes).map(|m| ((m as f64).powf(nu / 2.0), 1.0)).collect();
            (ModelFamily::Power, *nu, pairs)
        }
        ModelSpec::Table { entries, nu } => {
            check_nu(*nu)?;
            (ModelFamily::Table, *nu, entries.clone())
        }
        ModelSpec::HeisenbergLike {
            n,
            lambda_max,
            lambda_count,
            levels,
        } => {
            if *n < 1 || *lambda_count < 1 || *levels < 1 || lambda_max.is_nan() || *lambda_max <= 0.0 {
                return Err(Error::invalid(
                    "heisenberg-like model needs n >= 1, lambda_count >= 1, levels >= 1, lambda_max > 0",
                ));
            }
            let dl = lambda_max / *lambda_count as f64;
            let mut raw: Vec<(f64, f64)> = (1..=*lambda_count)
                .flat_map(|j| {
                    let lambda = j as f64 * dl;
                    (0..*levels).map(move |k| {
                        (
                            (lambda * (2 * k as u32 + n) as f64).sqrt(),
                            lambda.powi(*n as i32) * dl,
                        )
                    })
                })
                .collect();
            raw.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
            for (pi, mu) in raw {
                match merged.last_mut() {
                    Some(last) if (pi - last.0).abs() <= 1e-12 * pi => last.1 += mu,
                    _ => merged.push((pi, mu)),
                }
            }
            (ModelFamily::HeisenbergLike, 2.0, merged)
        }
    };
    let mut errors = Vec::new();
    if pairs.is_empty() {
        errors.push("model has no modes".to_string());
    }
    for (i, (pi, mu)) in pairs.iter().enumerate() {
        if !(*pi > 0.0 && pi.is_finite()) {
            errors.push(format!("frequency π_{} = {pi} must be positive", i + 1));
        }
        if !(*mu > 0.0 && mu.is_finite()) {
            errors.push(format!("weight μ_{} = {mu} must be positive", i + 1));
        }
        if i > 0 && *pi <= pairs[i - 1].0 {
            errors.push(format!(
                "frequencies must be strictly increasing: π_{} = {pi} after π_{} = {}",
                i + 1,
                i,
                pairs[i - 1].0
            ));
        }
    }
    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    let (frequencies, weights) = pairs.into_iter().unzip();
    Ok(SpectralModel {
        family,
        nu,
        frequencies,
        weights,
    })
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("homogeneous degree ν = {nu} must be positive")))
    }
}

/// Complex coefficients of a function, one per mode of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeField(pub Vec<Complex64>);

impl ModeField {
    pub fn zeros(m: usize) -> Self {
        ModeField(vec![Complex64::new(0.0, 0.0); m])
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        ModeField(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        ModeField(self.0.iter().map(|z| z * alpha).collect())
    }

    pub fn check(&self, model: &SpectralModel) -> Result<()> {
        if self.len() != model.len() {
            return Err(Error::Mismatch(format!(
                "mode field has {} entries but the model has {} modes",
                self.len(),
                model.len()
            )));
        }
        if let Some(i) = self.0.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid(format!("mode field entry {} is not finite", i + 1)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_family() {
        let m = build_model(&ModelSpec::Power { modes: 4, nu: 2.0 }).unwrap();
        assert_eq!(m.frequencies(), &[1.0, 2.0, 3.0, 4.0]);
        let m = build_model(&ModelSpec::Power { modes: 3, nu: 4.0 }).unwrap();
        assert_eq!(m.frequencies(), &[1.0, 4.0, 9.0]);
        assert_eq!(m.eigenvalue(2), 81.0);
    }

    #[test]
    fn table_echo_and_validation() {
        let m = SpectralModel::from_table(&[(1.5, 0.2), (2.5, 0.8)], 2.0).unwrap();
        assert_eq!(m.frequencies(), &[1.5, 2.5]);
        assert_eq!(m.weights(), &[0.2, 0.8]);
        let err = SpectralModel::from_table(&[(2.0, 1.0), (1.0, 1.0), (3.0, -1.0)], 2.0).unwrap_err();
        match err {
            Error::Validation(v) => assert_eq!(v.len(), 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn heisenberg_like_is_monotone_with_merged_weights() {
        let spec = ModelSpec::HeisenbergLike {
            n: 1,
            lambda_max: 4.0,
            lambda_count: 4,
            levels: 3,
        };
        let m = build_model(&spec).unwrap();
        assert!(m.frequencies().windows(2).all(|w| w[1] > w[0]));
        // λ(2k+1) = 3 for (λ=1,k=1) and (λ=3,k=0): weights 1 + 3 merge
        let idx = m.frequencies().iter().position(|p| (p - 3f64.sqrt()).abs() < 1e-12).unwrap();
        assert!((m.weights()[idx] - 4.0).abs() < 1e-12);
        let total: f64 = m.weights().iter().sum();
        assert!((total - 3.0 * (1.0 + 2.0 + 3.0 + 4.0)).abs() < 1e-12);
    }
}
