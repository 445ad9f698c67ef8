use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regularity and sign class of a propagation speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientClass {
    /// `a ∈ Lip([0,T])`, `a ≥ a₀ > 0`.
    LipschitzPositive,
    /// `a ∈ C^α`, `0 < α < 1`, `a ≥ a₀ > 0`.
    HolderPositive { alpha: f64 },
    /// `a ∈ C^ℓ`, `ℓ ≥ 2`, `a ≥ 0`.
    SmoothDegenerate { ell: u32 },
    /// `a ∈ C^α`, `0 < α < 2`, `a ≥ 0`.
    HolderDegenerate { alpha: f64 },
}

pub const REGIME_LIST: &str = "lipschitz-positive; holder-positive (0 < alpha < 1); \
     smooth-degenerate (ell >= 2); holder-degenerate (0 < alpha < 2)";

impl CoefficientClass {
    /// Parses `name` with an optional parameter, e.g. `("holder-positive", Some(0.5))`.
    pub fn from_parts(name: &str, param: Option<f64>) -> Result<Self> {
        let need = |what: &str| {
            param.ok_or_else(|| Error::UnknownClass(format!("class {name} needs {what}; known regimes: {REGIME_LIST}")))
        };
        match name {
            "lipschitz-positive" => Ok(CoefficientClass::LipschitzPositive),
            "holder-positive" => Ok(CoefficientClass::HolderPositive { alpha: need("alpha")? }),
            "smooth-degenerate" => {
                let ell = need("ell")?;
                if ell.fract() != 0.0 || ell < 0.0 {
                    return Err(Error::UnknownClass(format!("ell = {ell} must be an integer")));
                }
                Ok(CoefficientClass::SmoothDegenerate { ell: ell as u32 })
            }
            "holder-degenerate" => Ok(CoefficientClass::HolderDegenerate { alpha: need("alpha")? }),
            other => Err(Error::UnknownClass(format!("{other}; known regimes: {REGIME_LIST}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    I,
    Ii,
    Iii,
    Iv,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::I => "(i)",
            Regime::Ii => "(ii)",
            Regime::Iii => "(iii)",
            Regime::Iv => "(iv)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionSpace {
    /// `C([0,T]; H^{s+ν/2}) ∩ C¹([0,T]; H^s)` for every real `s`.
    SobolevPair,
    /// Gevrey functions `𝒢^s` and ultradistributions `H_s^{−∞}`.
    GevreyPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRecord {
    pub regime: Regime,
    pub class: CoefficientClass,
    pub space: SolutionSpace,
    /// Inclusive lower bound on `s`, if any.
    pub s_min: Option<f64>,
    /// Exclusive upper bound on `s`, if any.
    pub s_sup: Option<f64>,
}

impl RegimeRecord {
    pub fn admits(&self, s: f64) -> std::result::Result<(), String> {
        if let Some(lo) = self.s_min {
            if s < lo {
                return Err(format!("s must satisfy s >= {lo}"));
            }
        }
        if let Some(hi) = self.s_sup {
            if s >= hi {
                return Err(format!("s must satisfy s < {hi}"));
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> String {
        match (self.s_min, self.s_sup) {
            (Some(lo), Some(hi)) => format!("{lo} <= s < {hi}"),
            (Some(lo), None) => format!("s >= {lo}"),
            (None, Some(hi)) => format!("s < {hi}"),
            (None, None) => "any real s".to_string(),
        }
    }
}

/// Well-posedness regime for a coefficient class.
///
/// The parameter ranges are strict: `α = 1` is not a Hölder-positive class,
/// `α = 2` is not a Hölder-degenerate class, while `ℓ = 2` is admitted.
pub fn regime_advisor(class: CoefficientClass) -> Result<RegimeRecord> {
    let gevrey = |regime, s_sup| RegimeRecord {
        regime,
        class,
        space: SolutionSpace::GevreyPair,
        s_min: Some(1.0),
        s_sup: Some(s_sup),
    };
    match class {
        CoefficientClass::LipschitzPositive => Ok(RegimeRecord {
            regime: Regime::I,
            class,
            space: SolutionSpace::SobolevPair,
            s_min: None,
            s_sup: None,
        }),
        CoefficientClass::HolderPositive { alpha } if alpha > 0.0 && alpha < 1.0 => {
            Ok(gevrey(Regime::Ii, 1.0 + alpha / (1.0 - alpha)))
        }
        CoefficientClass::SmoothDegenerate { ell } if ell >= 2 => Ok(gevrey(Regime::Iii, 1.0 + ell as f64 / 2.0)),
        CoefficientClass::HolderDegenerate { alpha } if alpha > 0.0 && alpha < 2.0 => {
            Ok(gevrey(Regime::Iv, 1.0 + alpha / 2.0))
        }
        other => Err(Error::UnknownClass(format!(
            "{other:?} is outside every regime; known regimes: {REGIME_LIST}"
        ))),
    }
}

/// The four canonical regime records with representative parameters.
pub fn canonical_regimes() -> Vec<RegimeRecord> {
    [
        CoefficientClass::LipschitzPositive,
        CoefficientClass::HolderPositive { alpha: 0.5 },
        CoefficientClass::SmoothDegenerate { ell: 2 },
        CoefficientClass::HolderDegenerate { alpha: 1.5 },
    ]
    .into_iter()
    .map(|c| regime_advisor(c).expect("canonical classes are admissible"))
    .collect()
}
