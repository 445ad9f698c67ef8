use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::RoughCoefficient;
use crate::error::{Error, Result};
use crate::spectral::{build_model, ModeField, ModelSpec, SpectralModel};

/// Per-mode coefficient family for Cauchy data and spatial source factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `scale · e^{−rate π_m}`.
    ExpDecay {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        rate: f64,
    },
    /// `scale · (1 + π_m²)^{−q}`.
    Algebraic {
        #[serde(default = "one")]
        scale: f64,
        q: f64,
    },
    /// `scale · e^{η π_m^{1/s}}`.
    GevreyGrowth {
        #[serde(default = "one")]
        scale: f64,
        eta: f64,
        s: f64,
    },
    /// Explicit coefficients, imaginary parts optional.
    Explicit {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    Zero,
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    pub fn resolve(&self, model: &SpectralModel) -> Result<ModeField> {
        let pis = model.frequencies();
        let field = match self {
            FieldSpec::ExpDecay { scale, rate } => ModeField::from_real(pis.iter().map(|p| scale * (-rate * p).exp())),
            FieldSpec::Algebraic { scale, q } => {
                ModeField::from_real(pis.iter().map(|p| scale * (1.0 + p * p).powf(-q)))
            }
            FieldSpec::GevreyGrowth { scale, eta, s } => {
                if *s < 1.0 {
                    return Err(Error::invalid(format!("gevrey-growth order s = {s} must be at least 1")));
                }
                ModeField::from_real(pis.iter().map(|p| scale * (eta * p.powf(1.0 / s)).exp()))
            }
            FieldSpec::Explicit { re, im } => {
                if re.len() != model.len() || !(im.is_empty() || im.len() == model.len()) {
                    return Err(Error::Mismatch(format!(
                        "explicit field has {} real and {} imaginary entries for a {}-mode model",
                        re.len(),
                        im.len(),
                        model.len()
                    )));
                }
                ModeField(
                    re.iter()
                        .enumerate()
                        .map(|(i, r)| Complex64::new(*r, im.get(i).copied().unwrap_or(0.0)))
                        .collect(),
                )
            }
            FieldSpec::Zero => ModeField::zeros(model.len()),
        };
        field.check(model)?;
        Ok(field)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldSpec::Zero => true,
            FieldSpec::ExpDecay { scale, .. }
            | FieldSpec::Algebraic { scale, .. }
            | FieldSpec::GevreyGrowth { scale, .. } => *scale == 0.0,
            FieldSpec::Explicit { re, im } => re.iter().chain(im).all(|v| *v == 0.0),
        }
    }
}

/// Separable source `f(t) = g(t) ĥ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub profile: RoughCoefficient,
    pub spatial: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub u0: FieldSpec,
    pub u1: FieldSpec,
    #[serde(default)]
    pub source: Option<SourceSpec>,
}

/// Cauchy data resolved against a model.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub u0: ModeField,
    pub u1: ModeField,
    pub source: Option<(RoughCoefficient, ModeField)>,
}

impl CauchyData {
    pub fn resolve(spec: &DataSpec, model: &SpectralModel) -> Result<Self> {
        Ok(CauchyData {
            u0: spec.u0.resolve(model)?,
            u1: spec.u1.resolve(model)?,
            source: match &spec.source {
                Some(s) => Some((s.profile.clone(), s.spatial.resolve(model)?)),
                None => None,
            },
        })
    }
}

/// `∂ₜ²u + a(t)ℛu = f` on `[0, T]` with data in a spectral model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioProblem {
    pub coefficient: RoughCoefficient,
    pub model_spec: ModelSpec,
    pub model: SpectralModel,
    pub data_spec: DataSpec,
    pub data: CauchyData,
    /// Sobolev order `s` of the solution space `H^{s+ν/2} × H^s`.
    pub s: f64,
}

impl ScenarioProblem {
    pub fn new(coefficient: RoughCoefficient, model_spec: ModelSpec, data_spec: DataSpec, s: f64) -> Result<Self> {
        let mut errors = coefficient.violations();
        if let Some(src) = &data_spec.source {
            if (src.profile.horizon - coefficient.horizon).abs() > 1e-12 * coefficient.horizon {
                errors.push(format!(
                    "source profile horizon {} differs from coefficient horizon {}",
                    src.profile.horizon, coefficient.horizon
                ));
            }
            errors.extend(
                src.profile
                    .violations()
                    .into_iter()
                    .map(|e| format!("source profile: {e}")),
            );
        }
        if !s.is_finite() {
            errors.push(format!("Sobolev order s = {s} must be finite"));
        }
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let model = build_model(&model_spec)?;
        let data = CauchyData::resolve(&data_spec, &model)?;
        Ok(ScenarioProblem {
            coefficient,
            model_spec,
            model,
            data_spec,
            data,
            s,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.coefficient.horizon
    }

    /// The same problem on a model with `factor` times as many modes.
    pub fn resized(&self, factor: usize) -> Result<Self> {
        ScenarioProblem::new(
            self.coefficient.clone(),
            self.model_spec.scaled(factor)?,
            self.data_spec.clone(),
            self.s,
        )
    }

    pub fn with_coefficient(&self, coefficient: RoughCoefficient) -> Result<Self> {
        ScenarioProblem::new(coefficient, self.model_spec.clone(), self.data_spec.clone(), self.s)
    }
}
