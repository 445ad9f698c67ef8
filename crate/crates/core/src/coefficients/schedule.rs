use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling law `ε ↦ ω(ε)` for the mollifier width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScaleSchedule {
    /// `ω = ε`
    Identity,
    /// `ω = ε^gamma`
    Power { gamma: f64 },
    /// `ω = (log(1/ε))^{-1/(order+1)}`
    Log { order: u32 },
}

impl ScaleSchedule {
    pub fn omega(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Domain(format!("ε = {eps} must lie in (0, 1]")));
        }
        match *self {
            ScaleSchedule::Identity => Ok(eps),
            ScaleSchedule::Power { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Domain(format!("power schedule needs γ > 0, got {gamma}")));
                }
                Ok(eps.powf(gamma))
            }
            ScaleSchedule::Log { order } => {
                if eps >= 1.0 {
                    return Err(Error::Domain(
                        "log schedule requires ε < 1 (ω(1) is infinite)".into(),
                    ));
                }
                Ok((1.0 / eps).ln().powf(-1.0 / (order as f64 + 1.0)))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScaleSchedule::Identity => "identity",
            ScaleSchedule::Power { .. } => "power",
            ScaleSchedule::Log { .. } => "log",
        }
    }
}
