//! Distributional time profiles and their regularization.
//!
//! A [`RoughCoefficient`] is a finite sum of an analytic smooth part,
//! Heaviside jumps and Dirac atoms (with derivatives). Every piece has a
//! closed-form or one-dimensional-quadrature convolution against a
//! [`Mollifier`], which is what [`mollify`] evaluates.

mod growth;
mod mollifier;
mod sampled;
mod schedule;

pub use growth::{fit_derivative_growth, DerivativeGrowth, GROWTH_SLOPE_SLACK};
pub use mollifier::{Mollifier, MollifierShape, MAX_BUMP_DERIVATIVE};
pub use sampled::{
    lower_bound_check, mollify, sample_exact, Regularization, SampledCoefficient, TimeSignal,
    MOLLIFY_QUAD_TOL,
};
pub use schedule::ScaleSchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points used when checking a smooth part against a claimed floor.
const FLOOR_SAMPLES: usize = 2001;

/// Analytic family for the regular part of a coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SmoothPart {
    Constant {
        c: f64,
    },
    Affine {
        c0: f64,
        c1: f64,
    },
    /// `c0 + c1 sin(kappa t)`
    Sinusoid {
        c0: f64,
        c1: f64,
        kappa: f64,
    },
    /// `c0 + c1 t^q`, `q >= 0`
    Power {
        #[serde(default)]
        c0: f64,
        #[serde(default = "one")]
        c1: f64,
        q: f64,
    },
    /// `c0 + amplitude * Σ_{j<terms} 2^{-alpha j} cos(2^j t) / Σ_{j<terms} 2^{-alpha j}`
    Weierstrass {
        #[serde(default)]
        c0: f64,
        amplitude: f64,
        alpha: f64,
        #[serde(default = "default_terms")]
        terms: u32,
    },
}

fn one() -> f64 {
    1.0
}

fn default_terms() -> u32 {
    16
}

/// One term `amplitude * cos(kappa t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TrigTerm {
    pub amplitude: f64,
    pub kappa: f64,
    pub phase: f64,
}

impl SmoothPart {
    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `k`-th derivative of the analytic expression at `t`.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        match *self {
            SmoothPart::Constant { c } => {
                if k == 0 {
                    c
                } else {
                    0.0
                }
            }
            SmoothPart::Affine { c0, c1 } => match k {
                0 => c0 + c1 * t,
                1 => c1,
                _ => 0.0,
            },
            SmoothPart::Power { c0, c1, q } => {
                let mut coeff = c1;
                for j in 0..k {
                    coeff *= q - j as f64;
                }
                let base = if coeff == 0.0 { 0.0 } else { coeff * t.powf(q - k as f64) };
                if k == 0 {
                    c0 + base
                } else {
                    base
                }
            }
            _ => {
                let (offset, terms) = self.trig_terms().expect("trigonometric family");
                let shift = k as f64 * std::f64::consts::FRAC_PI_2;
                let sum: f64 = terms
                    .iter()
                    .map(|tt| tt.amplitude * tt.kappa.powi(k as i32) * (tt.kappa * t + tt.phase + shift).cos())
                    .sum();
                if k == 0 {
                    offset + sum
                } else {
                    sum
                }
            }
        }
    }

    /// Constant offset plus cosine terms, for the families that have them.
    pub(crate) fn trig_terms(&self) -> Option<(f64, Vec<TrigTerm>)> {
        match *self {
            SmoothPart::Constant { c } => Some((c, Vec::new())),
            SmoothPart::Sinusoid { c0, c1, kappa } => Some((
                c0,
                vec![TrigTerm {
                    amplitude: c1,
                    kappa,
                    phase: -std::f64::consts::FRAC_PI_2,
                }],
            )),
            SmoothPart::Weierstrass {
                c0,
                amplitude,
                alpha,
                terms,
            } => {
                let norm: f64 = (0..terms).map(|j| 2f64.powf(-alpha * j as f64)).sum();
                Some((
                    c0,
                    (0..terms)
                        .map(|j| TrigTerm {
                            amplitude: amplitude * 2f64.powf(-alpha * j as f64) / norm,
                            kappa: 2f64.powi(j as i32),
                            phase: 0.0,
                        })
                        .collect(),
                ))
            }
            _ => None,
        }
    }

    /// Largest angular frequency present (0 for non-oscillatory families).
    pub(crate) fn max_frequency(&self) -> f64 {
        self.trig_terms()
            .map(|(_, t)| t.iter().map(|t| t.kappa.abs()).fold(0.0, f64::max))
            .unwrap_or(0.0)
    }

    /// Magnitude used to scale absolute quadrature tolerances.
    pub(crate) fn scale(&self) -> f64 {
        let s = match *self {
            SmoothPart::Constant { c } => c.abs(),
            SmoothPart::Affine { c0, c1 } => c0.abs() + c1.abs(),
            SmoothPart::Sinusoid { c0, c1, .. } => c0.abs() + c1.abs(),
            SmoothPart::Power { c0, c1, .. } => c0.abs() + c1.abs(),
            SmoothPart::Weierstrass { c0, amplitude, .. } => c0.abs() + amplitude.abs(),
        };
        s.max(1.0)
    }

    /// Upper bound of `|value|` on `[0, horizon]`.
    pub fn sup_bound(&self, horizon: f64) -> f64 {
        match *self {
            SmoothPart::Constant { c } => c.abs(),
            SmoothPart::Affine { c0, c1 } => c0.abs().max((c0 + c1 * horizon).abs()),
            SmoothPart::Sinusoid { c0, c1, .. } => c0.abs() + c1.abs(),
            SmoothPart::Power { c0, c1, q } => c0.abs() + c1.abs() * horizon.powf(q),
            SmoothPart::Weierstrass { c0, amplitude, .. } => c0.abs() + amplitude.abs(),
        }
    }

    fn validate(&self, errors: &mut Vec<String>) {
        let finite = |name: &str, v: f64, errors: &mut Vec<String>| {
            if !v.is_finite() {
                errors.push(format!("smooth part parameter {name} must be finite"));
            }
        };
        match *self {
            SmoothPart::Constant { c } => finite("c", c, errors),
            SmoothPart::Affine { c0, c1 } => {
                finite("c0", c0, errors);
                finite("c1", c1, errors);
            }
            SmoothPart::Sinusoid { c0, c1, kappa } => {
                finite("c0", c0, errors);
                finite("c1", c1, errors);
                finite("kappa", kappa, errors);
            }
            SmoothPart::Power { c0, c1, q } => {
                finite("c0", c0, errors);
                finite("c1", c1, errors);
                if !(q >= 0.0 && q.is_finite()) {
                    errors.push(format!("power exponent q = {q} must be >= 0"));
                }
            }
            SmoothPart::Weierstrass {
                c0,
                amplitude,
                alpha,
                terms,
            } => {
                finite("c0", c0, errors);
                finite("amplitude", amplitude, errors);
                if !(alpha > 0.0 && alpha < 2.0) {
                    errors.push(format!("weierstrass alpha = {alpha} must lie in (0, 2)"));
                }
                if terms == 0 || terms > 40 {
                    errors.push(format!("weierstrass terms = {terms} must lie in 1..=40"));
                }
            }
        }
    }

    /// Two-point oscillation certificate for Hölder regularity of order
    /// `alpha` on `[0, horizon]`: for separations `h = horizon 2^{-j}`,
    /// `j = 1..=levels`, the largest `|s(t+h) - s(t)| / h^alpha` over 512
    /// base points. A bounded sequence as `h` shrinks certifies `C^alpha`
    /// on the resolved scales.
    pub fn holder_certificate(&self, alpha: f64, horizon: f64, levels: u32) -> Vec<(f64, f64)> {
        (1..=levels)
            .map(|j| {
                let h = horizon * 2f64.powi(-(j as i32));
                let n = 512;
                let q = (0..n)
                    .map(|i| {
                        let t = (horizon - h) * i as f64 / (n - 1) as f64;
                        (self.value(t + h) - self.value(t)).abs() / h.powf(alpha)
                    })
                    .fold(0.0, f64::max);
                (h, q)
            })
            .collect()
    }
}

/// Heaviside term `height * H(t - at)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jump {
    pub at: f64,
    pub height: f64,
}

/// Dirac term `mass * δ^{(order)}(t - at)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
    #[serde(default)]
    pub order: u32,
}

/// Compactly supported distribution of finite order on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughCoefficient {
    pub smooth: SmoothPart,
    #[serde(default)]
    pub jumps: Vec<Jump>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    /// Claimed lower bound `a >= floor` in the distributional sense.
    #[serde(default)]
    pub floor: Option<f64>,
    /// Declared distribution order `L`.
    #[serde(default)]
    pub order: u32,
    pub horizon: f64,
}

impl RoughCoefficient {
    pub fn smooth(smooth: SmoothPart, horizon: f64) -> Self {
        RoughCoefficient {
            smooth,
            jumps: Vec::new(),
            atoms: Vec::new(),
            floor: None,
            order: 0,
            horizon,
        }
    }

    pub fn constant(c: f64, horizon: f64) -> Self {
        Self::smooth(SmoothPart::Constant { c }, horizon)
    }

    pub fn with_jump(mut self, at: f64, height: f64) -> Self {
        self.jumps.push(Jump { at, height });
        self.order = self.order.max(self.required_order());
        self
    }

    pub fn with_atom(mut self, at: f64, mass: f64, order: u32) -> Self {
        self.atoms.push(Atom { at, mass, order });
        self.order = self.order.max(self.required_order());
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        self
    }

    /// Smallest declared order compatible with the singular parts.
    pub fn required_order(&self) -> u32 {
        let atoms = self.atoms.iter().map(|a| a.order).max().unwrap_or(0);
        atoms + u32::from(!self.jumps.is_empty())
    }

    /// No jumps and no atoms.
    pub fn is_regular(&self) -> bool {
        self.jumps.is_empty() && self.atoms.is_empty()
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    /// Regular part extended by constants outside `[0, horizon]`.
    pub fn regular_value(&self, t: f64) -> f64 {
        let tc = t.clamp(0.0, self.horizon);
        self.smooth.value(tc)
            + self
                .jumps
                .iter()
                .filter(|j| t >= j.at)
                .map(|j| j.height)
                .sum::<f64>()
    }

    /// Checks every invariant and returns all violations at once.
    pub fn validate(&self) -> Result<()> {
        let errors = self.violations();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let t_end = self.horizon;
        if !(t_end > 0.0 && t_end.is_finite()) {
            errors.push(format!("horizon T = {t_end} must be positive and finite"));
            return errors;
        }
        self.smooth.validate(&mut errors);
        for j in &self.jumps {
            if !(j.at > 0.0 && j.at < t_end) {
                errors.push(format!("jump location {} lies outside (0, {t_end})", j.at));
            }
            if !j.height.is_finite() {
                errors.push(format!("jump height {} must be finite", j.height));
            }
        }
        for a in &self.atoms {
            if !(a.at >= 0.0 && a.at <= t_end) {
                errors.push(format!("atom location {} lies outside [0, {t_end}]", a.at));
            }
            if !a.mass.is_finite() {
                errors.push(format!("atom mass {} must be finite", a.mass));
            }
        }
        let required = self.required_order();
        if self.order < required {
            errors.push(format!(
                "declared order L = {} is below the required {required} (max atom order plus one if jumps are present)",
                self.order
            ));
        }
        if let Some(floor) = self.floor {
            if !(floor >= 0.0 && floor.is_finite()) {
                errors.push(format!("claimed floor {floor} must be a nonnegative number"));
            } else {
                let min = (0..FLOOR_SAMPLES)
                    .map(|i| self.smooth.value(t_end * i as f64 / (FLOOR_SAMPLES - 1) as f64))
                    .fold(f64::INFINITY, f64::min);
                if min < floor - 1e-12 * floor.max(1.0) {
                    errors.push(format!(
                        "positivity violation: smooth part reaches {min} below the claimed floor {floor}"
                    ));
                }
                for j in self.jumps.iter().filter(|j| j.height < 0.0) {
                    errors.push(format!(
                        "positivity violation: negative jump height {} at t = {} with claimed floor {floor}",
                        j.height, j.at
                    ));
                }
                for a in &self.atoms {
                    if a.mass < 0.0 {
                        errors.push(format!(
                            "positivity violation: negative atom mass {} at t = {} with claimed floor {floor}",
                            a.mass, a.at
                        ));
                    }
                    if a.order > 0 {
                        errors.push(format!(
                            "positivity violation: atom of derivative order {} at t = {} (a nonnegative distribution is a measure)",
                            a.order, a.at
                        ));
                    }
                }
            }
        }
        errors
    }
}
