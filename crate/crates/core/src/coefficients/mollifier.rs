use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Highest derivative of the bump mollifier that can be evaluated.
pub const MAX_BUMP_DERIVATIVE: usize = 8;

const SUP_SAMPLES: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MollifierShape {
    /// `exp(-1/(1-t²))` on `(-1, 1)`.
    #[serde(rename = "bump")]
    Bump,
    /// `cos²(πt/2)` on `(-1, 1)`.
    #[serde(rename = "cosine2")]
    CosineSquared,
    /// `1 - |t|` on `(-1, 1)`.
    #[serde(rename = "triangle")]
    Triangle,
}

impl MollifierShape {
    pub const ALL: [MollifierShape; 3] = [
        MollifierShape::Bump,
        MollifierShape::CosineSquared,
        MollifierShape::Triangle,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            MollifierShape::Bump => "bump",
            MollifierShape::CosineSquared => "cosine2",
            MollifierShape::Triangle => "triangle",
        }
    }
}

impl fmt::Display for MollifierShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for MollifierShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(MollifierShape::Bump),
            "cosine2" | "cosine²" | "cosine-squared" => Ok(MollifierShape::CosineSquared),
            "triangle" => Ok(MollifierShape::Triangle),
            other => Err(Error::Config(format!(
                "unknown mollifier shape '{other}' (expected bump, cosine2 or triangle)"
            ))),
        }
    }
}

/// Normalized, nonnegative kernel supported in `[-1, 1]` with unit mass.
#[derive(Debug, Clone)]
pub struct Mollifier {
    shape: MollifierShape,
    normalization: f64,
    tol: f64,
    /// Numerators `P_k` of `d^k/dt^k exp(-1/(1-t²)) = P_k(t) (1-t²)^{-2k} exp(-1/(1-t²))`.
    bump_polys: Vec<Vec<f64>>,
    sup_derivs: Vec<f64>,
}

impl PartialEq for Mollifier {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.tol == other.tol
    }
}

impl Mollifier {
    pub fn new(shape: MollifierShape, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Domain(format!("mollifier tolerance {tol} must be positive")));
        }
        let mut m = Mollifier {
            shape,
            normalization: 1.0,
            tol,
            bump_polys: Vec::new(),
            sup_derivs: Vec::new(),
        };
        match shape {
            MollifierShape::Bump => {
                m.bump_polys = bump_numerators(MAX_BUMP_DERIVATIVE);
                // Normalize far below the requested tolerance so that the
                // unit-mass check is limited by the caller's tolerance only.
                let raw = quadrature::integrate(bump_raw, -1.0, 1.0, 1e-15);
                m.normalization = 1.0 / raw;
            }
            // cos²(πt/2) and 1-|t| both integrate to exactly 1 on [-1, 1].
            MollifierShape::CosineSquared | MollifierShape::Triangle => {}
        }
        m.sup_derivs = (0..=m.max_derivative()).map(|k| m.compute_sup(k)).collect();
        let mass = m.integral();
        if (mass - 1.0).abs() > tol {
            return Err(Error::Domain(format!(
                "mollifier {shape} has mass {mass} outside 1 ± {tol}"
            )));
        }
        Ok(m)
    }

    pub fn shape(&self) -> MollifierShape {
        self.shape
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Highest derivative order with a bounded (piecewise continuous) value.
    pub fn max_derivative(&self) -> usize {
        match self.shape {
            MollifierShape::Bump => MAX_BUMP_DERIVATIVE,
            MollifierShape::CosineSquared => 2,
            MollifierShape::Triangle => 1,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `ψ^{(k)}(t)`; zero outside `(-1, 1)`.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        assert!(
            k <= self.max_derivative(),
            "derivative order {k} exceeds the smoothness of the {} mollifier",
            self.shape
        );
        if !(t > -1.0 && t < 1.0) {
            return 0.0;
        }
        match self.shape {
            MollifierShape::Bump => {
                let s = 1.0 - t * t;
                let p = horner(&self.bump_polys[k], t);
                if p == 0.0 {
                    return 0.0;
                }
                self.normalization * p * (-1.0 / s - 2.0 * k as f64 * s.ln()).exp()
            }
            MollifierShape::CosineSquared => {
                if k == 0 {
                    0.5 * (1.0 + (PI * t).cos())
                } else {
                    0.5 * PI.powi(k as i32) * (PI * t + k as f64 * 0.5 * PI).cos()
                }
            }
            MollifierShape::Triangle => {
                if k == 0 {
                    1.0 - t.abs()
                } else if t > 0.0 {
                    -1.0
                } else if t < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫_{-1}^{x} ψ`.
    pub fn cumulative(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self.shape {
            MollifierShape::Bump => {
                if x > 0.0 {
                    1.0 - self.cumulative(-x)
                } else {
                    quadrature::integrate(|t| self.value(t), -1.0, x, 1e-14)
                }
            }
            MollifierShape::CosineSquared => 0.5 * (x + 1.0) + (PI * x).sin() / (2.0 * PI),
            MollifierShape::Triangle => {
                if x <= 0.0 {
                    0.5 * (1.0 + x).powi(2)
                } else {
                    1.0 - 0.5 * (1.0 - x).powi(2)
                }
            }
        }
    }

    /// Total mass under the module's quadrature (closed form where exact).
    pub fn integral(&self) -> f64 {
        match self.shape {
            MollifierShape::Bump => {
                quadrature::integrate(|t| self.value(t), -1.0, 1.0, 0.01 * self.tol)
            }
            MollifierShape::CosineSquared | MollifierShape::Triangle => 1.0,
        }
    }

    /// `sup |ψ^{(k)}|`.
    pub fn sup_abs_derivative(&self, k: usize) -> f64 {
        self.sup_derivs[k]
    }

    /// `ψ_ω^{(k)}(t) = ω^{-1-k} ψ^{(k)}(t/ω)`.
    pub fn scaled_derivative(&self, k: usize, t: f64, omega: f64) -> f64 {
        self.derivative(k, t / omega) * omega.powi(-1 - k as i32)
    }

    /// `∫ ψ(τ) cos(ξ τ) dτ` (the kernel is even, so this is its Fourier transform).
    pub fn cosine_transform(&self, xi: f64) -> f64 {
        let panels = (xi.abs() / PI).ceil() as usize + 2;
        quadrature::integrate_panels(&|t| self.value(t) * (xi * t).cos(), -1.0, 1.0, panels, 1e-15)
    }

    /// Interior points where `ψ^{(k)}` is not smooth.
    pub(crate) fn kinks(&self) -> &'static [f64] {
        match self.shape {
            MollifierShape::Triangle => &[0.0],
            _ => &[],
        }
    }

    fn compute_sup(&self, k: usize) -> f64 {
        match self.shape {
            MollifierShape::CosineSquared => {
                if k == 0 {
                    1.0
                } else {
                    0.5 * PI.powi(k as i32)
                }
            }
            MollifierShape::Triangle => 1.0,
            MollifierShape::Bump => (1..SUP_SAMPLES)
                .map(|i| {
                    let t = -1.0 + 2.0 * i as f64 / SUP_SAMPLES as f64;
                    self.derivative(k, t).abs()
                })
                .fold(0.0, f64::max),
        }
    }
}

fn bump_raw(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

/// `P_{k+1} = (1-t²)² P_k' + (4k t (1-t²) - 2t) P_k`, `P_0 = 1`.
fn bump_numerators(max_k: usize) -> Vec<Vec<f64>> {
    let one_minus_t2 = [1.0, 0.0, -1.0];
    let sq = poly_mul(&one_minus_t2, &one_minus_t2);
    let mut out = vec![vec![1.0]];
    for k in 0..max_k {
        let p = &out[k];
        let first = poly_mul(&sq, &poly_deriv(p));
        let kf = k as f64;
        // 4k t (1 - t²) - 2t = (4k - 2) t - 4k t³
        let factor = [0.0, 4.0 * kf - 2.0, 0.0, -4.0 * kf];
        let second = poly_mul(&factor, p);
        out.push(poly_add(&first, &second));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_shape_is_configuration_error() {
        assert!(matches!("gauss".parse::<MollifierShape>(), Err(Error::Config(_))));
    }

    #[test]
    fn closed_form_masses() {
        for shape in [MollifierShape::Triangle, MollifierShape::CosineSquared] {
            let m = Mollifier::new(shape, 1e-12).unwrap();
            assert_eq!(m.integral(), 1.0);
            let q = quadrature::integrate(|t| m.value(t), -1.0, 1.0, 1e-14);
            assert!((q - 1.0).abs() < 1e-12, "{shape}: {q}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for shape in MollifierShape::ALL {
            let m = Mollifier::new(shape, 1e-10).unwrap();
            for k in 0..m.max_derivative() {
                for &t in &[-0.7, -0.31, 0.13, 0.55, 0.86] {
                    let h = 1e-6;
                    let fd = (m.derivative(k, t + h) - m.derivative(k, t - h)) / (2.0 * h);
                    let d = m.derivative(k + 1, t);
                    assert!(
                        (fd - d).abs() <= 1e-5 * d.abs().max(1.0),
                        "{shape} k={k} t={t}: fd {fd} vs {d}"
                    );
                }
            }
        }
    }

    #[test]
    fn cumulative_is_antiderivative() {
        for shape in MollifierShape::ALL {
            let m = Mollifier::new(shape, 1e-10).unwrap();
            assert!((m.cumulative(0.0) - 0.5).abs() < 1e-13);
            let x = 0.3;
            let h = 1e-5;
            let fd = (m.cumulative(x + h) - m.cumulative(x - h)) / (2.0 * h);
            assert!((fd - m.value(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn cosine_transform_at_zero_is_mass() {
        for shape in MollifierShape::ALL {
            let m = Mollifier::new(shape, 1e-10).unwrap();
            assert!((m.cosine_transform(0.0) - 1.0).abs() < 1e-12);
        }
        let m = Mollifier::new(MollifierShape::Triangle, 1e-10).unwrap();
        // (sin(ξ/2)/(ξ/2))²
        let xi: f64 = 7.0;
        let exact = ((xi / 2.0).sin() / (xi / 2.0)).powi(2);
        assert!((m.cosine_transform(xi) - exact).abs() < 1e-12);
    }
}
