use super::{Mollifier, RoughCoefficient, SmoothPart};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::quadrature;

/// Absolute tolerance (relative to the smooth part's scale) for the
/// quadrature of smooth-part convolutions.
pub const MOLLIFY_QUAD_TOL: f64 = 1e-10;

/// Slack allowed below a claimed floor by [`lower_bound_check`].
const FLOOR_CHECK_TOL: f64 = 1e-9;

/// A time profile and its derivatives sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCoefficient {
    pub grid: UniformGrid,
    /// `derivatives[k][i]` is `∂ₜ^k a(t_i)`.
    pub derivatives: Vec<Vec<f64>>,
    /// Mollifier width, `None` for exact sampling.
    pub omega: Option<f64>,
    pub provenance: String,
}

impl SampledCoefficient {
    pub fn values(&self) -> &[f64] {
        &self.derivatives[0]
    }

    pub fn derivative(&self, k: usize) -> Option<&[f64]> {
        self.derivatives.get(k).map(Vec::as_slice)
    }

    pub fn k_max(&self) -> usize {
        self.derivatives.len() - 1
    }

    pub fn min(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs(&self, k: usize) -> f64 {
        self.derivatives[k].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Values of derivative `k` at the nodes of a coarser grid aligned with
    /// this one.
    pub fn restrict(&self, k: usize, coarse: &UniformGrid) -> Result<Vec<f64>> {
        let r = self.grid.stride_to(coarse).ok_or_else(|| {
            Error::Mismatch(format!(
                "coefficient grid ({} intervals) is not a refinement of the trajectory grid ({} intervals)",
                self.grid.intervals(),
                coarse.intervals()
            ))
        })?;
        let d = self
            .derivative(k)
            .ok_or_else(|| Error::Mismatch(format!("derivative order {k} was not sampled")))?;
        Ok((0..coarse.len).map(|i| d[i * r]).collect())
    }
}

/// Samples `a ∗ ψ_ω` and its first `k_max` derivatives on `grid`.
///
/// Atoms of order `j` contribute `mass ψ_ω^{(j+k)}(t - at)`, jumps contribute
/// `height Ψ((t - at)/ω)` (and `height ψ_ω^{(k-1)}` for `k >= 1`), and the
/// smooth part, extended by its end values outside `[0, T]`, is convolved
/// against `ψ_ω^{(k)}`: in closed form where the window stays inside the
/// interval and the family allows it, by adaptive quadrature otherwise.
pub fn mollify(
    a: &RoughCoefficient,
    psi: &Mollifier,
    omega: f64,
    grid: &UniformGrid,
    k_max: usize,
) -> Result<SampledCoefficient> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("ω = {omega} must be positive")));
    }
    let max_atom = a.atoms.iter().map(|x| x.order as usize).max();
    let needed = max_atom.map_or(k_max, |o| o + k_max);
    if needed > psi.max_derivative() {
        return Err(Error::Domain(format!(
            "derivative order {needed} exceeds the smoothness ({}) of the {} mollifier",
            psi.max_derivative(),
            psi.shape()
        )));
    }
    if !a.is_regular() && omega < 2.0 * grid.step {
        return Err(Error::Resolution {
            omega,
            step: grid.step,
        });
    }
    mollify_points(a, psi, omega, grid, k_max)
}

/// [`mollify`] without the grid-resolution guard, for evaluating a_ε at
/// isolated times rather than on a grid that must resolve it.
pub(crate) fn mollify_points(
    a: &RoughCoefficient,
    psi: &Mollifier,
    omega: f64,
    grid: &UniformGrid,
    k_max: usize,
) -> Result<SampledCoefficient> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("ω = {omega} must be positive")));
    }
    let max_atom = a.atoms.iter().map(|x| x.order as usize).max();
    let needed = max_atom.map_or(k_max, |o| o + k_max);
    if needed > psi.max_derivative() {
        return Err(Error::Domain(format!(
            "derivative order {needed} exceeds the smoothness ({}) of the {} mollifier",
            psi.max_derivative(),
            psi.shape()
        )));
    }
    let conv = SmoothConvolution::new(&a.smooth, a.horizon, psi, omega);
    let mut derivatives = vec![vec![0.0; grid.len]; k_max + 1];
    for i in 0..grid.len {
        let t = grid.t(i);
        for (k, row) in derivatives.iter_mut().enumerate() {
            let mut v = conv.eval(t, k);
            for j in &a.jumps {
                let x = (t - j.at) / omega;
                v += if k == 0 {
                    j.height * psi.cumulative(x)
                } else {
                    j.height * psi.scaled_derivative(k - 1, t - j.at, omega)
                };
            }
            for at in &a.atoms {
                if ((t - at.at) / omega).abs() < 1.0 {
                    v += at.mass * psi.scaled_derivative(at.order as usize + k, t - at.at, omega);
                }
            }
            row[i] = v;
        }
    }
    Ok(SampledCoefficient {
        grid: *grid,
        derivatives,
        omega: Some(omega),
        provenance: format!("{} mollifier, omega = {omega:e}", psi.shape()),
    })
}

/// Samples a regular coefficient (no jumps or atoms) directly.
pub fn sample_exact(a: &RoughCoefficient, grid: &UniformGrid, k_max: usize) -> Result<SampledCoefficient> {
    if !a.is_regular() {
        return Err(Error::Refused(
            "exact sampling needs a coefficient without jumps or atoms; mollify it instead".into(),
        ));
    }
    let derivatives = (0..=k_max)
        .map(|k| {
            grid.times()
                .map(|t| a.smooth.derivative(k, t.clamp(0.0, a.horizon)))
                .collect()
        })
        .collect();
    Ok(SampledCoefficient {
        grid: *grid,
        derivatives,
        omega: None,
        provenance: "exact".into(),
    })
}

/// Minimum of the samples and whether it respects the floor `a0` up to
/// quadrature tolerance.
pub fn lower_bound_check(c: &SampledCoefficient, a0: f64) -> (bool, f64) {
    let min = c.min();
    (min >= a0 - FLOOR_CHECK_TOL * a0.abs().max(1.0), min)
}

/// How a [`TimeSignal`] turns its distribution into samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularization {
    Exact,
    Mollified { mollifier: Mollifier, omega: f64 },
}

/// A distributional time profile together with its regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub dist: RoughCoefficient,
    pub regularization: Regularization,
}

impl TimeSignal {
    pub fn exact(dist: RoughCoefficient) -> Self {
        TimeSignal {
            dist,
            regularization: Regularization::Exact,
        }
    }

    pub fn mollified(dist: RoughCoefficient, mollifier: Mollifier, omega: f64) -> Self {
        TimeSignal {
            dist,
            regularization: Regularization::Mollified { mollifier, omega },
        }
    }

    pub fn horizon(&self) -> f64 {
        self.dist.horizon
    }

    pub fn sample(&self, grid: &UniformGrid, k_max: usize) -> Result<SampledCoefficient> {
        match &self.regularization {
            Regularization::Exact => sample_exact(&self.dist, grid, k_max),
            Regularization::Mollified { mollifier, omega } => {
                mollify(&self.dist, mollifier, *omega, grid, k_max)
            }
        }
    }

    /// Like [`TimeSignal::sample`] but without requiring `grid` to resolve
    /// the mollifier width.
    pub fn sample_points(&self, grid: &UniformGrid, k_max: usize) -> Result<SampledCoefficient> {
        match &self.regularization {
            Regularization::Exact => sample_exact(&self.dist, grid, k_max),
            Regularization::Mollified { mollifier, omega } => {
                mollify_points(&self.dist, mollifier, *omega, grid, k_max)
            }
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match &self.regularization {
            Regularization::Exact => None,
            Regularization::Mollified { omega, .. } => Some(*omega),
        }
    }

    /// A priori bound on `sup |a_ε|` used for step planning.
    pub fn sup_bound(&self) -> f64 {
        let d = &self.dist;
        let mut b = d.smooth.sup_bound(d.horizon) + d.jumps.iter().map(|j| j.height.abs()).sum::<f64>();
        if let Regularization::Mollified { mollifier, omega } = &self.regularization {
            b += d
                .atoms
                .iter()
                .map(|a| {
                    let k = a.order as usize;
                    a.mass.abs() * mollifier.sup_abs_derivative(k) * omega.powi(-1 - k as i32)
                })
                .sum::<f64>();
        }
        b
    }

    /// Time scale that the solver grid must resolve, if any.
    pub fn resolution_scale(&self) -> Option<f64> {
        let mut scale = None::<f64>;
        if let Regularization::Mollified { omega, .. } = &self.regularization {
            if !self.dist.is_regular() || !matches!(self.dist.smooth, SmoothPart::Constant { .. }) {
                scale = Some(*omega);
            }
        }
        let kappa = self.dist.smooth.max_frequency();
        if kappa > 0.0 {
            let period = 2.0 * std::f64::consts::PI / kappa;
            scale = Some(scale.map_or(period, |s| s.min(period)));
        }
        scale
    }
}

/// Convolution of the constant-extended smooth part with `ψ_ω^{(k)}`.
/// `(amplitude, kappa, phase, ψ̂(kappa ω))`.
type TrigTerm = (f64, f64, f64, f64);

struct SmoothConvolution<'a> {
    part: &'a SmoothPart,
    horizon: f64,
    psi: &'a Mollifier,
    omega: f64,
    /// `(offset, [(amplitude, kappa, phase, ψ̂(kappa ω))])` for trigonometric families.
    trig: Option<(f64, Vec<TrigTerm>)>,
    tol: f64,
}

impl<'a> SmoothConvolution<'a> {
    fn new(part: &'a SmoothPart, horizon: f64, psi: &'a Mollifier, omega: f64) -> Self {
        let trig = part.trig_terms().map(|(offset, terms)| {
            (
                offset,
                terms
                    .into_iter()
                    .map(|t| (t.amplitude, t.kappa, t.phase, psi.cosine_transform(t.kappa * omega)))
                    .collect(),
            )
        });
        SmoothConvolution {
            part,
            horizon,
            psi,
            omega,
            trig,
            tol: MOLLIFY_QUAD_TOL * part.scale(),
        }
    }

    fn eval(&self, t: f64, k: usize) -> f64 {
        if let SmoothPart::Constant { c } = *self.part {
            return if k == 0 { c } else { 0.0 };
        }
        let interior = t - self.omega >= 0.0 && t + self.omega <= self.horizon;
        if interior {
            if let SmoothPart::Affine { c0, c1 } = *self.part {
                // ψ is even, so its first moment vanishes.
                return match k {
                    0 => c0 + c1 * t,
                    1 => c1,
                    _ => 0.0,
                };
            }
            if let Some((offset, terms)) = &self.trig {
                let shift = k as f64 * std::f64::consts::FRAC_PI_2;
                let sum: f64 = terms
                    .iter()
                    .map(|(amp, kappa, phase, hat)| {
                        amp * kappa.powi(k as i32) * hat * (kappa * t + phase + shift).cos()
                    })
                    .sum();
                return if k == 0 { offset + sum } else { sum };
            }
        }
        self.quadrature(t, k)
    }

    fn quadrature(&self, t: f64, k: usize) -> f64 {
        let w = self.omega;
        let tt = self.horizon;
        let f = |tau: f64| self.part.value((t - w * tau).clamp(0.0, tt)) * self.psi.derivative(k, tau);
        let mut cuts = vec![-1.0, 1.0];
        for c in [t / w, (t - tt) / w] {
            if c > -1.0 && c < 1.0 {
                cuts.push(c);
            }
        }
        cuts.extend_from_slice(self.psi.kinks());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let kappa = self.part.max_frequency();
        let pieces = cuts.len() - 1;
        let sum: f64 = cuts
            .windows(2)
            .map(|c| {
                let panels = ((c[1] - c[0]) * kappa * w / std::f64::consts::PI).ceil() as usize + 1;
                quadrature::integrate_panels(&f, c[0], c[1], panels, self.tol / pieces as f64)
            })
            .sum();
        sum * w.powi(-(k as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::super::MollifierShape;
    use super::*;

    fn bump() -> Mollifier {
        Mollifier::new(MollifierShape::Bump, 1e-10).unwrap()
    }

    #[test]
    fn constant_is_fixed_point() {
        let a = RoughCoefficient::constant(2.5, 1.0);
        let grid = UniformGrid::covering(1.0, 100);
        for shape in MollifierShape::ALL {
            let psi = Mollifier::new(shape, 1e-10).unwrap();
            for omega in [0.5, 0.1, 0.01] {
                let s = mollify(&a, &psi, omega, &grid, 1).unwrap();
                assert!(s.values().iter().all(|v| *v == 2.5));
                assert!(s.derivative(1).unwrap().iter().all(|v| *v == 0.0));
            }
        }
    }

    #[test]
    fn dirac_gives_scaled_kernel() {
        let psi = bump();
        let a = RoughCoefficient::constant(0.0, 1.0).with_atom(0.5, 1.0, 0);
        let grid = UniformGrid::covering(1.0, 1000);
        let s = mollify(&a, &psi, 0.1, &grid, 0).unwrap();
        assert!((s.values()[500] - psi.value(0.0) / 0.1).abs() < 1e-12);
        let t = grid.t(530);
        assert!((s.values()[530] - psi.value((t - 0.5) / 0.1) / 0.1).abs() < 1e-12);
    }

    #[test]
    fn heaviside_midpoint_is_half() {
        for shape in MollifierShape::ALL {
            let psi = Mollifier::new(shape, 1e-10).unwrap();
            let a = RoughCoefficient::constant(0.0, 1.0).with_jump(0.5, 1.0);
            let grid = UniformGrid::covering(1.0, 100);
            let s = mollify(&a, &psi, 0.1, &grid, 0).unwrap();
            assert!((s.values()[50] - 0.5).abs() < 1e-12, "{shape}");
        }
    }

    #[test]
    fn resolution_error_when_grid_too_coarse() {
        let a = RoughCoefficient::constant(1.0, 1.0).with_atom(0.5, 1.0, 0);
        let grid = UniformGrid::covering(1.0, 10);
        assert!(matches!(
            mollify(&a, &bump(), 0.01, &grid, 0),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn derivative_samples_match_centered_differences() {
        // Derivative samples come from ψ_ω', not from differencing the values.
        let psi = bump();
        let a = RoughCoefficient::smooth(SmoothPart::Sinusoid { c0: 1.0, c1: 0.5, kappa: 3.0 }, 2.0)
            .with_atom(1.0, 0.3, 0);
        for n in [400usize, 800] {
            let grid = UniformGrid::covering(2.0, n);
            let s = mollify(&a, &psi, 0.2, &grid, 1).unwrap();
            let v = s.values();
            let d = s.derivative(1).unwrap();
            let h = grid.step;
            let err = (1..n)
                .map(|i| ((v[i + 1] - v[i - 1]) / (2.0 * h) - d[i]).abs())
                .fold(0.0, f64::max);
                // centered-difference truncation error h²/6 · sup|a‴|
            let third = 0.3 * psi.sup_abs_derivative(3) / 0.2f64.powi(4) + 0.5 * 27.0;
            assert!(err < 1.5 * h * h / 6.0 * third, "n={n}: {err}");
        }
    }

    #[test]
    fn boundary_quadrature_agrees_with_interior_closed_form() {
        let psi = Mollifier::new(MollifierShape::CosineSquared, 1e-12).unwrap();
        let part = SmoothPart::Weierstrass { c0: 1.0, amplitude: 0.2, alpha: 0.5, terms: 8 };
        let conv = SmoothConvolution::new(&part, 1.0, &psi, 0.05);
        for &t in &[0.3, 0.5, 0.77] {
            for k in 0..=2 {
                let closed = conv.eval(t, k);
                let quad = conv.quadrature(t, k);
                assert!((closed - quad).abs() < 1e-8 * closed.abs().max(1.0), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn positive_measure_keeps_floor() {
        let psi = bump();
        let a = RoughCoefficient::constant(1.0, 1.0).with_atom(0.5, 1.0, 0).with_floor(1.0);
        let s = mollify(&a, &psi, 0.1, &UniformGrid::covering(1.0, 400), 0).unwrap();
        let (ok, min) = lower_bound_check(&s, 1.0);
        assert!(ok && min >= 1.0);
    }
}
