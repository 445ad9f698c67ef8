use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moderate::{moderateness_report, negligibility_from_series, sup_difference, NegligibilityReport};
use super::net::{check_eps_net, solve_modes, solve_regularized_net, ModeSeries, NetOptions};
use super::problem::ScenarioProblem;
use super::regimes::{regime_advisor, CoefficientClass};
use crate::coefficients::{Mollifier, ScaleSchedule, TimeSignal};
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::grid::UniformGrid;
use crate::solver::{solve_mode, IntegratorOptions, ModeProblem, REFERENCE_TIGHTENING};
use crate::spectral::norms::gevrey_norm_unchecked;
use crate::spectral::{GevreySign, SpectralModel};

/// Least-squares slope of `log value` against `log ε` over positive values;
/// infinite when every value vanishes.
fn decay_slope(eps: &[f64], values: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(e, v)| (e.ln(), v.ln()))
        .unzip();
    match x.len() {
        0 => f64::INFINITY,
        1 => 0.0,
        _ => least_squares(&x, &y).1,
    }
}

/// `sup_t ‖Δu‖_{H^{s+ν/2}}` and `sup_t ‖Δu_t‖_{H^s}` between two series.
fn solution_distance(
    model: &SpectralModel,
    s: f64,
    u: (&[Vec<Complex64>], &[Vec<Complex64>]),
    w: (&[Vec<Complex64>], &[Vec<Complex64>]),
) -> (f64, f64) {
    (
        sup_difference(model, u.0, w.0, s + model.nu / 2.0),
        sup_difference(model, u.1, w.1, s),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRow {
    pub eps: f64,
    pub omega: f64,
    /// `sup_t |a_ε^{(1)} − a_ε^{(2)}|`.
    pub coef_diff: f64,
    /// `sup_t ‖Δu‖_{H^{s+ν/2}} + sup_t ‖Δu_t‖_{H^s}`.
    pub sol_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub rows: Vec<UniquenessRow>,
    pub coef_slope: f64,
    pub sol_slope: f64,
    pub final_diff: f64,
    /// Exponent `N` of the first net's moderateness fit.
    pub moderateness_loss: f64,
    pub negligibility: NegligibilityReport,
    /// `sol_slope ≥ coef_slope − N`; `None` for a distributional
    /// coefficient, where no verdict is claimed.
    pub dominates: Option<bool>,
}

fn coefficient_difference(
    p: &ScenarioProblem,
    psi1: &Mollifier,
    psi2: &Mollifier,
    omega: f64,
) -> Result<f64> {
    let horizon = p.horizon();
    let n = ((8.0 * horizon / omega).ceil() as usize).clamp(2000, 200_000);
    let grid = UniformGrid::covering(horizon, n);
    let a1 = TimeSignal::mollified(p.coefficient.clone(), psi1.clone(), omega).sample_points(&grid, 0)?;
    let a2 = TimeSignal::mollified(p.coefficient.clone(), psi2.clone(), omega).sample_points(&grid, 0)?;
    Ok(a1
        .values()
        .iter()
        .zip(a2.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Runs the nets of two mollifiers and measures how fast they merge.
pub fn uniqueness_experiment(
    p: &ScenarioProblem,
    psi1: &Mollifier,
    psi2: &Mollifier,
    sched: &ScaleSchedule,
    eps_net: &[f64],
    ell_list: &[f64],
    opts: &NetOptions,
) -> Result<UniquenessReport> {
    let opts = NetOptions {
        p_max: opts.p_max.max(1),
        ..*opts
    };
    let net1 = solve_regularized_net(p, psi1, sched, eps_net, &opts)?;
    let net2 = solve_regularized_net(p, psi2, sched, eps_net, &opts)?;
    let mut rows = Vec::new();
    let mut series = vec![Vec::new(); opts.p_max + 1];
    for (x, y) in net1.entries.iter().zip(&net2.entries) {
        let (Ok(x), Ok(y)) = (x, y) else { continue };
        let (ch, c1h) = solution_distance(
            &p.model,
            p.s,
            (&x.derivs[0], &x.derivs[1]),
            (&y.derivs[0], &y.derivs[1]),
        );
        rows.push(UniquenessRow {
            eps: x.eps,
            omega: x.omega,
            coef_diff: coefficient_difference(p, psi1, psi2, x.omega)?,
            sol_diff: ch + c1h,
        });
        for (k, s) in series.iter_mut().enumerate() {
            s.push(sup_difference(&p.model, &x.derivs[k], &y.derivs[k], p.s));
        }
    }
    if rows.len() < 2 {
        return Err(Error::Domain("fewer than two ε solved for both mollifiers".into()));
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let coef: Vec<f64> = rows.iter().map(|r| r.coef_diff).collect();
    let sol: Vec<f64> = rows.iter().map(|r| r.sol_diff).collect();
    let coef_slope = decay_slope(&eps, &coef);
    let sol_slope = decay_slope(&eps, &sol);
    let moderateness_loss = moderateness_report(&net1, 1)?.n;
    let regular = p.coefficient.is_regular() && p.data.source.as_ref().is_none_or(|(g, _)| g.is_regular());
    Ok(UniquenessReport {
        final_diff: *sol.last().expect("nonempty"),
        coef_slope,
        sol_slope,
        moderateness_loss,
        negligibility: negligibility_from_series(&eps, &series, ell_list),
        dominates: regular.then_some(sol_slope >= coef_slope - moderateness_loss),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyErrorNorm {
    pub s: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyOptions {
    pub threshold: f64,
    /// Allowed relative increase between consecutive errors.
    pub monotone_tolerance: f64,
    pub gevrey: Option<GevreyErrorNorm>,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        ConsistencyOptions {
            threshold: 1e-3,
            monotone_tolerance: 0.05,
            gevrey: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub eps: f64,
    pub omega: f64,
    /// `sup_t ‖u_ε − ũ‖_{H^{s+ν/2}}`.
    pub err_ch: f64,
    /// `sup_t ‖∂ₜu_ε − ∂ₜũ‖_{H^s}`.
    pub err_c1h: f64,
    /// `sup_t ‖e^{Aℛ^{1/(2s)}}(u_ε − ũ)‖` when requested.
    pub err_gevrey: Option<f64>,
}

impl ConsistencyRow {
    pub fn total(&self) -> f64 {
        self.err_ch + self.err_c1h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub slope: f64,
    pub monotone: bool,
    pub final_error: f64,
    pub threshold: f64,
    pub consistent: bool,
    pub gaps: Vec<(f64, String)>,
}

/// Solves the classical problem with the exact coefficient and source on
/// the shared output grid, at a tolerance tightened by
/// [`REFERENCE_TIGHTENING`].
pub(crate) fn classical_series(
    p: &ScenarioProblem,
    opts: &IntegratorOptions,
    output_intervals: usize,
) -> Result<ModeSeries> {
    let a = TimeSignal::exact(p.coefficient.clone());
    let g = p.data.source.as_ref().map(|(g, _)| TimeSignal::exact(g.clone()));
    let tight = IntegratorOptions {
        rtol: opts.rtol / REFERENCE_TIGHTENING,
        ..*opts
    };
    solve_modes(&p.model, &p.data, &a, g.as_ref(), &tight, output_intervals)
}

pub fn consistency_experiment(
    p: &ScenarioProblem,
    psi: &Mollifier,
    sched: &ScaleSchedule,
    eps_net: &[f64],
    opts: &NetOptions,
    copts: &ConsistencyOptions,
) -> Result<ConsistencyReport> {
    let source_regular = p.data.source.as_ref().is_none_or(|(g, _)| g.is_regular());
    if !p.coefficient.is_regular() || !source_regular {
        return Err(Error::Refused(
            "consistency needs a regular coefficient and source; use the regularized net for distributional data".into(),
        ));
    }
    check_eps_net(eps_net)?;
    let reference = classical_series(p, &opts.integrator, opts.output_intervals)?;
    let net = solve_regularized_net(p, psi, sched, eps_net, &NetOptions { p_max: 1, ..*opts })?;
    let mut rows = Vec::new();
    for e in net.solved() {
        let (err_ch, err_c1h) = solution_distance(
            &p.model,
            p.s,
            (&e.derivs[0], &e.derivs[1]),
            (&reference.v, &reference.vt),
        );
        let err_gevrey = match copts.gevrey {
            None => None,
            Some(g) => {
                let mut worst = 0.0_f64;
                for i in 0..net.grid.len {
                    let col: Vec<Complex64> = e.derivs[0].iter().zip(&reference.v).map(|(x, y)| x[i] - y[i]).collect();
                    worst = worst.max(gevrey_norm_unchecked(&col, &p.model, g.s, g.a, GevreySign::Plus)?);
                }
                Some(worst)
            }
        };
        rows.push(ConsistencyRow {
            eps: e.eps,
            omega: e.omega,
            err_ch,
            err_c1h,
            err_gevrey,
        });
    }
    if rows.is_empty() {
        return Err(Error::Domain("no member of the net could be solved".into()));
    }
    let totals: Vec<f64> = rows.iter().map(ConsistencyRow::total).collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let monotone = totals
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + copts.monotone_tolerance));
    let final_error = *totals.last().expect("nonempty");
    Ok(ConsistencyReport {
        slope: decay_slope(&eps, &totals),
        monotone,
        final_error,
        threshold: copts.threshold,
        consistent: monotone && final_error <= copts.threshold,
        gaps: net.gaps(),
        rows,
    })
}

/// `count` geometrically spaced values from `lo` to `hi`.
pub fn geometric_betas(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo * (r * i as f64).exp() })
        .collect()
}

/// Initial data for the amplification measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmplificationData {
    /// Supremum over all initial data: the norm of the propagator acting on
    /// `(βv, v′)`.
    Worst,
    Fixed { v0: Complex64, v1: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationOptions {
    pub data: AmplificationData,
    /// Largest admissible `max / median` of the normalized ratio.
    pub factor: f64,
    pub integrator: IntegratorOptions,
}

impl Default for AmplificationOptions {
    fn default() -> Self {
        AmplificationOptions {
            data: AmplificationData::Worst,
            factor: 10.0,
            integrator: IntegratorOptions::default(),
        }
    }
}

/// Largest singular value squared of the real 2×2 matrix `[[p, q], [r, s]]`.
fn spectral_norm_sq(p: f64, q: f64, r: f64, s: f64) -> f64 {
    let sigma = 0.5 * ((p + s).hypot(q - r) + (p - s).hypot(q + r));
    sigma * sigma
}

fn amplification(a: &TimeSignal, beta: f64, opts: &AmplificationOptions) -> Result<f64> {
    let solve = |v0: Complex64, v1: Complex64| solve_mode(&ModeProblem::new(beta, a.clone(), v0, v1), &opts.integrator);
    match opts.data {
        AmplificationData::Fixed { v0, v1 } => {
            let tr = solve(v0, v1)?;
            let peak = (0..tr.v.len()).map(|i| tr.state_norm_sq(i)).fold(0.0, f64::max);
            Ok(peak / tr.state_norm_sq(0))
        }
        AmplificationData::Worst => {
            let zero = Complex64::new(0.0, 0.0);
            let first = solve(Complex64::new(1.0 / beta, 0.0), zero)?;
            let second = solve(zero, Complex64::new(1.0, 0.0))?;
            let second = if second.meta.steps == first.meta.steps {
                second
            } else {
                let steps = first.meta.steps.max(second.meta.steps);
                let pinned = IntegratorOptions {
                    output_intervals: Some(steps),
                    ..opts.integrator
                };
                let p = |v0, v1| solve_mode(&ModeProblem::new(beta, a.clone(), v0, v1), &pinned);
                return worst_case(&p(Complex64::new(1.0 / beta, 0.0), zero)?, &p(zero, Complex64::new(1.0, 0.0))?, beta);
            };
            worst_case(&first, &second, beta)
        }
    }
}

fn worst_case(first: &crate::solver::ModeTrajectory, second: &crate::solver::ModeTrajectory, beta: f64) -> Result<f64> {
    if first.v.len() != second.v.len() {
        return Err(Error::Mismatch("basis solutions recorded on different grids".into()));
    }
    Ok((0..first.v.len())
        .map(|i| {
            spectral_norm_sq(
                beta * first.v[i].re,
                beta * second.v[i].re,
                first.vt[i].re,
                second.vt[i].re,
            )
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationRow {
    pub beta: f64,
    /// `sup_t (|βv|² + |v′|²) / (|βv₀|² + |v₁|²)`.
    pub amplification: f64,
    /// `log A(β) / β^{1/s}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub s: f64,
    pub rows: Vec<AmplificationRow>,
    /// Envelope slope `K′` of `log A` against `β^{1/s}`.
    pub k_prime: f64,
    pub log_constant: f64,
    pub max_over_median: f64,
    pub bounded: bool,
    /// `log A ≈ 0` throughout: no growth at all.
    pub trivial: bool,
}

const TRIVIAL_LOG_AMPLIFICATION: f64 = 1e-8;

/// Measures `A(β)` with `f ≡ 0` for each β and tests whether
/// `log A(β) / β^{1/s}` stays bounded over the list.
pub fn gevrey_amplification_scan(
    a: &TimeSignal,
    class: Option<CoefficientClass>,
    s: f64,
    betas: &[f64],
    opts: &AmplificationOptions,
) -> Result<AmplificationReport> {
    if s < 1.0 {
        return Err(Error::Domain(format!("Gevrey order s = {s} must be at least 1")));
    }
    if let Some(c) = class {
        regime_advisor(c)?.admits(s).map_err(Error::Domain)?;
    }
    let (lo, hi) = betas
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), b| (lo.min(*b), hi.max(*b)));
    if betas.len() < 3 || lo.is_nan() || lo <= 0.0 || hi / lo < 100.0 {
        return Err(Error::Domain("β list must have at least 3 positive values spanning two decades".into()));
    }
    if let AmplificationData::Fixed { v0, v1 } = opts.data {
        if v0.norm() == 0.0 && v1.norm() == 0.0 {
            return Err(Error::Domain("amplification is undefined for zero initial data".into()));
        }
    }
    let rows: Vec<AmplificationRow> = betas
        .par_iter()
        .map(|&beta| {
            let amplification = amplification(a, beta, opts)?;
            Ok(AmplificationRow {
                beta,
                amplification,
                ratio: amplification.ln() / beta.powf(1.0 / s),
            })
        })
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = rows.iter().map(|r| r.amplification.ln()).collect();
    let trivial = logs.iter().all(|l| l.abs() <= TRIVIAL_LOG_AMPLIFICATION);
    if trivial {
        return Ok(AmplificationReport {
            s,
            rows,
            k_prime: 0.0,
            log_constant: 0.0,
            max_over_median: 1.0,
            bounded: true,
            trivial,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.beta.powf(1.0 / s)).collect();
    let k_prime = least_squares(&x, &logs).1.max(0.0);
    let log_constant = x
        .iter()
        .zip(&logs)
        .map(|(x, y)| y - k_prime * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    let median = if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    };
    let max = ratios[n - 1];
    let max_over_median = if median > 0.0 { max / median } else { f64::INFINITY };
    Ok(AmplificationReport {
        s,
        rows,
        k_prime,
        log_constant,
        max_over_median,
        bounded: max_over_median <= opts.factor,
        trivial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub modes: usize,
    /// `sup_t LHS(t) / RHS`.
    pub c_emp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    /// Largest ratio between the constants of different mode counts.
    pub spread: f64,
}

fn audit_constant(p: &ScenarioProblem, series: &ModeSeries) -> Result<f64> {
    let model = &p.model;
    let hi = p.s + model.nu / 2.0;
    let weight = |order: f64, m: usize| {
        let pi = model.frequencies()[m];
        model.weights()[m] * (1.0 + pi * pi).powf(2.0 * order / model.nu)
    };
    let data_sq: f64 = (0..model.len())
        .map(|m| weight(hi, m) * p.data.u0.0[m].norm_sqr() + weight(p.s, m) * p.data.u1.0[m].norm_sqr())
        .sum();
    let source_sq = match &p.data.source {
        None => 0.0,
        Some((g, h)) => {
            let g_sup = crate::coefficients::sample_exact(g, &series.grid, 0)?
                .values()
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            let h_sq: f64 = (0..model.len()).map(|m| weight(p.s, m) * h.0[m].norm_sqr()).sum();
            g_sup * g_sup * h_sq
        }
    };
    let rhs = data_sq + source_sq;
    let lhs = (0..series.grid.len)
        .map(|i| {
            (0..model.len())
                .map(|m| weight(hi, m) * series.v[m][i].norm_sqr() + weight(p.s, m) * series.vt[m][i].norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    if rhs == 0.0 {
        if lhs > 0.0 {
            return Err(Error::Mismatch(format!(
                "solution norm {lhs:e} with zero data and source indicates a solver defect"
            )));
        }
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Empirical constant of the energy inequality
/// `‖u(t)‖²_{H^{s+ν/2}} + ‖∂ₜu(t)‖²_{H^s} ≤ C (‖u₀‖²_{H^{s+ν/2}} + ‖u₁‖²_{H^s} + ‖f‖²_{C H^s})`
/// for the problem resized by each factor.
pub fn energy_inequality_audit(
    p: &ScenarioProblem,
    factors: &[usize],
    opts: &IntegratorOptions,
    output_intervals: usize,
) -> Result<AuditReport> {
    let floor = p.coefficient.floor.unwrap_or(f64::NEG_INFINITY);
    if !p.coefficient.is_regular() || p.data.source.as_ref().is_some_and(|(g, _)| !g.is_regular()) {
        return Err(Error::Refused("the energy audit needs a regular coefficient and source".into()));
    }
    let a = TimeSignal::exact(p.coefficient.clone());
    let a_min = a
        .sample(&UniformGrid::covering(p.horizon(), 2000), 0)?
        .min()
        .max(floor);
    if a_min <= 0.0 {
        return Err(Error::Refused(format!(
            "the energy audit needs a strictly positive coefficient (min a = {a_min:e})"
        )));
    }
    let mut rows = Vec::new();
    for &f in factors {
        let q = if f == 1 { p.clone() } else { p.resized(f)? };
        let g = q.data.source.as_ref().map(|(g, _)| TimeSignal::exact(g.clone()));
        let series = solve_modes(&q.model, &q.data, &a, g.as_ref(), opts, output_intervals)?;
        rows.push(AuditRow {
            modes: q.model.len(),
            c_emp: audit_constant(&q, &series)?,
        });
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r.c_emp), hi.max(r.c_emp)));
    let spread = if hi == 0.0 { 1.0 } else { hi / lo };
    Ok(AuditReport { rows, spread })
}
