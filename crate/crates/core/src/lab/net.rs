use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{CauchyData, ScenarioProblem};
use crate::coefficients::{Mollifier, ScaleSchedule, TimeSignal};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::solver::rk4::Kernel;
use crate::solver::{min_resolution, plan_steps, step_quantum, IntegratorOptions, Method};
use crate::spectral::norms::{gevrey_norm_unchecked, sobolev_norm_unchecked};
use crate::spectral::{GevreySign, SpectralModel};

pub const DEFAULT_OUTPUT_INTERVALS: usize = 200;
pub const MIN_NET_POINTS: usize = 4;

/// The geometric net `{2^{-2}, …, 2^{-12}}`.
pub fn default_eps_net() -> Vec<f64> {
    (2..=12).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetOptions {
    pub integrator: IntegratorOptions,
    /// Number of output intervals shared by every mode and every ε.
    pub output_intervals: usize,
    /// Highest time derivative recorded.
    pub p_max: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        NetOptions {
            integrator: IntegratorOptions::default(),
            output_intervals: DEFAULT_OUTPUT_INTERVALS,
            p_max: 2,
        }
    }
}

/// Solutions of every mode on a shared output grid.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ModeSeries {
    pub grid: UniformGrid,
    pub steps: usize,
    /// `v[m][i]`, `vt[m][i]`.
    pub v: Vec<Vec<Complex64>>,
    pub vt: Vec<Vec<Complex64>>,
}

/// Integrates all modes of `data` with one step size, doubling the step
/// count until every mode passes its error check.
pub(crate) fn solve_modes(
    model: &SpectralModel,
    data: &CauchyData,
    a: &TimeSignal,
    g: Option<&TimeSignal>,
    opts: &IntegratorOptions,
    output_intervals: usize,
) -> Result<ModeSeries> {
    let horizon = a.horizon();
    let quantum = step_quantum(Some(output_intervals));
    let resolution = min_resolution(a.resolution_scale(), g.and_then(|g| g.resolution_scale()));
    let mut steps = plan_steps(
        model.max_frequency(),
        a.sup_bound(),
        resolution,
        horizon,
        opts.rtol,
        quantum,
    );
    let zero = Complex64::new(0.0, 0.0);
    let g_bound = g.map_or(0.0, |g| g.sup_bound());
    let spatial = |m: usize| data.source.as_ref().map_or(zero, |(_, h)| h.0[m]);
    let mut doublings = 0u32;
    let mut last_error = 0.0;
    loop {
        if steps > opts.max_steps {
            let prev = if doublings > 0 { steps / 2 } else { steps };
            return Err(Error::StepBudget {
                beta: model.max_frequency(),
                min_dt: horizon / prev as f64,
                steps: prev,
                local_error: last_error,
            });
        }
        let half = UniformGrid::covering(horizon, 2 * steps);
        let a_half = a.sample(&half, 0)?;
        let g_half = match g {
            Some(g) => Some(g.sample(&half, 0)?),
            None => None,
        };
        let stride = steps / output_intervals;
        let outputs: Vec<_> = (0..model.len())
            .into_par_iter()
            .map(|m| {
                let beta = model.frequencies()[m];
                let (v0, v1) = (data.u0.0[m], data.u1.0[m]);
                let kernel = Kernel {
                    beta,
                    a_half: a_half.values(),
                    g_half: g_half.as_ref().map(|g| g.values()),
                    h_hat: spatial(m),
                    h: horizon / steps as f64,
                    steps,
                    stride,
                };
                match opts.method {
                    Method::Rk4 => {
                        let floor = (beta * beta * v0.norm_sqr() + v1.norm_sqr()).sqrt()
                            + spatial(m).norm() * g_bound * horizon;
                        kernel.rk4(v0, v1, opts.rtol, floor)
                    }
                    Method::Verlet => kernel.verlet(v0, v1),
                }
            })
            .collect();
        let worst = outputs.iter().map(|o| o.worst_ratio).fold(0.0, f64::max);
        last_error = outputs.iter().map(|o| o.worst_error).fold(0.0, f64::max);
        if worst <= 1.0 {
            let (v, vt) = outputs.into_iter().map(|o| (o.v, o.vt)).unzip();
            return Ok(ModeSeries {
                grid: UniformGrid::covering(horizon, output_intervals),
                steps,
                v,
                vt,
            });
        }
        steps *= 2;
        doublings += 1;
    }
}

fn binomial_row(p: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..p {
        let mut next = vec![1.0; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row
}

/// `∂ₜ^p u` for `p ≤ p_max` from `u`, `∂ₜu` and
/// `∂ₜ^{p+2}u = ∂ₜ^p g ĥ − β² Σ_j C(p,j) ∂ₜ^j a ∂ₜ^{p−j}u`.
fn derivative_stack(
    beta: f64,
    v: Vec<Complex64>,
    vt: Vec<Complex64>,
    a_derivs: &[Vec<f64>],
    g_derivs: Option<&[Vec<f64>]>,
    h_hat: Complex64,
    p_max: usize,
) -> Vec<Vec<Complex64>> {
    let n = v.len();
    let mut out = vec![v, vt];
    let b2 = beta * beta;
    for p in 0..p_max.saturating_sub(1) {
        let binom = binomial_row(p);
        let next: Vec<Complex64> = (0..n)
            .map(|i| {
                let mut acc = g_derivs.map_or(Complex64::new(0.0, 0.0), |g| h_hat * g[p][i]);
                for (j, c) in binom.iter().enumerate() {
                    acc -= out[p - j][i] * (b2 * c * a_derivs[j][i]);
                }
                acc
            })
            .collect();
        out.push(next);
    }
    out.truncate(p_max + 1);
    out
}

/// One member `u_ε` of a net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetEntry {
    pub eps: f64,
    pub omega: f64,
    pub steps: usize,
    /// `derivs[p][m][i] = ∂ₜ^p û_m(t_i)`.
    pub derivs: Vec<Vec<Vec<Complex64>>>,
    /// `a_ε(t_i)`.
    pub coefficient: Vec<f64>,
}

impl NetEntry {
    fn column(&self, p: usize, i: usize) -> Vec<Complex64> {
        self.derivs[p].iter().map(|m| m[i]).collect()
    }

    /// `‖∂ₜ^p u_ε(t_i)‖_{H^order}` for every output time.
    pub fn sobolev_norms(&self, model: &SpectralModel, p: usize, order: f64) -> Vec<f64> {
        (0..self.times_len())
            .map(|i| sobolev_norm_unchecked(&self.column(p, i), model, order))
            .collect()
    }

    /// `‖e^{−ηℛ^{1/(2s)}} ∂ₜ^p u_ε(t_i)‖_{L²}` for every output time.
    pub fn gevrey_norms(&self, model: &SpectralModel, p: usize, s: f64, eta: f64) -> Result<Vec<f64>> {
        (0..self.times_len())
            .map(|i| gevrey_norm_unchecked(&self.column(p, i), model, s, eta, GevreySign::Minus))
            .collect()
    }

    pub fn times_len(&self) -> usize {
        self.derivs[0][0].len()
    }

    pub fn p_max(&self) -> usize {
        self.derivs.len() - 1
    }
}

/// A family `(u_ε)` of regularized solutions over an ε-net.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSolution {
    pub model: SpectralModel,
    pub s: f64,
    pub grid: UniformGrid,
    pub p_max: usize,
    pub eps: Vec<f64>,
    /// Per ε, the solution or the diagnostic of a failed solve.
    pub entries: Vec<std::result::Result<NetEntry, String>>,
}

impl NetSolution {
    /// Assembles a net from precomputed entries.
    pub fn from_entries(model: SpectralModel, s: f64, grid: UniformGrid, entries: Vec<NetEntry>) -> Result<Self> {
        let p_max = entries.iter().map(NetEntry::p_max).min().unwrap_or(0);
        for e in &entries {
            if e.derivs.iter().any(|d| d.len() != model.len() || d.iter().any(|m| m.len() != grid.len)) {
                return Err(Error::Mismatch(format!("net entry at ε = {} does not match model and grid", e.eps)));
            }
        }
        Ok(NetSolution {
            model,
            s,
            grid,
            p_max,
            eps: entries.iter().map(|e| e.eps).collect(),
            entries: entries.into_iter().map(Ok).collect(),
        })
    }

    pub fn solved(&self) -> impl Iterator<Item = &NetEntry> {
        self.entries.iter().filter_map(|e| e.as_ref().ok())
    }

    pub fn gaps(&self) -> Vec<(f64, String)> {
        self.eps
            .iter()
            .zip(&self.entries)
            .filter_map(|(eps, e)| e.as_ref().err().map(|msg| (*eps, msg.clone())))
            .collect()
    }

    /// `(ε, sup_t ‖∂ₜ^p u_ε‖_{H^order})` over solved entries.
    pub fn sup_sobolev(&self, p: usize, order: f64) -> (Vec<f64>, Vec<f64>) {
        self.solved()
            .map(|e| {
                let sup = e.sobolev_norms(&self.model, p, order).into_iter().fold(0.0, f64::max);
                (e.eps, sup)
            })
            .unzip()
    }

    /// `(ε, sup_t ‖e^{−ηℛ^{1/(2s)}} ∂ₜ^p u_ε‖)` over solved entries.
    pub fn sup_gevrey(&self, p: usize, s: f64, eta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut eps = Vec::new();
        let mut vals = Vec::new();
        for e in self.solved() {
            eps.push(e.eps);
            vals.push(e.gevrey_norms(&self.model, p, s, eta)?.into_iter().fold(0.0, f64::max));
        }
        Ok((eps, vals))
    }

    /// Sobolev order of the solution component, `s + ν/2`.
    pub fn energy_order(&self) -> f64 {
        self.s + self.model.nu / 2.0
    }
}

pub fn check_eps_net(eps: &[f64]) -> Result<()> {
    let mut errors = Vec::new();
    if eps.len() < MIN_NET_POINTS {
        errors.push(format!("ε-net needs at least {MIN_NET_POINTS} points, got {}", eps.len()));
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        errors.push("every ε must lie in (0, 1]".to_string());
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        errors.push("ε-net must be strictly descending".to_string());
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(errors))
    }
}

/// Solves the regularized problem with `a_ε = a ∗ ψ_{ω(ε)}` and
/// `g_ε = g ∗ ψ_{ω(ε)}` for every ε of the net.
///
/// A failed ε is recorded as a gap and the net continues.
pub fn solve_regularized_net(
    p: &ScenarioProblem,
    psi: &Mollifier,
    sched: &ScaleSchedule,
    eps_net: &[f64],
    opts: &NetOptions,
) -> Result<NetSolution> {
    check_eps_net(eps_net)?;
    p.coefficient.validate()?;
    let k_max = opts.p_max.saturating_sub(2);
    let orders = p
        .coefficient
        .atoms
        .iter()
        .chain(p.data.source.iter().flat_map(|(g, _)| g.atoms.iter()))
        .map(|a| a.order as usize)
        .max()
        .unwrap_or(0);
    if orders + k_max > psi.max_derivative() {
        return Err(Error::Config(format!(
            "p_max = {} needs {} derivatives of the {} mollifier, which has {}",
            opts.p_max,
            orders + k_max,
            psi.shape(),
            psi.max_derivative()
        )));
    }
    let grid = UniformGrid::covering(p.horizon(), opts.output_intervals);
    let mut entries = Vec::with_capacity(eps_net.len());
    for &eps in eps_net {
        entries.push(solve_member(p, psi, sched, eps, &grid, opts).map_err(|e| e.to_string()));
    }
    Ok(NetSolution {
        model: p.model.clone(),
        s: p.s,
        grid,
        p_max: opts.p_max,
        eps: eps_net.to_vec(),
        entries,
    })
}

fn solve_member(
    p: &ScenarioProblem,
    psi: &Mollifier,
    sched: &ScaleSchedule,
    eps: f64,
    grid: &UniformGrid,
    opts: &NetOptions,
) -> Result<NetEntry> {
    let omega = sched.omega(eps)?;
    let a = TimeSignal::mollified(p.coefficient.clone(), psi.clone(), omega);
    let g = p
        .data
        .source
        .as_ref()
        .map(|(g, _)| TimeSignal::mollified(g.clone(), psi.clone(), omega));
    regularized_entry(p, &a, g.as_ref(), eps, omega, grid, opts)
}

pub(crate) fn regularized_entry(
    p: &ScenarioProblem,
    a: &TimeSignal,
    g: Option<&TimeSignal>,
    eps: f64,
    omega: f64,
    grid: &UniformGrid,
    opts: &NetOptions,
) -> Result<NetEntry> {
    let series = solve_modes(&p.model, &p.data, a, g, &opts.integrator, opts.output_intervals)?;
    let k_max = opts.p_max.saturating_sub(2);
    let a_out = a.sample_points(grid, k_max)?;
    let g_out = match g {
        Some(g) => Some(g.sample_points(grid, k_max)?),
        None => None,
    };
    let zero = Complex64::new(0.0, 0.0);
    let derivs_by_mode: Vec<Vec<Vec<Complex64>>> = series
        .v
        .into_par_iter()
        .zip(series.vt)
        .enumerate()
        .map(|(m, (v, vt))| {
            let h_hat = p.data.source.as_ref().map_or(zero, |(_, h)| h.0[m]);
            derivative_stack(
                p.model.frequencies()[m],
                v,
                vt,
                &a_out.derivatives,
                g_out.as_ref().map(|g| g.derivatives.as_slice()),
                h_hat,
                opts.p_max,
            )
        })
        .collect();
    let mut derivs = vec![Vec::with_capacity(p.model.len()); opts.p_max + 1];
    for stack in derivs_by_mode {
        for (k, d) in stack.into_iter().enumerate() {
            derivs[k].push(d);
        }
    }
    Ok(NetEntry {
        eps,
        omega,
        steps: series.steps,
        derivs,
        coefficient: a_out.derivatives.into_iter().next().expect("k = 0 sampled"),
    })
}
