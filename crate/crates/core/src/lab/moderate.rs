use serde::{Deserialize, Serialize};

use super::net::NetSolution;
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, least_squares, local_slopes, GrowthFit, DEFAULT_ENVELOPE_FACTOR};

/// How far the last local slope may exceed the certified exponent.
pub const TAIL_SLOPE_SLACK: f64 = 0.5;
/// Tolerance on the decay slope when certifying negligibility.
pub const NEGLIGIBLE_SLACK: f64 = 0.1;

/// Fit of one derivative order against `1/ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub p: usize,
    pub eps: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub fit: GrowthFit,
    /// Fitted `N̂_p`, zero for an identically vanishing series.
    pub n_hat: f64,
    /// Smallest `c_p` with `sup_norm ≤ c_p ε^{−N−p}` on the net.
    pub constant: f64,
    pub tail_slope: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerateReport {
    pub orders: Vec<OrderFit>,
    /// Single exponent `N = max(0, max_p(N̂_p − p))`.
    pub n: f64,
    pub moderate: bool,
}

/// Certifies `series[p][j] ≤ c_p ε_j^{−N−p}` with one `N` for all `p`.
///
/// An order is valid when the log–log fit describes the data (envelope
/// within [`DEFAULT_ENVELOPE_FACTOR`] of the regression line) and the last
/// local slope does not outrun `N + p` by more than [`TAIL_SLOPE_SLACK`].
pub fn moderateness_from_series(eps: &[f64], series: &[Vec<f64>]) -> ModerateReport {
    let x: Vec<f64> = eps.iter().map(|e| 1.0 / e).collect();
    let fits: Vec<GrowthFit> = series.iter().map(|s| fit_power_law(&x, s, DEFAULT_ENVELOPE_FACTOR)).collect();
    let n = fits
        .iter()
        .enumerate()
        .filter_map(|(p, f)| f.slope().map(|s| s - p as f64))
        .fold(0.0, f64::max);
    let orders: Vec<OrderFit> = series
        .iter()
        .zip(fits)
        .enumerate()
        .map(|(p, (s, fit))| {
            let exponent = n + p as f64;
            let constant = s
                .iter()
                .zip(eps)
                .map(|(v, e)| v * e.powf(exponent))
                .fold(0.0, f64::max);
            let tail_slope = tail_slope(&x, s);
            let valid = match &fit {
                GrowthFit::IdenticallyZero => true,
                GrowthFit::Fitted(f) => {
                    f.envelope_ok && tail_slope <= exponent + TAIL_SLOPE_SLACK && constant.is_finite()
                }
            };
            OrderFit {
                p,
                eps: eps.to_vec(),
                sup_norms: s.clone(),
                n_hat: fit.slope().unwrap_or(0.0),
                fit,
                constant,
                tail_slope,
                valid,
            }
        })
        .collect();
    let moderate = orders.iter().all(|o| o.valid);
    ModerateReport { orders, n, moderate }
}

/// Local log–log slope between the last two positive samples; `−∞` when
/// the series ends in zeros.
fn tail_slope(x: &[f64], s: &[f64]) -> f64 {
    let n = s.len();
    if n < 2 {
        return 0.0;
    }
    match (s[n - 2] > 0.0, s[n - 1] > 0.0) {
        (true, true) => local_slopes(&x[n - 2..], &s[n - 2..])[0],
        (_, false) => f64::NEG_INFINITY,
        (false, true) => f64::INFINITY,
    }
}

/// Moderateness of `sup_t ‖∂ₜ^p u_ε‖_{H^s}` for `p ≤ p_max`.
pub fn moderateness_report(net: &NetSolution, p_max: usize) -> Result<ModerateReport> {
    if p_max > net.p_max {
        return Err(Error::Config(format!(
            "moderateness for p ≤ {p_max} requested but the net records p ≤ {}",
            net.p_max
        )));
    }
    let mut eps = Vec::new();
    let series: Vec<Vec<f64>> = (0..=p_max)
        .map(|p| {
            let (e, v) = net.sup_sobolev(p, net.s);
            eps = e;
            v
        })
        .collect();
    if eps.len() < 2 {
        return Err(Error::Domain("fewer than two solved net members".into()));
    }
    Ok(moderateness_from_series(&eps, &series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyModerateRow {
    pub eta: f64,
    pub report: ModerateReport,
    /// Whether the weighted mode sequence decays towards the truncation edge.
    pub tail_decays: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyModerateReport {
    pub s: f64,
    pub rows: Vec<GevreyModerateRow>,
    /// Smallest η of the grid that is certified.
    pub certified_eta: Option<f64>,
}

/// Checks whether `max_t e^{−ηπ_m^{1/s}} √μ_m |∂ₜ^p û_m|` peaks below the
/// upper half of the modes, i.e. the weighted sequence is not still rising
/// at the truncation edge.
fn weighted_tail_decays(net: &NetSolution, p_max: usize, s: f64, eta: f64) -> bool {
    let m = net.model.len();
    let half = m / 2;
    net.solved().all(|e| {
        (0..=p_max).all(|p| {
            let w: Vec<f64> = (0..m)
                .map(|k| {
                    let pi = net.model.frequencies()[k];
                    let weight = (-eta * pi.powf(1.0 / s)).exp() * net.model.weights()[k].sqrt();
                    e.derivs[p][k].iter().map(|z| z.norm()).fold(0.0, f64::max) * weight
                })
                .collect();
            let head = w[..half.max(1)].iter().copied().fold(0.0, f64::max);
            let tail = w[half.max(1)..].iter().copied().fold(0.0, f64::max);
            tail <= head * (1.0 + 1e-9)
        })
    })
}

/// For each η of the grid (ascending), certifies power-law moderateness of
/// `sup_t ‖e^{−ηℛ^{1/(2s)}}∂ₜ^p u_ε‖` together with decay of the weighted
/// modes; reports the smallest η that passes.
pub fn gevrey_moderateness_report(
    net: &NetSolution,
    s: f64,
    eta_grid: &[f64],
    p_max: usize,
) -> Result<GevreyModerateReport> {
    if eta_grid.is_empty() {
        return Err(Error::Config("η grid is empty".into()));
    }
    if s < 1.0 {
        return Err(Error::Domain(format!("Gevrey order s = {s} must be at least 1")));
    }
    if p_max > net.p_max {
        return Err(Error::Config(format!(
            "p ≤ {p_max} requested but the net records p ≤ {}",
            net.p_max
        )));
    }
    let mut grid = eta_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut rows = Vec::with_capacity(grid.len());
    for eta in grid {
        let mut eps = Vec::new();
        let mut series = Vec::new();
        for p in 0..=p_max {
            let (e, v) = net.sup_gevrey(p, s, eta)?;
            eps = e;
            series.push(v);
        }
        rows.push(GevreyModerateRow {
            eta,
            report: moderateness_from_series(&eps, &series),
            tail_decays: weighted_tail_decays(net, p_max, s, eta),
        });
    }
    let certified_eta = rows
        .iter()
        .find(|r| r.report.moderate && r.tail_decays)
        .map(|r| r.eta);
    Ok(GevreyModerateReport {
        s,
        rows,
        certified_eta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log d` against `log ε` (positive for decay);
    /// infinite for an identically vanishing series.
    pub slope: f64,
    pub tail_slope: f64,
}

impl DecayFit {
    pub fn new(eps: &[f64], values: &[f64]) -> Self {
        let (lx, ly): (Vec<f64>, Vec<f64>) = eps
            .iter()
            .zip(values)
            .filter(|(_, v)| **v > 0.0)
            .map(|(e, v)| (e.ln(), v.ln()))
            .unzip();
        let slope = match lx.len() {
            0 => f64::INFINITY,
            1 => 0.0,
            _ => least_squares(&lx, &ly).1,
        };
        let n = values.len();
        let tail_slope = if n < 2 {
            slope
        } else {
            match (values[n - 2] > 0.0, values[n - 1] > 0.0) {
                (true, true) => local_slopes(&eps[n - 2..], &values[n - 2..])[0],
                (_, false) => f64::INFINITY,
                (false, true) => f64::NEG_INFINITY,
            }
        };
        DecayFit {
            eps: eps.to_vec(),
            values: values.to_vec(),
            slope,
            tail_slope,
        }
    }

    /// `d_ε ≤ c ε^ℓ` is supported on the net.
    pub fn negligible_at(&self, ell: f64) -> bool {
        self.slope.min(self.tail_slope) >= ell - NEGLIGIBLE_SLACK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegligibilityReport {
    /// One decay fit per derivative order.
    pub orders: Vec<DecayFit>,
    /// `(ℓ, negligible for every order)`.
    pub verdicts: Vec<(f64, bool)>,
}

pub fn negligibility_from_series(eps: &[f64], series: &[Vec<f64>], ell_list: &[f64]) -> NegligibilityReport {
    let orders: Vec<DecayFit> = series.iter().map(|s| DecayFit::new(eps, s)).collect();
    let verdicts = ell_list
        .iter()
        .map(|&ell| (ell, orders.iter().all(|o| o.negligible_at(ell))))
        .collect();
    NegligibilityReport { orders, verdicts }
}

/// Negligibility of `u^a_ε − u^b_ε` in `sup_t ‖∂ₜ^p ·‖_{H^s}`.
pub fn negligibility_test(a: &NetSolution, b: &NetSolution, ell_list: &[f64]) -> Result<NegligibilityReport> {
    if a.eps != b.eps || a.model != b.model || a.grid != b.grid || a.s != b.s {
        return Err(Error::invalid("nets differ in ε-net, model, grid or Sobolev order"));
    }
    let p_max = a.p_max.min(b.p_max);
    let pairs: Vec<_> = a
        .entries
        .iter()
        .zip(&b.entries)
        .filter_map(|(x, y)| Some((x.as_ref().ok()?, y.as_ref().ok()?)))
        .collect();
    let eps: Vec<f64> = pairs.iter().map(|(x, _)| x.eps).collect();
    let series: Vec<Vec<f64>> = (0..=p_max)
        .map(|p| {
            pairs
                .iter()
                .map(|(x, y)| sup_difference(&a.model, &x.derivs[p], &y.derivs[p], a.s))
                .collect()
        })
        .collect();
    Ok(negligibility_from_series(&eps, &series, ell_list))
}

/// `sup_i ‖x(t_i) − y(t_i)‖_{H^order}` for per-mode series `x[m][i]`.
pub(crate) fn sup_difference(
    model: &crate::spectral::SpectralModel,
    x: &[Vec<num_complex::Complex64>],
    y: &[Vec<num_complex::Complex64>],
    order: f64,
) -> f64 {
    let n = x[0].len();
    (0..n)
        .map(|i| {
            let col: Vec<_> = x.iter().zip(y).map(|(a, b)| a[i] - b[i]).collect();
            crate::spectral::norms::sobolev_norm_unchecked(&col, model, order)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> Vec<f64> {
        (2..=12).map(|k| 2f64.powi(-k)).collect()
    }

    #[test]
    fn inverse_square_series() {
        let eps = net();
        let s: Vec<f64> = eps.iter().map(|e| e.powi(-2)).collect();
        let r = moderateness_from_series(&eps, &[s]);
        assert!((r.orders[0].n_hat - 2.0).abs() < 1e-12);
        assert!(r.moderate);
        assert!((r.n - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_n_across_orders() {
        let eps = net();
        let s0: Vec<f64> = eps.iter().map(|e| 3.0 * e.powi(-1)).collect();
        let s1: Vec<f64> = eps.iter().map(|e| e.powi(-3)).collect();
        let r = moderateness_from_series(&eps, &[s0, s1]);
        assert!((r.n - 2.0).abs() < 1e-9);
        assert!(r.moderate);
        assert!((r.orders[1].constant - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exploding_tail_is_not_certified() {
        let eps: Vec<f64> = (2..=9).map(|k| 2f64.powi(-k)).collect();
        let s: Vec<f64> = eps.iter().map(|e| (1.0 / e).exp()).collect();
        let r = moderateness_from_series(&eps, &[s]);
        assert!(!r.moderate);
    }

    #[test]
    fn negligibility_verdicts() {
        let eps = net();
        let sq: Vec<f64> = eps.iter().map(|e| e * e).collect();
        let r = negligibility_from_series(&eps, &[sq], &[1.0, 2.0, 3.0]);
        assert_eq!(r.verdicts, vec![(1.0, true), (2.0, true), (3.0, false)]);

        let fast: Vec<f64> = eps.iter().map(|e| (-1.0 / e).exp()).collect();
        let r = negligibility_from_series(&eps, &[fast], &(1..=10).map(f64::from).collect::<Vec<_>>());
        assert!(r.verdicts.iter().all(|(_, v)| *v));

        let zero = vec![0.0; eps.len()];
        let r = negligibility_from_series(&eps, &[zero], &[5.0, 50.0]);
        assert!(r.verdicts.iter().all(|(_, v)| *v));
    }
}
