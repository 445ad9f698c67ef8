//! One runner per analysis; each turns a lab result into tables and a verdict.

use std::sync::OnceLock;

use vwlab_core::coefficients::{fit_derivative_growth, mollify, Mollifier, TimeSignal};
use vwlab_core::lab::{
    consistency_experiment, energy_inequality_audit, gevrey_amplification_scan, gevrey_moderateness_report,
    moderateness_report, negligibility_test, solve_regularized_net, uniqueness_experiment, AmplificationOptions,
    ConsistencyOptions, NetSolution,
};
use vwlab_core::solver::{
    check_energy_bounds, default_delta, energy_trace, gronwall_envelope, quasi_energy_trace, solve_mode, ModeProblem,
};
use vwlab_core::{GrowthFit, UniformGrid};

use crate::scenario::LoadedScenario;
use crate::tables::{num, Table};

/// Outcome of one analysis: a verdict line, summary values and tables.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutput {
    pub verdict: String,
    pub values: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl AnalysisOutput {
    fn new(verdict: impl Into<String>) -> Self {
        AnalysisOutput {
            verdict: verdict.into(),
            values: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn value(mut self, key: &str, v: impl ToString) -> Self {
        self.values.push((key.to_string(), v.to_string()));
        self
    }

    fn table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }
}

/// Shared state of one run; the main net is solved at most once.
pub struct Context<'a> {
    pub scenario: &'a LoadedScenario,
    main_net: OnceLock<Result<NetSolution, String>>,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a LoadedScenario) -> Self {
        Context {
            scenario,
            main_net: OnceLock::new(),
        }
    }

    fn main_net(&self) -> Result<&NetSolution, String> {
        self.main_net
            .get_or_init(|| {
                let sc = self.scenario;
                solve_regularized_net(
                    &sc.problem,
                    &sc.mollifier,
                    &sc.scenario.schedule,
                    &sc.scenario.analyses.eps_net,
                    &sc.net_options,
                )
                .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn other_mollifier(&self, shape: vwlab_core::MollifierShape) -> Result<Mollifier, String> {
        Mollifier::new(shape, self.scenario.scenario.mollifier.tolerance).map_err(|e| e.to_string())
    }
}

pub fn run_analysis(name: &str, ctx: &Context) -> Result<AnalysisOutput, String> {
    match name {
        "modes" => modes(ctx),
        "mollified" => mollified(ctx),
        "growth" => growth(ctx),
        "trajectory" => trajectory(ctx),
        "moderateness" => moderateness(ctx),
        "gevrey-moderateness" => gevrey_moderateness(ctx),
        "negligibility" => negligibility(ctx),
        "uniqueness" => uniqueness(ctx),
        "consistency" => consistency(ctx),
        "amplification" => amplification(ctx),
        "audit" => audit(ctx),
        other => Err(format!("unknown analysis '{other}'")),
    }
}

fn err(e: vwlab_core::Error) -> String {
    e.to_string()
}

fn gap_values(out: AnalysisOutput, net: &NetSolution) -> AnalysisOutput {
    net.gaps()
        .into_iter()
        .fold(out.value("gaps", net.gaps().len()), |o, (eps, why)| {
            o.value(&format!("gap.{}", num(eps)), why)
        })
}

fn modes(ctx: &Context) -> Result<AnalysisOutput, String> {
    let model = &ctx.scenario.problem.model;
    let mut t = Table::new("modes", &["m", "pi_m", "mu_m"]);
    for (i, (pi, mu)) in model.frequencies().iter().zip(model.weights()).enumerate() {
        t.push(vec![(i + 1).to_string(), num(*pi), num(*mu)]);
    }
    Ok(AnalysisOutput::new(format!("{} modes", model.len()))
        .value("modes", model.len())
        .value("nu", num(model.nu))
        .table(t))
}

fn mollified(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.mollified.as_ref().ok_or("not requested")?;
    let a = &sc.problem.coefficient;
    let omega = sc.scenario.schedule.omega(cfg.eps).map_err(err)?;
    let intervals = cfg
        .intervals
        .unwrap_or_else(|| ((32.0 * a.horizon / omega).ceil() as usize).max(1000));
    let sampled = mollify(a, &sc.mollifier, omega, &UniformGrid::covering(a.horizon, intervals), cfg.k_max).map_err(err)?;
    let mut cols = vec!["t".to_string(), "a_eps".to_string()];
    cols.extend((1..=cfg.k_max).map(|k| format!("d{k}_a_eps")));
    let mut t = Table {
        name: "mollified".into(),
        columns: cols,
        rows: Vec::new(),
    };
    for (i, time) in sampled.grid.times().enumerate() {
        let mut row = vec![num(time)];
        row.extend(sampled.derivatives.iter().map(|d| num(d[i])));
        t.push(row);
    }
    let mut out = AnalysisOutput::new(format!("sampled at omega = {}", num(omega)))
        .value("eps", num(cfg.eps))
        .value("omega", num(omega))
        .value("min", num(sampled.min()))
        .value("max", num(sampled.max()));
    for k in 0..=cfg.k_max {
        out = out.value(&format!("sup_d{k}"), num(sampled.sup_abs(k)));
    }
    Ok(out.table(t))
}

fn growth(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.growth.as_ref().ok_or("not requested")?;
    let fits = fit_derivative_growth(
        &sc.problem.coefficient,
        &sc.mollifier,
        &sc.scenario.schedule,
        &cfg.eps_net,
        cfg.k_max,
    )
    .map_err(err)?;
    let mut t = Table::new("growth", &["eps", "omega", "k", "sup_abs"]);
    let mut out = AnalysisOutput::new(if fits.iter().all(|f| f.moderate) {
        "derivative growth within the declared order"
    } else {
        "derivative growth exceeds the declared order"
    });
    for f in &fits {
        for (j, eps) in cfg.eps_net.iter().enumerate() {
            t.push(vec![num(*eps), num(f.omegas[j]), f.order.to_string(), num(f.sups[j])]);
        }
        let slope = match f.fit {
            GrowthFit::IdenticallyZero => "zero".to_string(),
            GrowthFit::Fitted(p) => num(p.slope),
        };
        out = out
            .value(&format!("k{}.slope", f.order), slope)
            .value(&format!("k{}.bound_exponent", f.order), num(f.bound_exponent))
            .value(&format!("k{}.moderate", f.order), f.moderate);
    }
    Ok(out.table(t))
}

fn trajectory(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.trajectory.as_ref().ok_or("not requested")?;
    let p = &sc.problem;
    let m = cfg.mode - 1;
    let beta = p.model.frequencies()[m];
    let signal = |dist: vwlab_core::RoughCoefficient| -> Result<TimeSignal, String> {
        Ok(match cfg.eps {
            None => TimeSignal::exact(dist),
            Some(eps) => TimeSignal::mollified(dist, sc.mollifier.clone(), sc.scenario.schedule.omega(eps).map_err(err)?),
        })
    };
    let a = signal(p.coefficient.clone())?;
    let mut problem = ModeProblem::new(beta, a.clone(), p.data.u0.0[m], p.data.u1.0[m]);
    if let Some((g, h)) = &p.data.source {
        problem = problem.with_source(signal(g.clone())?, h.0[m]);
    }
    let opts = sc.integrator.with_output(sc.net_options.output_intervals);
    let traj = solve_mode(&problem, &opts).map_err(err)?;
    let sampled = a.sample_points(&traj.grid, 1).map_err(err)?;
    let energy = energy_trace(&traj, &sampled).map_err(err)?;
    let gronwall = gronwall_envelope(&energy);
    let quasi = if cfg.quasi || cfg.delta.is_some() {
        let delta = cfg.delta.unwrap_or_else(|| default_delta(a.omega()));
        Some(quasi_energy_trace(&traj, &sampled, delta).map_err(err)?)
    } else {
        None
    };
    let mut cols = vec!["t", "re_v", "im_v", "re_vt", "im_vt", "E"];
    if quasi.is_some() {
        cols.push("E_delta");
    }
    let mut t = Table::new("trajectory", &cols);
    for i in 0..traj.v.len() {
        let mut row = vec![
            num(traj.grid.t(i)),
            num(traj.v[i].re),
            num(traj.v[i].im),
            num(traj.vt[i].re),
            num(traj.vt[i].im),
            num(energy.energy[i]),
        ];
        if let Some(q) = &quasi {
            row.push(num(q.energy[i]));
        }
        t.push(row);
    }
    let mut out = AnalysisOutput::new(if gronwall.holds() {
        "energy envelope holds"
    } else {
        "energy envelope violated"
    })
    .value("beta", num(beta))
    .value("steps", traj.meta.steps)
    .value("worst_local_error", num(traj.meta.worst_local_error))
    .value("gronwall_c1", num(energy.constants.gronwall_c1))
    .value("gronwall_c2", num(energy.constants.gronwall_c2))
    .value("envelope_holds", gronwall.envelope_holds)
    .value("differential_holds", gronwall.differential_holds);
    if energy.constants.a_min > 0.0 {
        let violations = check_energy_bounds(&energy, &traj).map_err(err)?;
        out = out.value("two_sided_violations", violations.len());
    }
    if let Some(q) = &quasi {
        out = out
            .value("delta", num(q.delta))
            .value("quasi_bound_constant", num(q.bound_constant))
            .value("quasi_worst_constant", num(q.worst_constant))
            .value("quasi_holds", q.holds);
    }
    Ok(out.table(t))
}

fn moderateness(ctx: &Context) -> Result<AnalysisOutput, String> {
    let net = ctx.main_net()?;
    let report = moderateness_report(net, net.p_max).map_err(err)?;
    let omega_of = |eps: f64| {
        net.solved()
            .find(|e| e.eps == eps)
            .map(|e| e.omega)
            .unwrap_or(f64::NAN)
    };
    let mut t = Table::new("moderateness", &["eps", "omega", "p", "sup_norm", "fitted_N", "envelope_ok"]);
    for o in &report.orders {
        for (eps, v) in o.eps.iter().zip(&o.sup_norms) {
            t.push(vec![
                num(*eps),
                num(omega_of(*eps)),
                o.p.to_string(),
                num(*v),
                num(o.n_hat),
                o.valid.to_string(),
            ]);
        }
    }
    let mut out = AnalysisOutput::new(if report.moderate {
        format!("moderate with N = {}", num(report.n))
    } else {
        "not certified".to_string()
    })
    .value("moderate", report.moderate)
    .value("N", num(report.n));
    for o in &report.orders {
        out = out
            .value(&format!("p{}.n_hat", o.p), num(o.n_hat))
            .value(&format!("p{}.constant", o.p), num(o.constant))
            .value(&format!("p{}.tail_slope", o.p), num(o.tail_slope))
            .value(&format!("p{}.valid", o.p), o.valid);
    }
    Ok(gap_values(out, net).table(t))
}

fn gevrey_moderateness(ctx: &Context) -> Result<AnalysisOutput, String> {
    let cfg = ctx
        .scenario
        .scenario
        .analyses
        .gevrey_moderateness
        .as_ref()
        .ok_or("not requested")?;
    let net = ctx.main_net()?;
    let report = gevrey_moderateness_report(net, cfg.s, &cfg.eta_grid, net.p_max).map_err(err)?;
    let mut t = Table::new(
        "gevrey_moderateness",
        &["eta", "p", "fitted_N", "constant", "envelope_ok", "tail_decays"],
    );
    for row in &report.rows {
        for o in &row.report.orders {
            t.push(vec![
                num(row.eta),
                o.p.to_string(),
                num(o.n_hat),
                num(o.constant),
                o.valid.to_string(),
                row.tail_decays.to_string(),
            ]);
        }
    }
    let verdict = match report.certified_eta {
        Some(eta) => format!("Gevrey-moderate (H_(s)^-inf type) at eta = {}", num(eta)),
        None => "not certified on grid".to_string(),
    };
    let out = AnalysisOutput::new(verdict).value("s", num(cfg.s)).value(
        "certified_eta",
        report.certified_eta.map(num).unwrap_or_else(|| "none".into()),
    );
    Ok(gap_values(out, net).table(t))
}

fn verdict_table(name: &str, verdicts: &[(f64, bool)]) -> Table {
    let mut t = Table::new(name, &["ell", "negligible"]);
    for (ell, ok) in verdicts {
        t.push(vec![num(*ell), ok.to_string()]);
    }
    t
}

fn negligibility(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.negligibility.as_ref().ok_or("not requested")?;
    let net = ctx.main_net()?;
    let psi2 = ctx.other_mollifier(cfg.against)?;
    let other = solve_regularized_net(
        &sc.problem,
        &psi2,
        &sc.scenario.schedule,
        &sc.scenario.analyses.eps_net,
        &sc.net_options,
    )
    .map_err(err)?;
    let report = negligibility_test(net, &other, &cfg.ell).map_err(err)?;
    let mut t = Table::new("negligibility", &["eps", "p", "sup_diff"]);
    for (p, fit) in report.orders.iter().enumerate() {
        for (eps, v) in fit.eps.iter().zip(&fit.values) {
            t.push(vec![num(*eps), p.to_string(), num(*v)]);
        }
    }
    let best = report
        .verdicts
        .iter()
        .filter(|(_, ok)| *ok)
        .map(|(l, _)| *l)
        .fold(None, |m: Option<f64>, l| Some(m.map_or(l, |m| m.max(l))));
    let mut out = AnalysisOutput::new(match best {
        Some(l) => format!("difference decays at least like eps^{}", num(l)),
        None => "difference not negligible at any requested order".to_string(),
    })
    .value("against", cfg.against.id());
    for (p, fit) in report.orders.iter().enumerate() {
        out = out
            .value(&format!("p{p}.slope"), num(fit.slope))
            .value(&format!("p{p}.tail_slope"), num(fit.tail_slope));
    }
    Ok(out.table(t).table(verdict_table("negligibility_verdicts", &report.verdicts)))
}

fn uniqueness(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.uniqueness.as_ref().ok_or("not requested")?;
    let psi2 = ctx.other_mollifier(cfg.against)?;
    let r = uniqueness_experiment(
        &sc.problem,
        &sc.mollifier,
        &psi2,
        &sc.scenario.schedule,
        &sc.scenario.analyses.eps_net,
        &cfg.ell,
        &sc.net_options,
    )
    .map_err(err)?;
    let mut t = Table::new("uniqueness", &["eps", "omega", "coef_diff", "sol_diff"]);
    for row in &r.rows {
        t.push(vec![num(row.eps), num(row.omega), num(row.coef_diff), num(row.sol_diff)]);
    }
    let verdict = match r.dominates {
        Some(true) => "empirical evidence: solution difference decay dominates coefficient difference decay",
        Some(false) => "empirical evidence missing: solution difference decays too slowly",
        None => "no verdict for a distributional coefficient; decay reported only",
    };
    Ok(AnalysisOutput::new(verdict)
        .value("coef_slope", num(r.coef_slope))
        .value("sol_slope", num(r.sol_slope))
        .value("final_diff", num(r.final_diff))
        .value("moderateness_loss", num(r.moderateness_loss))
        .value(
            "dominates",
            r.dominates.map(|b| b.to_string()).unwrap_or_else(|| "none".into()),
        )
        .table(t)
        .table(verdict_table("uniqueness_negligibility", &r.negligibility.verdicts)))
}

fn consistency(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.consistency.as_ref().ok_or("not requested")?;
    let copts = ConsistencyOptions {
        threshold: cfg.threshold,
        gevrey: cfg.gevrey,
        ..Default::default()
    };
    let r = consistency_experiment(
        &sc.problem,
        &sc.mollifier,
        &sc.scenario.schedule,
        &sc.scenario.analyses.eps_net,
        &sc.net_options,
        &copts,
    )
    .map_err(err)?;
    let mut cols = vec!["eps", "err_CH", "err_C1H"];
    if cfg.gevrey.is_some() {
        cols.push("err_gevrey");
    }
    let mut t = Table::new("consistency", &cols);
    for row in &r.rows {
        let mut cells = vec![num(row.eps), num(row.err_ch), num(row.err_c1h)];
        if cfg.gevrey.is_some() {
            cells.push(num(row.err_gevrey.unwrap_or(f64::NAN)));
        }
        t.push(cells);
    }
    let mut out = AnalysisOutput::new(if r.consistent { "consistent" } else { "not consistent" })
        .value("monotone", r.monotone)
        .value("slope", num(r.slope))
        .value("final_error", num(r.final_error))
        .value("threshold", num(r.threshold))
        .value("gaps", r.gaps.len());
    for (eps, why) in &r.gaps {
        out = out.value(&format!("gap.{}", num(*eps)), why);
    }
    Ok(out.table(t))
}

fn amplification(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.amplification.as_ref().ok_or("not requested")?;
    let s = sc.amplification_s().ok_or("Gevrey order missing")?;
    let opts = AmplificationOptions {
        data: cfg.data,
        factor: cfg.factor,
        integrator: sc.integrator,
    };
    let a = TimeSignal::exact(sc.problem.coefficient.clone());
    let r = gevrey_amplification_scan(&a, sc.regime_class, s, &cfg.betas.values(), &opts).map_err(err)?;
    let mut t = Table::new("amplification", &["beta", "amplification", "ratio"]);
    for row in &r.rows {
        t.push(vec![num(row.beta), num(row.amplification), num(row.ratio)]);
    }
    let verdict = if r.trivial {
        "no amplification"
    } else if r.bounded {
        "log A(beta) / beta^(1/s) bounded on the list (qualitative check; constants unspecified)"
    } else {
        "log A(beta) / beta^(1/s) not bounded on the list"
    };
    Ok(AnalysisOutput::new(verdict)
        .value("s", num(s))
        .value("k_prime", num(r.k_prime))
        .value("log_constant", num(r.log_constant))
        .value("max_over_median", num(r.max_over_median))
        .value("bounded", r.bounded)
        .value("trivial", r.trivial)
        .table(t))
}

fn audit(ctx: &Context) -> Result<AnalysisOutput, String> {
    let sc = ctx.scenario;
    let cfg = sc.scenario.analyses.audit.as_ref().ok_or("not requested")?;
    let r = energy_inequality_audit(&sc.problem, &cfg.factors, &sc.integrator, sc.net_options.output_intervals)
        .map_err(err)?;
    let mut t = Table::new("audit", &["modes", "c_emp"]);
    for row in &r.rows {
        t.push(vec![row.modes.to_string(), num(row.c_emp)]);
    }
    Ok(AnalysisOutput::new(format!("empirical constant spread {}", num(r.spread)))
        .value("spread", num(r.spread))
        .table(t))
}
