//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines come out in order; the
//! process exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use vwlab_cli::scenario::{resolve, SpectralBlock};
use vwlab_cli::{load_scenario, run_scenario, LoadedScenario, RunOptions};
use vwlab_core::coefficients::{fit_derivative_growth, sample_exact, Mollifier, MollifierShape, ScaleSchedule};
use vwlab_core::lab::*;
use vwlab_core::solver::*;
use vwlab_core::{Complex64, GrowthFit, RoughCoefficient, SmoothPart, TimeSignal};

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scenario(name: &str) -> LoadedScenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    load_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn bump() -> Mollifier {
    Mollifier::new(MollifierShape::Bump, 1e-12).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn constant_runs() -> Vec<(f64, ModeTrajectory)> {
    [1.0, 10.0, 100.0]
        .into_iter()
        .map(|beta| {
            let a = TimeSignal::exact(RoughCoefficient::constant(1.0, 1.0));
            let tr = solve_mode(
                &ModeProblem::new(beta, a, c(1.0, 0.0), c(0.0, beta)),
                &IntegratorOptions::default(),
            )
            .unwrap();
            (beta, tr)
        })
        .collect()
}

fn c1_closed_forms() -> Outcome {
    let start = Instant::now();
    let runs = constant_runs();
    let mut worst: f64 = 0.0;
    for (beta, tr) in &runs {
        for i in 0..tr.v.len() {
            let t = tr.grid.t(i);
            let (s, co) = (beta * t).sin_cos();
            worst = worst.max((tr.v[i] - c(co, s)).norm());
            worst = worst.max((tr.vt[i] - c(-beta * s, beta * co)).norm() / beta);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed <= Duration::from_secs(5),
        format!("max error {worst:.3e} (limit 1e-6), runtime {}", secs(elapsed)),
    )
}

fn c2_conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, tr) in constant_runs() {
        let e0 = tr.state_norm_sq(0);
        for i in 0..tr.v.len() {
            worst = worst.max((tr.state_norm_sq(i) - e0).abs() / e0);
        }
    }
    outcome(worst <= 1e-8, format!("max relative drift {worst:.3e} (limit 1e-8)"))
}

/// Strictly positive coefficients on `[0, 1]`.
fn positive_coefficients() -> Vec<RoughCoefficient> {
    let h = 1.0;
    vec![
        RoughCoefficient::constant(1.0, h),
        RoughCoefficient::constant(3.0, h),
        RoughCoefficient::smooth(SmoothPart::Affine { c0: 1.0, c1: 0.5 }, h),
        RoughCoefficient::smooth(SmoothPart::Affine { c0: 2.0, c1: -1.5 }, h),
        RoughCoefficient::smooth(
            SmoothPart::Sinusoid {
                c0: 1.5,
                c1: 0.5,
                kappa: 3.0,
            },
            h,
        ),
        RoughCoefficient::smooth(SmoothPart::Power { c0: 0.2, c1: 1.0, q: 2.0 }, h),
        RoughCoefficient::smooth(
            SmoothPart::Weierstrass {
                c0: 1.0,
                amplitude: 0.1,
                alpha: 0.5,
                terms: 10,
            },
            h,
        ),
    ]
}

struct SuiteCase {
    a: RoughCoefficient,
    traj: ModeTrajectory,
    energy: EnergyTrace,
}

fn positive_suite(with_source: bool) -> Vec<SuiteCase> {
    let mut out = Vec::new();
    for a in positive_coefficients() {
        for beta in [1.0, 10.0, 50.0] {
            for (v0, v1) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.3, -0.1), c(0.0, 0.7))] {
                let mut p = ModeProblem::new(beta, TimeSignal::exact(a.clone()), v0, v1);
                if with_source {
                    let g = RoughCoefficient::smooth(
                        SmoothPart::Sinusoid {
                            c0: 0.0,
                            c1: 1.0,
                            kappa: 2.0,
                        },
                        1.0,
                    );
                    p = p.with_source(TimeSignal::exact(g), c(0.5, 0.0));
                }
                let traj = solve_mode(&p, &IntegratorOptions::default().with_output(400)).unwrap();
                let s = sample_exact(&a, &traj.grid, 1).unwrap();
                let energy = energy_trace(&traj, &s).unwrap();
                out.push(SuiteCase {
                    a: a.clone(),
                    traj,
                    energy,
                });
            }
        }
    }
    out
}

fn c3_two_sided(suite: &[SuiteCase]) -> Outcome {
    let mut violations = 0;
    for case in suite {
        match check_energy_bounds(&case.energy, &case.traj) {
            Ok(v) => violations += v.len(),
            Err(e) => return outcome(false, format!("refused on {:?}: {e}", case.a.smooth)),
        }
    }
    outcome(
        violations == 0 && suite.len() >= 10,
        format!("{violations} violations across {} positive scenarios", suite.len()),
    )
}

fn c4_gronwall(suite: &[SuiteCase]) -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    let mut envelope_ok = true;
    for case in suite {
        let e = &case.energy;
        let g = gronwall_envelope(e);
        envelope_ok &= g.envelope_holds;
        let c1 = e.constants.gronwall_c1;
        for (i, need) in g.needed_slack.iter().enumerate() {
            let allowed = 1e-6 * e.energy[0] * (c1 * e.times[i]).exp();
            worst_ratio = worst_ratio.max(need / allowed);
        }
    }
    outcome(
        envelope_ok && worst_ratio <= 1.0,
        format!(
            "envelope holds: {envelope_ok}; worst slack / (1e-6 E(0) e^(C1 t)) = {worst_ratio:.3e} over {} runs",
            suite.len()
        ),
    )
}

fn c5_plancherel() -> Outcome {
    let a = RoughCoefficient::smooth(SmoothPart::Affine { c0: 1.0, c1: 0.5 }, 1.0);
    let data = DataSpec {
        u0: FieldSpec::ExpDecay { scale: 1.0, rate: 0.5 },
        u1: FieldSpec::Algebraic { scale: 0.5, q: 1.0 },
        source: None,
    };
    let spec = vwlab_core::ModelSpec::HeisenbergLike {
        n: 1,
        lambda_max: 3.0,
        lambda_count: 6,
        levels: 4,
    };
    let p = ScenarioProblem::new(a, spec, data, 0.5).unwrap();
    let eps: Vec<f64> = default_eps_net().into_iter().take(4).collect();
    let net = solve_regularized_net(&p, &bump(), &ScaleSchedule::Identity, &eps, &NetOptions::default()).unwrap();
    let model = &net.model;
    let mut worst: f64 = 0.0;
    for order in [0.5, 1.5] {
        for pd in 0..=net.p_max {
            let (_, sups) = net.sup_sobolev(pd, order);
            for (entry, sup) in net.solved().zip(&sups) {
                let lab = entry.sobolev_norms(model, pd, order);
                let mut direct_sup: f64 = 0.0;
                for (i, reported) in lab.iter().enumerate() {
                    let mut acc = 0.0;
                    for m in 0..model.len() {
                        let pi = model.frequencies()[m];
                        let w = (1.0 + pi * pi).powf(2.0 * order / model.nu);
                        acc += model.weights()[m] * w * entry.derivs[pd][m][i].norm_sqr();
                    }
                    let direct = acc.sqrt();
                    direct_sup = direct_sup.max(direct);
                    worst = worst.max((reported - direct).abs() / direct.max(1e-300));
                }
                worst = worst.max((sup - direct_sup).abs() / direct_sup.max(1e-300));
            }
        }
    }
    outcome(worst <= 1e-12, format!("max relative mismatch {worst:.3e} (limit 1e-12)"))
}

fn slope(fit: &GrowthFit) -> f64 {
    match fit {
        GrowthFit::IdenticallyZero => f64::NEG_INFINITY,
        GrowthFit::Fitted(f) => f.slope,
    }
}

fn c6_structure() -> Outcome {
    let start = Instant::now();
    let net = [1e-1, 1e-2, 1e-3, 1e-4];
    let heaviside = RoughCoefficient::constant(0.0, 1.0).with_jump(0.5, 1.0);
    let dirac = RoughCoefficient::constant(0.0, 1.0).with_atom(0.5, 1.0, 0);
    let h = fit_derivative_growth(&heaviside, &bump(), &ScaleSchedule::Identity, &net, 1).unwrap();
    let d = fit_derivative_growth(&dirac, &bump(), &ScaleSchedule::Identity, &net, 1).unwrap();
    let got = [slope(&h[0].fit), slope(&h[1].fit), slope(&d[0].fit), slope(&d[1].fit)];
    let want = [0.0, 1.0, 1.0, 2.0];
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.1);
    let elapsed = start.elapsed();
    outcome(
        ok && elapsed <= Duration::from_secs(10),
        format!(
            "slopes Heaviside k0 {:.3}, k1 {:.3}; Dirac k0 {:.3}, k1 {:.3}; runtime {}",
            got[0],
            got[1],
            got[2],
            got[3],
            secs(elapsed)
        ),
    )
}

fn with_modes(sc: &LoadedScenario, modes: usize) -> LoadedScenario {
    let mut raw = sc.scenario.clone();
    if let SpectralBlock::Power { nu, .. } = raw.spectral {
        raw.spectral = SpectralBlock::Power { modes, nu };
    }
    resolve(raw, &sc.path).unwrap()
}

fn c7_moderateness() -> Outcome {
    let start = Instant::now();
    let base = scenario("dirac-existence.toml");
    let mut verdicts = Vec::new();
    let mut details = Vec::new();
    for modes in [16, 32] {
        let sc = with_modes(&base, modes);
        let net = solve_regularized_net(
            &sc.problem,
            &sc.mollifier,
            &sc.scenario.schedule,
            &sc.scenario.analyses.eps_net,
            &sc.net_options,
        )
        .unwrap();
        let r = moderateness_report(&net, 2).unwrap();
        let all_valid = r.orders.len() == 3 && r.orders.iter().all(|o| o.valid);
        verdicts.push((r.moderate, all_valid));
        details.push(format!("M={modes}: moderate {}, N {:.3}, p0..2 valid {all_valid}", r.moderate, r.n));
    }
    let elapsed = start.elapsed();
    let ok = verdicts.iter().all(|v| *v == (true, true)) && verdicts[0] == verdicts[1];
    outcome(
        ok && elapsed <= Duration::from_secs(120),
        format!("{}; runtime {}", details.join("; "), secs(elapsed)),
    )
}

fn c8_consistency() -> Outcome {
    let sc = scenario("affine-consistency.toml");
    let r = consistency_experiment(
        &sc.problem,
        &sc.mollifier,
        &sc.scenario.schedule,
        &sc.scenario.analyses.eps_net,
        &sc.net_options,
        &ConsistencyOptions::default(),
    )
    .unwrap();
    outcome(
        r.monotone && r.final_error <= 1e-3 && r.slope >= 0.8 && r.gaps.is_empty(),
        format!(
            "monotone {}, final error {:.3e} (limit 1e-3), slope {:.3} (min 0.8)",
            r.monotone, r.final_error, r.slope
        ),
    )
}

fn c9_uniqueness() -> Outcome {
    let sc = scenario("smooth-uniqueness.toml");
    let cos = Mollifier::new(MollifierShape::CosineSquared, 1e-12).unwrap();
    let r = uniqueness_experiment(
        &sc.problem,
        &sc.mollifier,
        &cos,
        &sc.scenario.schedule,
        &sc.scenario.analyses.eps_net,
        &[1.0, 2.0],
        &sc.net_options,
    )
    .unwrap();
    outcome(
        r.sol_slope >= 0.8 && r.final_diff <= 1e-3,
        format!(
            "solution-difference slope {:.3} (min 0.8), final difference {:.3e} (limit 1e-3)",
            r.sol_slope, r.final_diff
        ),
    )
}

fn amplification_of(name: &str) -> (Result<AmplificationReport, String>, Duration) {
    let start = Instant::now();
    let sc = scenario(name);
    let a = TimeSignal::exact(sc.problem.coefficient.clone());
    let cfg = sc.scenario.analyses.amplification.as_ref().unwrap();
    let r = gevrey_amplification_scan(
        &a,
        sc.regime_class,
        sc.amplification_s().unwrap(),
        &cfg.betas.values(),
        &AmplificationOptions::default(),
    )
    .map_err(|e| e.to_string());
    (r, start.elapsed())
}

fn c10_gevrey() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, file) in [("(a) t^2", "degenerate-gevrey.toml"), ("(b) Weierstrass", "holder-gevrey.toml")] {
        let (r, t) = amplification_of(file);
        match r {
            Ok(r) => {
                let lo = r.rows.first().map(|x| x.beta).unwrap_or(0.0);
                let hi = r.rows.last().map(|x| x.beta).unwrap_or(0.0);
                let pass = r.bounded && r.max_over_median <= 10.0 && lo <= 1.0 && hi >= 500.0 && t <= Duration::from_secs(180);
                ok &= pass;
                parts.push(format!(
                    "{label}: max/median {:.3}, K' {:.3}, runtime {}",
                    r.max_over_median,
                    r.k_prime,
                    secs(t)
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn c11_advisor() -> Outcome {
    let sup = |class| regime_advisor(class).ok().and_then(|r| r.s_sup);
    let examples = [
        (CoefficientClass::HolderPositive { alpha: 0.5 }, 2.0),
        (CoefficientClass::SmoothDegenerate { ell: 2 }, 2.0),
        (CoefficientClass::HolderDegenerate { alpha: 1.5 }, 1.75),
    ];
    let mut ok = examples.iter().all(|(class, want)| {
        regime_advisor(*class).is_ok_and(|r| r.s_min == Some(1.0) && r.s_sup == Some(*want))
    });
    let boundaries = [
        regime_advisor(CoefficientClass::HolderPositive { alpha: 1.0 }).is_err(),
        regime_advisor(CoefficientClass::HolderPositive { alpha: 0.0 }).is_err(),
        regime_advisor(CoefficientClass::HolderDegenerate { alpha: 2.0 }).is_err(),
        regime_advisor(CoefficientClass::SmoothDegenerate { ell: 1 }).is_err(),
        regime_advisor(CoefficientClass::SmoothDegenerate { ell: 2 }).is_ok(),
        regime_advisor(CoefficientClass::HolderPositive { alpha: 0.5 })
            .unwrap()
            .admits(2.0)
            .is_err(),
        regime_advisor(CoefficientClass::HolderPositive { alpha: 0.5 })
            .unwrap()
            .admits(1.0)
            .is_ok(),
    ];
    ok &= boundaries.iter().all(|b| *b);
    let mut regimes: Vec<String> = canonical_regimes().iter().map(|r| r.regime.to_string()).collect();
    regimes.dedup();
    ok &= regimes.len() == 4;
    outcome(
        ok,
        format!(
            "intervals s < {:?}, {:?}, {:?}; boundary checks {}/{}",
            sup(examples[0].0),
            sup(examples[1].0),
            sup(examples[2].0),
            boundaries.iter().filter(|b| **b).count(),
            boundaries.len()
        ),
    )
}

fn tables_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv") || p.file_name().is_some_and(|n| n == "summary.txt"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn c12_determinism() -> Outcome {
    let sc = scenario("dirac-existence.toml");
    let mut dirs: Vec<PathBuf> = Vec::new();
    let roots: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for (root, jobs) in roots.iter().zip([1, 4]) {
        let r = run_scenario(
            &sc,
            &RunOptions {
                force: true,
                jobs: Some(jobs),
                output_root: Some(root.path().to_path_buf()),
            },
        )
        .unwrap();
        dirs.push(r.directory);
    }
    let a = tables_in(&dirs[0]);
    let b = tables_in(&dirs[1]);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    outcome(
        !a.is_empty() && a == b,
        format!("--jobs 1 vs --jobs 4: {} files compared ({})", a.len(), names.join(", ")),
    )
}

fn main() {
    let positive = positive_suite(false);
    let mut with_source = positive_suite(true);
    with_source.extend(positive_suite(false));
    let criteria: Vec<(&str, Criterion)> = vec![
        ("constant-coefficient oracle", Box::new(c1_closed_forms)),
        ("conservation", Box::new(c2_conservation)),
        ("two-sided energy bound", Box::new(|| c3_two_sided(&with_source))),
        ("Gronwall envelope", Box::new(|| c4_gronwall(&positive))),
        ("Plancherel/norm coherence", Box::new(c5_plancherel)),
        ("structure-theorem scaling", Box::new(c6_structure)),
        ("existence/moderateness", Box::new(c7_moderateness)),
        ("consistency", Box::new(c8_consistency)),
        ("uniqueness evidence", Box::new(c9_uniqueness)),
        ("Gevrey regimes", Box::new(c10_gevrey)),
        ("regime advisor", Box::new(c11_advisor)),
        ("determinism", Box::new(c12_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
