use proptest::prelude::*;
use vwlab_core::coefficients::{sample_exact, RoughCoefficient, SmoothPart, TimeSignal};
use vwlab_core::solver::*;
use vwlab_core::{Complex64, UniformGrid};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn affine(c0: f64, c1: f64, horizon: f64) -> RoughCoefficient {
    RoughCoefficient::smooth(SmoothPart::Affine { c0, c1 }, horizon)
}

#[test]
fn affine_speed_matches_tight_reference() {
    let sig = TimeSignal::exact(affine(1.0, 0.5, 1.0));
    let p = ModeProblem::new(10.0, sig, c(1.0, 0.0), c(0.0, 0.0));
    let opts = IntegratorOptions::default().with_output(100);
    let run = solve_mode(&p, &opts).unwrap();
    let reference = solve_mode(
        &p,
        &IntegratorOptions {
            rtol: 1e-13,
            ..opts
        },
    )
    .unwrap();
    for i in 0..run.v.len() {
        assert!((run.v[i] - reference.v[i]).norm() < 1e-7);
        assert!((run.vt[i] - reference.vt[i]).norm() < 1e-6);
    }
}

#[test]
fn reference_is_stable_under_step_halving() {
    let sig = TimeSignal::exact(affine(1.0, 0.5, 1.0));
    let p = ModeProblem::new(1.0, sig, c(1.0, 0.0), c(0.0, 0.0));
    let r = classical_reference(&p, &IntegratorOptions::default().with_output(50)).unwrap();
    let halved = solve_mode(
        &p,
        &IntegratorOptions {
            rtol: DEFAULT_RTOL / REFERENCE_TIGHTENING,
            output_intervals: Some(2 * r.meta.steps),
            ..Default::default()
        },
    )
    .unwrap();
    let stride = halved.v.len() / r.v.len().max(1);
    let stride = halved.grid.stride_to(&r.grid).unwrap_or(stride);
    for i in 0..r.v.len() {
        assert!((r.v[i] - halved.v[i * stride]).norm() < 1e-9);
    }
}

#[test]
fn time_reversal_returns_initial_data() {
    let horizon = 1.0;
    let (v0, v1) = (c(0.7, -0.2), c(0.3, 0.4));
    let fwd = solve_mode(
        &ModeProblem::new(3.0, TimeSignal::exact(affine(1.0, 0.5, horizon)), v0, v1),
        &IntegratorOptions::default(),
    )
    .unwrap();
    let (vt, wt) = (*fwd.v.last().unwrap(), *fwd.vt.last().unwrap());
    let back = solve_mode(
        &ModeProblem::new(3.0, TimeSignal::exact(affine(1.5, -0.5, horizon)), vt, -wt),
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert!((back.v.last().unwrap() - v0).norm() < 10.0 * DEFAULT_RTOL * 10.0);
    assert!((back.vt.last().unwrap() + v1).norm() < 10.0 * DEFAULT_RTOL * 10.0);
}

#[test]
fn constant_coefficient_conservation() {
    for beta in [1.0, 10.0, 100.0] {
        let sig = TimeSignal::exact(RoughCoefficient::constant(1.0, 1.0));
        let tr = solve_mode(&ModeProblem::new(beta, sig, c(1.0, 0.0), c(0.0, 0.0)), &IntegratorOptions::default())
            .unwrap();
        let e0 = tr.state_norm_sq(0);
        let drift = (0..tr.v.len())
            .map(|i| (tr.state_norm_sq(i) - e0).abs() / e0)
            .fold(0.0, f64::max);
        assert!(drift <= 1e-8, "β = {beta}: {drift}");
    }
}

#[test]
fn gronwall_with_oscillating_speed() {
    let a = RoughCoefficient::smooth(
        SmoothPart::Sinusoid {
            c0: 1.0,
            c1: 0.5,
            kappa: 1.0,
        },
        1.0,
    );
    let tr = solve_mode(
        &ModeProblem::new(5.0, TimeSignal::exact(a.clone()), c(1.0, 0.0), c(0.0, 0.0)),
        &IntegratorOptions::default().with_output(200),
    )
    .unwrap();
    let s = sample_exact(&a, &UniformGrid::covering(1.0, 400), 1).unwrap();
    let e = energy_trace(&tr, &s).unwrap();
    let g = gronwall_envelope(&e);
    assert!(g.holds());
    assert!(g.worst_margin > 0.0);

    // Envelope at t = 1 rebuilt from the reported coefficient range.
    let k0 = &e.constants;
    let c0 = 2.0 * k0.a_min.min(1.0);
    let c1 = 2.0 * k0.a_max.max(1.0);
    let k = (2.0 * k0.sup_da + 1.0).max(c1 * c1);
    assert!((k - k0.k).abs() <= 1e-12 * k);
    assert!(k0.a_min >= 1.0 - 1e-9 && k0.a_max <= 1.5 + 1e-9);
    let expected = (k / c0).exp() * e.energy[0];
    assert!((g.envelope.last().unwrap() - expected).abs() <= 1e-9 * expected);
    // Analytic E′ integrates to the energy change.
    let trapezoid: f64 = (0..200)
        .map(|i| 0.5 * (e.derivative[i] + e.derivative[i + 1]) / 200.0)
        .sum();
    let change = e.energy[200] - e.energy[0];
    assert!((trapezoid - change).abs() < 1e-2 * e.energy[0]);
}

#[test]
fn forced_oscillator_envelope() {
    let a = RoughCoefficient::constant(1.0, 1.0);
    let tr = solve_mode(
        &ModeProblem::new(1.0, TimeSignal::exact(a.clone()), c(0.0, 0.0), c(0.0, 0.0))
            .with_source(TimeSignal::exact(RoughCoefficient::constant(1.0, 1.0)), c(1.0, 0.0)),
        &IntegratorOptions::default().with_output(100),
    )
    .unwrap();
    let s = sample_exact(&a, &UniformGrid::covering(1.0, 100), 1).unwrap();
    let e = energy_trace(&tr, &s).unwrap();
    let g = gronwall_envelope(&e);
    assert!(g.holds());
    let c2 = e.constants.gronwall_c2;
    let c1 = e.constants.gronwall_c1;
    for (i, t) in e.times.iter().enumerate() {
        assert!(e.energy[i] <= c2 * t * (c1 * t).exp() * (1.0 + 1e-12) + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_are_linear(re in -2.0f64..2.0, im in -2.0f64..2.0, beta in 0.5f64..8.0) {
        prop_assume!(re.hypot(im) > 1e-3);
        let alpha = c(re, im);
        let a = TimeSignal::exact(affine(1.0, 0.5, 1.0));
        let g = TimeSignal::exact(RoughCoefficient::smooth(SmoothPart::Sinusoid { c0: 0.0, c1: 1.0, kappa: 2.0 }, 1.0));
        let base = ModeProblem::new(beta, a.clone(), c(1.0, 0.5), c(-0.3, 0.2)).with_source(g.clone(), c(0.5, 0.0));
        let scaled = ModeProblem::new(beta, a, alpha * c(1.0, 0.5), alpha * c(-0.3, 0.2)).with_source(g, alpha * c(0.5, 0.0));
        let opts = IntegratorOptions::default().with_output(20);
        let x = solve_mode(&base, &opts).unwrap();
        let y = solve_mode(&scaled, &opts).unwrap();
        for i in 0..x.v.len() {
            prop_assert!((x.v[i] * alpha - y.v[i]).norm() <= 1e-10 * alpha.norm().max(1.0));
            prop_assert!((x.vt[i] * alpha - y.vt[i]).norm() <= 1e-10 * alpha.norm().max(1.0));
        }
    }

    #[test]
    fn two_sided_bound_holds(c0 in 0.2f64..3.0, c1 in -0.15f64..2.0, beta in 0.5f64..20.0, v0 in -1.0f64..1.0, v1 in -1.0f64..1.0) {
        let a = affine(c0, c1.max(-c0 / 2.0), 1.0);
        let tr = solve_mode(
            &ModeProblem::new(beta, TimeSignal::exact(a.clone()), c(v0, 0.1), c(v1, 0.0)),
            &IntegratorOptions::default().with_output(50),
        ).unwrap();
        let s = sample_exact(&a, &UniformGrid::covering(1.0, 100), 1).unwrap();
        let e = energy_trace(&tr, &s).unwrap();
        prop_assert!(check_energy_bounds(&e, &tr).unwrap().is_empty());
    }
}
