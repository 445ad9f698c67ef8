use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vwlab_bench::{affine_mode, dirac_mode, dirac_problem, log_schedule};
use vwlab_core::coefficients::{mollify, Mollifier, MollifierShape};
use vwlab_core::lab::{moderateness_report, solve_regularized_net, NetOptions};
use vwlab_core::solver::{solve_mode, IntegratorOptions, Method};
use vwlab_core::{RoughCoefficient, UniformGrid};

fn single_mode(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_mode");
    let opts = IntegratorOptions::default().with_output(200);
    for beta in [10.0, 100.0, 1000.0] {
        g.bench_with_input(BenchmarkId::new("rk4_affine", beta), &beta, |b, &beta| {
            let p = affine_mode(beta);
            b.iter(|| solve_mode(black_box(&p), &opts).unwrap())
        });
    }
    let verlet = IntegratorOptions {
        method: Method::Verlet,
        ..opts
    };
    g.bench_function("verlet_affine_100", |b| {
        let p = affine_mode(100.0);
        b.iter(|| solve_mode(black_box(&p), &verlet).unwrap())
    });
    g.bench_function("rk4_dirac_100_omega_0.05", |b| {
        let p = dirac_mode(100.0, 0.05);
        b.iter(|| solve_mode(black_box(&p), &opts).unwrap())
    });
    g.finish();
}

fn mollification(c: &mut Criterion) {
    let a = RoughCoefficient::constant(1.0, 1.0).with_atom(0.5, 1.0, 0).with_jump(0.25, 0.5);
    let psi = Mollifier::new(MollifierShape::Bump, 1e-12).unwrap();
    let grid = UniformGrid::covering(1.0, 4000);
    c.bench_function("mollify_dirac_jump_k2", |b| {
        b.iter(|| mollify(black_box(&a), &psi, 0.01, &grid, 2).unwrap())
    });
}

fn net(c: &mut Criterion) {
    let mut g = c.benchmark_group("regularized_net");
    g.sample_size(10);
    let psi = Mollifier::new(MollifierShape::Bump, 1e-12).unwrap();
    let eps: Vec<f64> = (2..=8).map(|k| 2f64.powi(-k)).collect();
    for modes in [16, 32] {
        let p = dirac_problem(modes);
        g.bench_with_input(BenchmarkId::new("dirac_moderateness", modes), &modes, |b, _| {
            b.iter(|| {
                let n = solve_regularized_net(&p, &psi, &log_schedule(), &eps, &NetOptions::default()).unwrap();
                moderateness_report(&n, 2).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, single_mode, mollification, net);
criterion_main!(benches);
