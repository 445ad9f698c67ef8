//! Fixed workloads shared by the benchmarks.

use vwlab_core::coefficients::{Mollifier, MollifierShape, ScaleSchedule};
use vwlab_core::lab::{DataSpec, FieldSpec, ScenarioProblem};
use vwlab_core::solver::ModeProblem;
use vwlab_core::{Complex64, ModelSpec, RoughCoefficient, SmoothPart, TimeSignal};

/// Single mode with `a = 1 + t/2` on `[0, 1]` and unit displacement.
pub fn affine_mode(beta: f64) -> ModeProblem {
    let a = RoughCoefficient::smooth(SmoothPart::Affine { c0: 1.0, c1: 0.5 }, 1.0);
    ModeProblem::new(beta, TimeSignal::exact(a), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
}

/// Single mode with `a = 1 + δ(t − 1/2)` mollified at width `omega`.
pub fn dirac_mode(beta: f64, omega: f64) -> ModeProblem {
    let a = RoughCoefficient::constant(1.0, 1.0).with_atom(0.5, 1.0, 0);
    let psi = Mollifier::new(MollifierShape::Bump, 1e-12).expect("bump mollifier");
    ModeProblem::new(
        beta,
        TimeSignal::mollified(a, psi, omega),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

/// `a = 1 + δ(t − 1/2)` on `modes` power modes with exponentially decaying data.
pub fn dirac_problem(modes: usize) -> ScenarioProblem {
    let a = RoughCoefficient::constant(1.0, 1.0).with_atom(0.5, 1.0, 0).with_order(1);
    ScenarioProblem::new(
        a,
        ModelSpec::Power { modes, nu: 2.0 },
        DataSpec {
            u0: FieldSpec::ExpDecay { scale: 1.0, rate: 0.5 },
            u1: FieldSpec::Zero,
            source: None,
        },
        0.0,
    )
    .expect("valid benchmark problem")
}

pub fn log_schedule() -> ScaleSchedule {
    ScaleSchedule::Log { order: 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vwlab_core::solver::{solve_mode, IntegratorOptions};

    #[test]
    fn fixtures_solve() {
        let opts = IntegratorOptions::default().with_output(10);
        assert!(solve_mode(&affine_mode(10.0), &opts).is_ok());
        assert!(solve_mode(&dirac_mode(10.0, 0.1), &opts).is_ok());
        assert_eq!(dirac_problem(8).model.len(), 8);
    }
}
