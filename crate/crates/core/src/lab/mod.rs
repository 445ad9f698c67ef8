//! Very-weak-solution experiments on ε-nets of regularized problems.
//!
//! A net is the family `u_ε` solving `∂ₜ²u_ε + a_ε(t)ℛu_ε = f_ε` with
//! `a_ε = a ∗ ψ_{ω(ε)}`. The reports here fit its growth in `1/ε`
//! (moderateness), its decay against another net (negligibility), its
//! distance to the classical solution (consistency), and the high-frequency
//! amplification that decides Gevrey well-posedness.

mod experiments;
mod moderate;
mod net;
mod problem;
mod regimes;

pub use experiments::{
    consistency_experiment, energy_inequality_audit, geometric_betas, gevrey_amplification_scan,
    uniqueness_experiment, AmplificationData, AmplificationOptions, AmplificationReport, AmplificationRow,
    AuditReport, AuditRow, ConsistencyOptions, ConsistencyReport, ConsistencyRow, GevreyErrorNorm,
    UniquenessReport, UniquenessRow,
};
pub use moderate::{
    gevrey_moderateness_report, moderateness_from_series, moderateness_report, negligibility_from_series,
    negligibility_test, DecayFit, GevreyModerateReport, GevreyModerateRow, ModerateReport, NegligibilityReport,
    OrderFit, NEGLIGIBLE_SLACK, TAIL_SLOPE_SLACK,
};
pub use net::{
    check_eps_net, default_eps_net, solve_regularized_net, NetEntry, NetOptions, NetSolution, DEFAULT_OUTPUT_INTERVALS,
    MIN_NET_POINTS,
};
pub use problem::{CauchyData, DataSpec, FieldSpec, ScenarioProblem, SourceSpec};
pub use regimes::{
    canonical_regimes, regime_advisor, CoefficientClass, Regime, RegimeRecord, SolutionSpace, REGIME_LIST,
};
