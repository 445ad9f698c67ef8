//! Scenario files: parsing, resolution and fail-fast validation.
//!
//! A scenario is a TOML document. Unknown keys are rejected everywhere.
//! Times are in the units of the coefficient's time axis; frequencies and
//! Sobolev orders are dimensionless.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vwlab_core::coefficients::{sample_exact, Atom, Jump, Mollifier, MollifierShape, RoughCoefficient, ScaleSchedule, SmoothPart};
use vwlab_core::lab::{
    check_eps_net, default_eps_net, regime_advisor, AmplificationData, CoefficientClass, DataSpec, FieldSpec,
    GevreyErrorNorm, NetOptions, ScenarioProblem, SourceSpec, DEFAULT_OUTPUT_INTERVALS,
};
use vwlab_core::solver::{IntegratorOptions, Method, DEFAULT_MAX_STEPS, DEFAULT_RTOL, LARGE_MAX_STEPS};
use vwlab_core::{build_model, Error as CoreError, ModelSpec, UniformGrid};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Desk-scale limits, lifted by `large = true`.
pub const MAX_DESK_MODES: usize = 64;
pub const MAX_DESK_NET: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Run name; letters, digits, `-` and `_`.
    pub name: String,
    /// Sobolev order `s` of the solution space `H^{s+ν/2} × H^s`.
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub large: bool,
    /// Output root, relative to the scenario file.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub regime: Option<RegimeClaim>,
    pub time: TimeBlock,
    pub coefficient: CoefficientBlock,
    #[serde(default)]
    pub mollifier: MollifierBlock,
    #[serde(default = "identity_schedule")]
    pub schedule: ScaleSchedule,
    pub spectral: SpectralBlock,
    pub data: DataBlock,
    #[serde(default)]
    pub analyses: Analyses,
}

fn identity_schedule() -> ScaleSchedule {
    ScaleSchedule::Identity
}

/// Claimed well-posedness regime; `s` is the Gevrey order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeClaim {
    pub class: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub ell: Option<u32>,
    pub s: f64,
}

impl RegimeClaim {
    pub fn class(&self) -> Result<CoefficientClass, String> {
        let param = self.alpha.or(self.ell.map(f64::from));
        CoefficientClass::from_parts(&self.class, param).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    /// Final time `T`.
    pub horizon: f64,
    #[serde(default = "rk4")]
    pub method: Method,
    /// Relative local error tolerance of the step-pair monitor.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Output intervals on `[0, T]`, shared by every mode.
    #[serde(default = "default_output_intervals")]
    pub output_intervals: usize,
    /// Step budget per mode.
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn rk4() -> Method {
    Method::Rk4
}

fn default_rtol() -> f64 {
    DEFAULT_RTOL
}

fn default_output_intervals() -> usize {
    DEFAULT_OUTPUT_INTERVALS
}

/// A coefficient or source profile on `[0, T]`; the horizon comes from the
/// time block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBlock {
    pub smooth: SmoothPart,
    #[serde(default)]
    pub jumps: Vec<Jump>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub floor: Option<f64>,
    /// Declared order `L`; defaults to the smallest admissible one.
    #[serde(default)]
    pub order: Option<u32>,
}

impl CoefficientBlock {
    pub fn resolve(&self, horizon: f64) -> RoughCoefficient {
        let mut c = RoughCoefficient::smooth(self.smooth.clone(), horizon);
        c.jumps = self.jumps.clone();
        c.atoms = self.atoms.clone();
        c.floor = self.floor;
        c.order = self.order.unwrap_or_else(|| c.required_order());
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierBlock {
    #[serde(default = "bump")]
    pub shape: MollifierShape,
    /// Quadrature tolerance for the normalization.
    #[serde(default = "default_mollifier_tol")]
    pub tolerance: f64,
}

fn bump() -> MollifierShape {
    MollifierShape::Bump
}

fn default_mollifier_tol() -> f64 {
    1e-12
}

impl Default for MollifierBlock {
    fn default() -> Self {
        MollifierBlock {
            shape: bump(),
            tolerance: default_mollifier_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectralBlock {
    Power {
        modes: usize,
        nu: f64,
    },
    HeisenbergLike {
        n: u32,
        lambda_max: f64,
        lambda_count: usize,
        levels: usize,
    },
    /// Comma-separated `m, pi_m, mu_m` file, relative to the scenario.
    Table {
        path: PathBuf,
        nu: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    pub u0: FieldSpec,
    #[serde(default = "zero_field")]
    pub u1: FieldSpec,
    #[serde(default)]
    pub source: Option<SourceBlock>,
}

fn zero_field() -> FieldSpec {
    FieldSpec::Zero
}

/// Separable source `g(t) ĥ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBlock {
    pub profile: CoefficientBlock,
    pub spatial: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    /// Strictly descending ε-net shared by the net-based analyses.
    #[serde(default = "default_eps_net")]
    pub eps_net: Vec<f64>,
    /// Highest time derivative tracked by the nets.
    #[serde(default = "two")]
    pub p_max: usize,
    #[serde(default)]
    pub moderateness: Option<Empty>,
    #[serde(default)]
    pub gevrey_moderateness: Option<GevreyModerateness>,
    #[serde(default)]
    pub negligibility: Option<Comparison>,
    #[serde(default)]
    pub uniqueness: Option<Comparison>,
    #[serde(default)]
    pub consistency: Option<Consistency>,
    #[serde(default)]
    pub amplification: Option<Amplification>,
    #[serde(default)]
    pub audit: Option<Audit>,
    #[serde(default)]
    pub trajectory: Option<Trajectory>,
    #[serde(default)]
    pub mollified: Option<Mollified>,
    #[serde(default)]
    pub growth: Option<Growth>,
    #[serde(default)]
    pub modes: Option<Empty>,
}

fn two() -> usize {
    2
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses {
            eps_net: default_eps_net(),
            p_max: 2,
            moderateness: None,
            gevrey_moderateness: None,
            negligibility: None,
            uniqueness: None,
            consistency: None,
            amplification: None,
            audit: None,
            trajectory: None,
            mollified: None,
            growth: None,
            modes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Empty {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyModerateness {
    /// Gevrey order.
    pub s: f64,
    /// Ascending weights η.
    pub eta_grid: Vec<f64>,
}

/// A second mollifier run against the scenario's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub against: MollifierShape,
    /// Exponents ℓ for `sup‖Δu‖ ≤ c ε^ℓ`.
    #[serde(default = "default_ells")]
    pub ell: Vec<f64>,
}

fn default_ells() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Consistency {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub gevrey: Option<GevreyErrorNorm>,
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaList {
    Geometric { lo: f64, hi: f64, count: usize },
    Explicit(Vec<f64>),
}

impl BetaList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            BetaList::Geometric { lo, hi, count } => vwlab_core::lab::geometric_betas(*lo, *hi, *count),
            BetaList::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplification {
    /// Gevrey order; defaults to the regime claim's.
    #[serde(default)]
    pub s: Option<f64>,
    pub betas: BetaList,
    /// Largest admissible `max / median` of `log A(β) / β^{1/s}`.
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default = "worst")]
    pub data: AmplificationData,
}

fn default_factor() -> f64 {
    10.0
}

fn worst() -> AmplificationData {
    AmplificationData::Worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Audit {
    /// Mode-count multipliers.
    #[serde(default = "default_factors")]
    pub factors: Vec<usize>,
}

fn default_factors() -> Vec<usize> {
    vec![1, 2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    /// 1-based mode index.
    pub mode: usize,
    /// Regularization parameter; required for a distributional coefficient.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Record the quasi-energy `E_δ`.
    #[serde(default)]
    pub quasi: bool,
    /// Quasi-energy parameter δ; defaults to `max(ω, 1e-3)`.
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mollified {
    pub eps: f64,
    #[serde(default = "two")]
    pub k_max: usize,
    #[serde(default)]
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Growth {
    #[serde(default = "default_growth_net")]
    pub eps_net: Vec<f64>,
    #[serde(default = "one_usize")]
    pub k_max: usize,
}

fn default_growth_net() -> Vec<f64> {
    vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
}

fn one_usize() -> usize {
    1
}

/// Analysis names in execution and reporting order.
pub const ANALYSIS_NAMES: [&str; 11] = [
    "modes",
    "mollified",
    "growth",
    "trajectory",
    "moderateness",
    "gevrey-moderateness",
    "negligibility",
    "uniqueness",
    "consistency",
    "amplification",
    "audit",
];

impl Analyses {
    /// Requested analyses, in [`ANALYSIS_NAMES`] order.
    pub fn requested(&self) -> Vec<&'static str> {
        let flags = [
            self.modes.is_some(),
            self.mollified.is_some(),
            self.growth.is_some(),
            self.trajectory.is_some(),
            self.moderateness.is_some(),
            self.gevrey_moderateness.is_some(),
            self.negligibility.is_some(),
            self.uniqueness.is_some(),
            self.consistency.is_some(),
            self.amplification.is_some(),
            self.audit.is_some(),
        ];
        ANALYSIS_NAMES
            .iter()
            .zip(flags)
            .filter(|(_, on)| *on)
            .map(|(n, _)| *n)
            .collect()
    }

    fn uses_main_net(&self) -> bool {
        self.moderateness.is_some()
            || self.gevrey_moderateness.is_some()
            || self.negligibility.is_some()
            || self.uniqueness.is_some()
            || self.consistency.is_some()
    }
}

/// A validated scenario with everything resolved that the analyses need.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub path: PathBuf,
    pub model_spec: ModelSpec,
    pub problem: ScenarioProblem,
    pub mollifier: Mollifier,
    pub integrator: IntegratorOptions,
    pub net_options: NetOptions,
    pub regime_class: Option<CoefficientClass>,
    /// Hex SHA-256 of the canonical scenario and tool version.
    pub hash: String,
}

impl LoadedScenario {
    pub fn amplification_s(&self) -> Option<f64> {
        let a = self.scenario.analyses.amplification.as_ref()?;
        a.s.or(self.scenario.regime.as_ref().map(|r| r.s))
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let scenario: Scenario =
        toml::from_str(&text).map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
    resolve(scenario, path)
}

fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("mode table {}: {e}", path.display()))?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let expected = ["m", "pi_m", "mu_m"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(format!(
            "mode table {} must have columns m, pi_m, mu_m",
            path.display()
        ));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| format!("mode table {}: {e}", path.display()))?;
        let field = |k: usize| {
            row[k]
                .parse::<f64>()
                .map_err(|_| format!("mode table {} row {}: '{}' is not a number", path.display(), i + 1, &row[k]))
        };
        out.push((field(1)?, field(2)?));
    }
    Ok(out)
}

fn flatten(e: CoreError) -> Vec<String> {
    match e {
        CoreError::Validation(v) => v,
        other => vec![other.to_string()],
    }
}

/// Validates `scenario` exhaustively; `path` anchors relative file names.
pub fn resolve(scenario: Scenario, path: &Path) -> Result<LoadedScenario, CliError> {
    let mut errors = Vec::new();
    let base = path.parent().unwrap_or(Path::new("."));
    let sc = &scenario;
    let large = sc.large;

    if sc.name.is_empty() || !sc.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        errors.push(format!("name '{}' must be nonempty and use only letters, digits, '-' and '_'", sc.name));
    }
    if !sc.s.is_finite() {
        errors.push(format!("s = {} must be finite", sc.s));
    }

    let t = &sc.time;
    let horizon_ok = t.horizon > 0.0 && t.horizon.is_finite();
    if !horizon_ok {
        errors.push(format!("time.horizon = {} must be positive and finite", t.horizon));
    }
    if !(t.rtol > 0.0 && t.rtol <= 1e-3) {
        errors.push(format!("time.rtol = {} must lie in (0, 1e-3]", t.rtol));
    }
    if t.output_intervals < 2 {
        errors.push(format!("time.output_intervals = {} must be at least 2", t.output_intervals));
    }
    let budget = if large { LARGE_MAX_STEPS } else { DEFAULT_MAX_STEPS };
    let max_steps = t.max_steps.unwrap_or(budget);
    if max_steps == 0 {
        errors.push("time.max_steps must be positive".into());
    } else if max_steps > budget {
        errors.push(format!(
            "time.max_steps = {max_steps} exceeds the limit {budget}{}",
            if large { "" } else { "; set large = true to lift it" }
        ));
    }

    let horizon = if horizon_ok { t.horizon } else { 1.0 };
    let coefficient = sc.coefficient.resolve(horizon);

    let mollifier = match Mollifier::new(sc.mollifier.shape, sc.mollifier.tolerance) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(format!("mollifier: {e}"));
            None
        }
    };

    let model_spec = match &sc.spectral {
        SpectralBlock::Power { modes, nu } => Some(ModelSpec::Power { modes: *modes, nu: *nu }),
        SpectralBlock::HeisenbergLike {
            n,
            lambda_max,
            lambda_count,
            levels,
        } => Some(ModelSpec::HeisenbergLike {
            n: *n,
            lambda_max: *lambda_max,
            lambda_count: *lambda_count,
            levels: *levels,
        }),
        SpectralBlock::Table { path: p, nu } => match read_table(&base.join(p)) {
            Ok(entries) => Some(ModelSpec::Table { entries, nu: *nu }),
            Err(e) => {
                errors.push(e);
                None
            }
        },
    };
    let model = model_spec.as_ref().and_then(|spec| match build_model(spec) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.extend(flatten(e).into_iter().map(|e| format!("spectral: {e}")));
            None
        }
    });
    if let Some(m) = &model {
        if !large && m.len() > MAX_DESK_MODES {
            errors.push(format!(
                "spectral model has {} modes, above the desk limit {MAX_DESK_MODES}; set large = true to lift it",
                m.len()
            ));
        }
    }

    let data_spec = DataSpec {
        u0: sc.data.u0.clone(),
        u1: sc.data.u1.clone(),
        source: sc.data.source.as_ref().map(|s| SourceSpec {
            profile: s.profile.resolve(horizon),
            spatial: s.spatial.clone(),
        }),
    };
    if let Some(m) = &model {
        for (name, f) in [("u0", &data_spec.u0), ("u1", &data_spec.u1)] {
            if let Err(e) = f.resolve(m) {
                errors.extend(flatten(e).into_iter().map(|e| format!("data.{name}: {e}")));
            }
        }
        if let Some(src) = &data_spec.source {
            if let Err(e) = src.spatial.resolve(m) {
                errors.extend(flatten(e).into_iter().map(|e| format!("data.source.spatial: {e}")));
            }
        }
    }
    errors.extend(coefficient.violations().into_iter().map(|e| format!("coefficient: {e}")));
    if let Some(src) = &data_spec.source {
        errors.extend(src.profile.violations().into_iter().map(|e| format!("data.source.profile: {e}")));
    }

    let regime_class = match &sc.regime {
        None => None,
        Some(claim) => match claim.class() {
            Err(e) => {
                errors.push(format!("regime: {e}"));
                None
            }
            Ok(class) => match regime_advisor(class) {
                Err(e) => {
                    errors.push(format!("regime: {e}"));
                    None
                }
                Ok(record) => {
                    if let Err(msg) = record.admits(claim.s) {
                        errors.push(format!("regime {}: {msg}", record.regime));
                    }
                    Some(class)
                }
            },
        },
    };

    let integrator = IntegratorOptions {
        method: t.method,
        rtol: t.rtol,
        max_steps,
        output_intervals: None,
    };
    let net_options = NetOptions {
        integrator,
        output_intervals: t.output_intervals,
        p_max: sc.analyses.p_max,
    };

    check_analyses(sc, &coefficient, &data_spec, model.as_ref(), regime_class, &mut errors);

    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    let model_spec = model_spec.expect("model resolved when no errors were reported");
    let problem = ScenarioProblem::new(coefficient, model_spec.clone(), data_spec, sc.s)
        .map_err(|e| CliError::Validation(flatten(e)))?;
    let hash = scenario_hash(sc, &model_spec);
    Ok(LoadedScenario {
        scenario,
        path: path.to_path_buf(),
        model_spec,
        problem,
        mollifier: mollifier.expect("mollifier resolved when no errors were reported"),
        integrator,
        net_options,
        regime_class,
        hash,
    })
}

fn check_analyses(
    sc: &Scenario,
    coefficient: &RoughCoefficient,
    data: &DataSpec,
    model: Option<&vwlab_core::SpectralModel>,
    regime_class: Option<CoefficientClass>,
    errors: &mut Vec<String>,
) {
    let an = &sc.analyses;
    let large = sc.large;
    if an.requested().is_empty() {
        errors.push(format!("no analyses requested; choose from {}", ANALYSIS_NAMES.join(", ")));
    }
    let source_regular = data.source.as_ref().is_none_or(|s| s.profile.is_regular());
    let regular = coefficient.is_regular() && source_regular;
    let atom_order = coefficient
        .atoms
        .iter()
        .chain(data.source.iter().flat_map(|s| s.profile.atoms.iter()))
        .map(|a| a.order as usize)
        .max()
        .unwrap_or(0);
    let capacity = |shape: MollifierShape, needed: usize, what: &str, errors: &mut Vec<String>| {
        if let Ok(m) = Mollifier::new(shape, sc.mollifier.tolerance) {
            if needed > m.max_derivative() {
                errors.push(format!(
                    "{what} needs {needed} derivatives of the {} mollifier, which has {}",
                    shape.id(),
                    m.max_derivative()
                ));
            }
        }
    };

    if an.uses_main_net() {
        if let Err(e) = check_eps_net(&an.eps_net) {
            errors.extend(flatten(e).into_iter().map(|e| format!("analyses.eps_net: {e}")));
        }
        if !large && an.eps_net.len() > MAX_DESK_NET {
            errors.push(format!(
                "analyses.eps_net has {} points, above the desk limit {MAX_DESK_NET}; set large = true to lift it",
                an.eps_net.len()
            ));
        }
        let needed = atom_order + an.p_max.saturating_sub(2);
        capacity(sc.mollifier.shape, needed, "analyses.p_max", errors);
    }
    if let Some(g) = &an.gevrey_moderateness {
        if !(g.s >= 1.0 && g.s.is_finite()) {
            errors.push(format!("analyses.gevrey_moderateness.s = {} must be at least 1", g.s));
        }
        if g.eta_grid.is_empty() {
            errors.push("analyses.gevrey_moderateness.eta_grid is empty".into());
        }
        if g.eta_grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) || g.eta_grid.windows(2).any(|w| w[1] <= w[0]) {
            errors.push("analyses.gevrey_moderateness.eta_grid must be ascending, finite and nonnegative".into());
        }
    }
    for (name, c) in [("negligibility", &an.negligibility), ("uniqueness", &an.uniqueness)] {
        let Some(c) = c else { continue };
        if c.ell.is_empty() || c.ell.iter().any(|l| !l.is_finite()) {
            errors.push(format!("analyses.{name}.ell must be a nonempty list of finite exponents"));
        }
        let needed = atom_order + an.p_max.max(1).saturating_sub(2);
        capacity(c.against, needed, &format!("analyses.{name}"), errors);
    }
    if let Some(c) = &an.consistency {
        if !regular {
            errors.push(
                "analyses.consistency needs a regular coefficient and source (no jumps or atoms)".into(),
            );
        }
        if !(c.threshold > 0.0 && c.threshold.is_finite()) {
            errors.push(format!("analyses.consistency.threshold = {} must be positive", c.threshold));
        }
        if let Some(g) = &c.gevrey {
            if !(g.s >= 1.0 && g.a >= 0.0) {
                errors.push("analyses.consistency.gevrey needs s >= 1 and a >= 0".into());
            }
        }
    }
    if let Some(a) = &an.amplification {
        if !coefficient.is_regular() {
            errors.push("analyses.amplification needs a regular coefficient (no jumps or atoms)".into());
        }
        match a.s.or(sc.regime.as_ref().map(|r| r.s)) {
            None => errors.push("analyses.amplification.s is missing and no regime is claimed".into()),
            Some(s) if !(s >= 1.0 && s.is_finite()) => {
                errors.push(format!("analyses.amplification: Gevrey order s = {s} must be at least 1"))
            }
            Some(s) => {
                if let (Some(class), Some(_)) = (regime_class, a.s) {
                    if let Ok(rec) = regime_advisor(class) {
                        if let Err(msg) = rec.admits(s) {
                            errors.push(format!("analyses.amplification under regime {}: {msg}", rec.regime));
                        }
                    }
                }
            }
        }
        let betas = a.betas.values();
        if betas.len() < 3 || betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            errors.push("analyses.amplification.betas needs at least 3 positive values".into());
        } else {
            let lo = betas.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = betas.iter().copied().fold(0.0, f64::max);
            if hi / lo < 100.0 {
                errors.push(format!("analyses.amplification.betas span [{lo}, {hi}], less than two decades"));
            }
        }
        if a.factor.is_nan() || a.factor <= 1.0 {
            errors.push(format!("analyses.amplification.factor = {} must exceed 1", a.factor));
        }
    }
    if let Some(a) = &an.audit {
        if !regular {
            errors.push("analyses.audit needs a regular coefficient and source".into());
        } else if coefficient.violations().is_empty() {
            let grid = UniformGrid::covering(coefficient.horizon, 2000);
            if let Ok(sampled) = sample_exact(coefficient, &grid, 0) {
                if sampled.min() <= 0.0 {
                    errors.push(format!(
                        "analyses.audit needs a strictly positive coefficient; min a = {:e}",
                        sampled.min()
                    ));
                }
            }
        }
        if a.factors.is_empty() || a.factors.contains(&0) {
            errors.push("analyses.audit.factors must be a nonempty list of positive integers".into());
        }
        if matches!(sc.spectral, SpectralBlock::Table { .. }) && a.factors.iter().any(|f| *f != 1) {
            errors.push("analyses.audit cannot resize a table model; use factors = [1]".into());
        }
        if let Some(m) = model {
            let top = a.factors.iter().copied().max().unwrap_or(1);
            if !large && m.len() * top > MAX_DESK_MODES {
                errors.push(format!(
                    "analyses.audit reaches about {} modes, above the desk limit {MAX_DESK_MODES}",
                    m.len() * top
                ));
            }
        }
    }
    if let Some(tr) = &an.trajectory {
        if let Some(m) = model {
            if tr.mode == 0 || tr.mode > m.len() {
                errors.push(format!("analyses.trajectory.mode = {} must lie in 1..={}", tr.mode, m.len()));
            }
        }
        match tr.eps {
            None if !regular => {
                errors.push("analyses.trajectory.eps is required for a distributional coefficient or source".into())
            }
            Some(e) if !(e > 0.0 && e <= 1.0) => {
                errors.push(format!("analyses.trajectory.eps = {e} must lie in (0, 1]"))
            }
            _ => {}
        }
        if let Some(d) = tr.delta {
            if !(d > 0.0 && d.is_finite()) {
                errors.push(format!("analyses.trajectory.delta = {d} must be positive"));
            }
        }
        if tr.eps.is_some() {
            capacity(sc.mollifier.shape, atom_order + 1, "analyses.trajectory", errors);
        }
    }
    if let Some(m) = &an.mollified {
        if !(m.eps > 0.0 && m.eps <= 1.0) {
            errors.push(format!("analyses.mollified.eps = {} must lie in (0, 1]", m.eps));
        }
        if m.intervals == Some(0) {
            errors.push("analyses.mollified.intervals must be positive".into());
        }
        capacity(sc.mollifier.shape, atom_order + m.k_max, "analyses.mollified", errors);
    }
    if let Some(g) = &an.growth {
        let net = &g.eps_net;
        if net.len() < 4 || net.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            errors.push("analyses.growth.eps_net needs at least 4 values in (0, 1]".into());
        } else {
            let lo = net.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = net.iter().copied().fold(0.0, f64::max);
            if hi / lo < 100.0 {
                errors.push("analyses.growth.eps_net spans less than two decades".into());
            }
        }
        capacity(sc.mollifier.shape, atom_order + g.k_max, "analyses.growth", errors);
    }
}

#[derive(Serialize)]
struct HashInput<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'a Scenario,
    model: &'a ModelSpec,
}

/// Content address of a scenario: SHA-256 over its canonical JSON form, the
/// resolved spectral model and the tool version.
pub fn scenario_hash(scenario: &Scenario, model: &ModelSpec) -> String {
    let input = HashInput {
        tool: "vwlab",
        version: TOOL_VERSION,
        scenario,
        model,
    };
    let bytes = serde_json::to_vec(&input).expect("scenario serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}
