use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("resolution error: grid step {step:e} cannot resolve mollifier scale {omega:e}")]
    Resolution { omega: f64, step: f64 },

    #[error(
        "step budget exceeded for beta = {beta}: smallest step reached {min_dt:e} \
         ({steps} steps, estimated local error {local_error:e})"
    )]
    StepBudget {
        beta: f64,
        min_dt: f64,
        steps: usize,
        local_error: f64,
    },

    #[error("overflow at mode {mode}: exponent {exponent} exceeds cap {cap}")]
    Overflow { mode: usize, exponent: f64, cap: f64 },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("unknown coefficient class: {0}")]
    UnknownClass(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(vec![msg.into()])
    }
}

pub type Result<T> = std::result::Result<T, Error>;
