use thiserror::Error;

/// Failures of the command-line layer, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("{0}")]
    NotFound(String),

    #[error("analysis failure: {0}")]
    Analysis(String),

    #[error("I/O failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::NotFound(_) => 1,
            CliError::Analysis(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
