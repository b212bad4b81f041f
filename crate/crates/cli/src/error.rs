use thiserror::Error;

/// Failures surfaced by the `taxi` binary, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("refusing to start a long run without --long-run: {0}")]
    NeedsLongRun(String),

    #[error("consistency check failed: {0}")]
    Violation(String),

    #[error(transparent)]
    Core(#[from] taxiwalk::Error),

    #[error("cannot encode output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use taxiwalk::Error as E;
        match self {
            CliError::Usage(_) | CliError::NeedsLongRun(_) => 1,
            CliError::Violation(_) => 3,
            CliError::Core(E::InvalidInput(_)) => 1,
            CliError::Core(E::Inconsistent(_) | E::LemmaViolation(_) | E::Malformed { .. }) => 3,
            CliError::Core(_) | CliError::Json(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
