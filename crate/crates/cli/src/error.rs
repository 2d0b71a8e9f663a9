//! CLI error kinds mapped onto process exit codes: 2 for unusable specs
//! or I/O trouble, 3 for numeric failures inside a solve.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(String),

    #[error("numeric failure at step {step}")]
    Numeric { step: usize },

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Io(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

impl From<feedsolve::Error> for CliError {
    fn from(e: feedsolve::Error) -> Self {
        match e {
            feedsolve::Error::NonFinite { step } => CliError::Numeric { step },
            other => CliError::Spec(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
