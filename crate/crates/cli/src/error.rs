use thiserror::Error;

/// Stage failure, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input data or arguments; exit code 2.
    #[error("{0}")]
    Validation(String),
    /// Filesystem failure; exit code 3.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<lif_core::Error> for CliError {
    fn from(e: lif_core::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
