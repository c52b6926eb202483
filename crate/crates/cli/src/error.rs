use thiserror::Error;

/// Failures of a CLI run, each tied to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Agreement(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Agreement(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ehrelay_core::Error> for CliError {
    fn from(e: ehrelay_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
