use std::path::PathBuf;

use qmac_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 malformed input or arguments, 3 CPTP violation, 4 budget exceeded, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Format(_) | Error::Json(_)) | CliError::Usage(_) => 2,
            CliError::Core(Error::NotTracePreserving(_) | Error::NotTraceNonIncreasing(_)) => 3,
            CliError::Core(Error::BudgetExceeded { .. }) => 4,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }
}
