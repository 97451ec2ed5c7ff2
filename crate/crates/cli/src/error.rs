use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] memcool::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(memcool::Error::InvalidInput(_)) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(memcool::Error::Capacity { .. }) => 4,
            CliError::Core(memcool::Error::Normalization { .. }) => 1,
        }
    }
}
