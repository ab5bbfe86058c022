use std::path::PathBuf;

use sjj_core::error::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{failed} of {total} grid points failed; see the error rows and the metadata file")]
    PartialSweep { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(Error::Numeric { .. }) => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
            CliError::PartialSweep { .. } => 4,
        }
    }
}
