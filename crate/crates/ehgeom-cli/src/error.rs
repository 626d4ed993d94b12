//! Errors of the command-line frontend and their exit codes.

use ehgeom::GeomError;
use thiserror::Error;

/// Failures of a command run.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration.
    #[error("usage error: {0}")]
    Usage(String),

    /// A numerical evaluation failed.
    #[error(transparent)]
    Geometry(#[from] GeomError),

    /// Writing the results failed.
    #[error("output error: {0}")]
    Output(String),

    /// At least one verification check failed.
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    /// Process exit code: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Result alias of the frontend.
pub type CliResult<T> = std::result::Result<T, CliError>;
