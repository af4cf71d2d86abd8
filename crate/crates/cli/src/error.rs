//! Command-line error type and its exit codes.

use thiserror::Error;

/// Failures surfaced by the command-line driver.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config, or input files.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] robrel::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Exit status when `attack-verify` finds a contract violation.
pub const EXIT_VIOLATION: i32 = 1;

/// Exit status for usage errors and any other failure.
pub const EXIT_USAGE: i32 = 2;
