//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants carry
//! enough context for a caller to report the failure without re-deriving it.

use thiserror::Error;

/// Errors raised by the reliability library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share an ambient dimension do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An operation that averages over a sample received an empty one.
    #[error("empty dataset")]
    EmptyDataset,

    /// The sample cannot be labeled perfectly by any hypothesis in the class.
    #[error("sample is not realizable by the {class} class")]
    NonRealizable { class: &'static str },

    /// A numeric or structural parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested combination of class, model, or distribution has no
    /// implemented evaluation path.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The in-repo linear-program solver did not reach a verdict.
    #[error("linear program did not converge after {iterations} pivots (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    /// A numerical search stopped with an optimality gap above tolerance.
    #[error("distance search gap {gap:e} exceeds tolerance {tolerance:e}")]
    GapExceeded { gap: f64, tolerance: f64 },

    /// A runtime self-check failed. This always indicates a bug.
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    /// A test draw from the target distribution was labeled inconsistently
    /// with the target hypothesis.
    #[error("realizability violated on test draw {index}")]
    RealizabilityViolation { index: usize },

    /// Malformed external input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Shorthand result type.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
