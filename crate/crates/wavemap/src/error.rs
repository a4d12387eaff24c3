//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantity that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Energy drift is undefined because the initial energy vanishes.
    #[error("energy drift undefined: E(0) = 0")]
    UndefinedDrift,

    /// Convergence factor has a vanishing denominator (identical solutions).
    #[error("convergence factor indeterminate: zero denominator")]
    IndeterminateQ,

    /// Static-profile fit could not be performed.
    #[error("static fit failed: {0}")]
    FitFailure(String),

    /// Bisection endpoints do not bracket the critical amplitude.
    #[error("invalid bisection bracket: {0}")]
    InvalidBracket(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
