//! Shared error type for all engines.

use thiserror::Error;

/// Classification of a non-hyperbolic SL2 element by its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// |Tr| = 2 (up to the caller's boundary tolerance).
    Parabolic,
    /// |Tr| < 2.
    Elliptic,
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementKind::Parabolic => write!(f, "parabolic"),
            ElementKind::Elliptic => write!(f, "elliptic"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-hyperbolic element ({kind}), |trace| = {trace_abs}")]
    NonHyperbolic { kind: ElementKind, trace_abs: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("degree too high: {0}")]
    DegreeTooHigh(String),

    #[error("empty density: {0}")]
    EmptyDensity(String),

    #[error("margin too small: {0}")]
    MarginTooSmall(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit status the batch front-end maps this error to: 2 for input
    /// validation problems, 3 for numeric-assumption failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::InconsistentInput(_)
            | Error::InvalidLoop(_)
            | Error::Configuration(_) => 2,
            _ => 3,
        }
    }
}
