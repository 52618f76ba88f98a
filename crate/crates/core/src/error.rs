use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the set on which a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model specification failed validation (before any simulation).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Monte Carlo stationarity certificate failed.
    #[error("stationarity check failed: {what} estimated at {estimate:.6} (se {se:.2e}); need estimate + 3 se < 0")]
    NotStationary { what: String, estimate: f64, se: f64 },

    #[error("no bracket for the moment equation E A^k = 1: {0}")]
    NoBracket(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient reference sample: have {have}, need at least {need}")]
    InsufficientReference { have: usize, need: usize },

    #[error("truncation bound {bound:.3e} exceeds tolerance {tolerance:.3e} at cutoff {cutoff}")]
    Truncation {
        bound: f64,
        tolerance: f64,
        cutoff: usize,
    },

    /// A hypothesis required by a closed-form constant is violated or cannot be detected.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no conditioning events: {0}")]
    NoEvents(String),
}

pub type Result<T> = std::result::Result<T, Error>;
