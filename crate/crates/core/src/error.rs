use thiserror::Error;

/// Errors produced by estimation, sampling and experiment code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected {expected} lifetimes, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("no failure observed before the censoring time")]
    ZeroFailures,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("shape iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("negative discriminant in the approximate likelihood quadratic (D^2 - 4kE = {0})")]
    NegativeDiscriminant(f64),

    #[error("approximate likelihood produced a nonpositive scale {0}")]
    NonpositiveSigma(f64),

    #[error("observed information matrix is singular")]
    SingularInformation,

    #[error("observed information matrix is not positive definite (leading minors {0:?})")]
    InformationNotPositiveDefinite([f64; 3]),

    #[error("delta-method variance is not positive ({0})")]
    NonpositiveVariance(f64),

    #[error("{failed} of {total} bootstrap resamples could not be fitted")]
    TooManyFailedResamples { failed: usize, total: usize },

    #[error("improper posterior: {0}")]
    ImproperPosterior(String),

    #[error("posterior chain is empty")]
    EmptyChain,

    #[error("{draws} draws are too few for a level-{gamma} interval")]
    InsufficientDraws { draws: usize, gamma: f64 },

    #[error("cell {cell} aborted: {failed} of {total} replications failed")]
    CellAborted { cell: usize, failed: usize, total: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {value}")))
    }
}
