//! Error type shared by every module.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failures raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Distribution or map parameters outside their domain.
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: String, reason: String },
    /// Input outside the state space of a map.
    #[error("domain error: {0}")]
    Domain(String),
    /// A finite table was requested from an infinite-support law.
    #[error("{0} has infinite support")]
    InfiniteSupport(String),
    /// Coupled seeds never agreed inside the window.
    #[error("carrier not synchronized: {failed} of {total} runs failed")]
    NotSynchronized { failed: usize, total: usize },
    /// Continued fraction did not stabilize at the requested depth.
    #[error("continued fraction not converged at index {index}: change {change:e}")]
    NotConverged { index: i64, change: f64 },
    /// A carrier path does not cover the requested output range.
    #[error("coverage error: {0}")]
    Coverage(String),
    /// Parameter regime with no bi-infinite carrier solver.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    /// Operation not defined for this map family.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    /// Map has no registered inverse.
    #[error("map {0} has no registered inverse")]
    NotInvertible(String),
    /// Statistical test given an empty sample.
    #[error("empty sample")]
    EmptySample,
    /// Statistical test given too few samples.
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    /// Brute-force oracle called beyond its size limit.
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
    /// Scheduled parameters leave the floating-point range.
    #[error("sampler overflow: {0}")]
    SamplerOverflow(String),
    /// Rejection sampler accepted too rarely.
    #[error("rejection starved: acceptance rate {rate:e}")]
    RejectionStarved { rate: f64 },
    /// Plot kind does not match its input.
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    /// Invalid configuration field.
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    /// I/O failure while writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn params(family: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            family: family.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
