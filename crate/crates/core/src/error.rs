use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure did not reach the requested accuracy.
    /// `estimate` is the best value available when it gave up.
    #[error("accuracy error: {what} (best estimate {estimate}, error estimate {err_est})")]
    Accuracy {
        what: String,
        estimate: f64,
        err_est: f64,
    },

    /// A root-finding bracket does not contain a sign change.
    #[error("bracket error: f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A Monte Carlo check was asked to run with too few samples.
    #[error("precision error: {0}")]
    Precision(String),

    /// A documented precondition of a bound does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A simulated population exceeded the configured cap.
    #[error("supercritical growth: population exceeded {cap} at time {time}")]
    SupercriticalGrowth { cap: u64, time: f64 },

    /// Malformed scenario or grid input.
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
