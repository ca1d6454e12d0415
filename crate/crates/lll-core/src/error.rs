//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by constructors, integrators, solvers, and root finders.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A coefficient vector contains NaN/Inf or is empty.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A closed-form construction needs more modes than were requested.
    #[error("truncation too severe: {0}")]
    Truncation(String),

    /// An iteration produced a non-finite value; the payload reports where.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// A time integration blew up; carries the last finite snapshot so the
    /// caller can inspect how far the run got.
    #[error("integration diverged at t = {t}; last good snapshot at t = {last_good_t}")]
    Diverged {
        t: f64,
        last_good_t: f64,
        last_good: Box<crate::fock::CoeffState>,
    },

    /// An iterative solver ran out of iterations before meeting its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A constrained problem has an empty feasible set.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    /// Not enough usable data points for a requested fit.
    #[error("fit needs more data: {0}")]
    InsufficientData(String),

    /// Root validation or count-circle recentering failed.
    #[error("zero finder: {0}")]
    ZeroFinder(String),

    /// Underlying I/O failure (state files, traces).
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON in a state or config file.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }
}
