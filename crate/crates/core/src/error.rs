use thiserror::Error;

/// Errors produced by the numerical kernels and the scenario layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The matrix does not have the sign/connectivity structure an operation needs.
    #[error("structure error: {0}")]
    Structure(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("ill-conditioned linear system: {0}")]
    Conditioning(String),

    /// rho failed the monotonicity certificate on the cell [theta_lo, theta_hi].
    #[error("monotonicity certificate failed on grid cell {index} [{theta_lo}, {theta_hi}]: {reason}")]
    Certificate {
        index: usize,
        theta_lo: f64,
        theta_hi: f64,
        reason: String,
    },

    /// A trajectory left the ball of radius `divergence_bound`.
    #[error("state norm {norm:e} exceeded the divergence bound at t = {time}")]
    Divergence { time: f64, norm: f64 },

    #[error("degenerate diagonalization: {0}")]
    DegenerateDiagonalization(String),

    #[error("inconsistent classification: {0}")]
    Inconsistent(String),

    #[error("scenario error at `{key}`: {message}")]
    Scenario { key: String, message: String },

    #[error("scenario mode error: {0}")]
    Mode(String),

    #[error("missing required field `{0}`")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
