use thiserror::Error;

/// Errors raised by the solver, the simulator and the experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlbmError {
    /// Malformed or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Physically or numerically invalid input (constraint violations, zero densities).
    #[error("domain error: {0}")]
    Domain(String),
    /// An API used outside its contract.
    #[error("usage error: {0}")]
    Usage(String),
    /// Broken internal invariant.
    #[error("internal error: {0}")]
    Internal(String),
}

impl QlbmError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QlbmError::Config(_) => 2,
            QlbmError::Domain(_) | QlbmError::Usage(_) => 3,
            QlbmError::Internal(_) => 4,
        }
    }
}

pub type Result<T, E = QlbmError> = std::result::Result<T, E>;
