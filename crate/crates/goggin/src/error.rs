//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or parameter combination.
    #[error("validation: {0}")]
    Validation(String),

    /// A numeric routine failed to reach its contract (non-convergence,
    /// non-finite intermediate, tolerance miss).
    #[error("numeric: {0}")]
    Numeric(String),

    /// Configuration file or config-level semantic error.
    #[error("config: {0}")]
    Config(String),

    /// Particle weights collapsed: every log-weight non-finite at `step`
    /// (1-indexed).
    #[error("particle degeneracy at step {step}: all log-weights non-finite")]
    Degeneracy { step: usize },

    /// Too many particle-filter replications degenerated for the oracle
    /// estimate to be trusted.
    #[error("unreliable oracle: {degenerate} of {replications} replications degenerate")]
    UnreliableOracle { degenerate: usize, replications: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
