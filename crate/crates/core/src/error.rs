//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition on an operation argument was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A run configuration failed validation before any work started.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Explicit Euler step size violates the stiff stability guard.
    #[error("unstable time step: dt * |mu_N| = {product:.6e} exceeds 1")]
    Unstable { product: f64 },

    /// A coefficient left the trust region; the trajectory is diverging.
    #[error("solution blow-up at step {step}: max |coefficient| = {magnitude:.6e}")]
    BlowUp { step: usize, magnitude: f64 },

    /// Solver and noise path disagree on the time grid or resolution.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Data unsuitable for the requested fit or statistic.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
