use thiserror::Error;

/// Errors from the classical channel model: analytics, chain propagation,
/// sampling and throughput.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("optimizer did not converge after {sweeps} sweeps (best objective {objective:e})")]
    NotConverged {
        best: Vec<f64>,
        objective: f64,
        sweeps: usize,
    },
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn domain(msg: impl Into<String>) -> ModelError {
    ModelError::Domain(msg.into())
}
