use thiserror::Error;

/// Errors raised by the analytical model and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} = {value} is out of domain: {reason}")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("distance {0} m is below the path-loss model floor of 1 m")]
    BelowModelFloor(f64),

    #[error("two-UE closed forms require n_ues = 2, got {0}")]
    NotTwoUes(u32),

    #[error("empty probability undefined; use unstable-regime throughput (q_r = {q_r}, q_r_min = {q_r_min})")]
    UnstableQueue { q_r: f64, q_r_min: f64 },

    #[error("unknown scenario parameter `{0}`")]
    UnknownParameter(String),

    #[error("unknown LOS mode `{0}` (expected `decoupled` or `physical`)")]
    UnknownMode(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> ModelError {
    ModelError::Domain {
        field,
        value,
        reason,
    }
}
