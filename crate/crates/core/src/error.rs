use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite argument: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("derivative of order {requested} not available (model provides up to {available})")]
    DerivativeUnavailable { requested: usize, available: usize },

    #[error("quadrature did not converge: max entry change {residual:.3e} at Q = {quad_order}")]
    QuadratureNotConverged { residual: f64, quad_order: usize },

    #[error("implicit solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("non-finite state detected at step {step} (t = {time})")]
    Blowup { step: usize, time: f64 },

    #[error("time step {dt:.3e} exceeds the rk4 stability limit {limit:.3e}")]
    UnstableTimeStep { dt: f64, limit: f64 },

    #[error("snapshot times do not align: {0}")]
    TimeMismatch(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0}")]
    ConfigValue(String),

    #[error("cached reference does not match the current configuration ({0})")]
    CacheMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
