use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model specification: {0}")]
    Spec(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("time step {tau} violates the sampling bound tau < pi/{bound} (use tau = {suggested})")]
    Nyquist { tau: f64, bound: f64, suggested: f64 },

    #[error("Chebyshev expansion did not reach accuracy {epsilon} within {order} terms")]
    Truncation { epsilon: f64, order: usize },

    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("no solution for cross entropy {target}; attainable interval is ({lo}, {hi})")]
    NoSolution { target: f64, lo: f64, hi: f64 },

    #[error("probability of sampled bitstring {bitstring} is zero")]
    Divergence { bitstring: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), message: err.to_string() }
    }
}
