use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller passed a value outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("moment of order {order} diverges on [{a}, {b}]")]
    DivergentMoment { order: u8, a: f64, b: f64 },

    #[error("kernel is not defined at s = {0}")]
    OutOfDomain(f64),

    #[error("adaptive quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    /// Mesh, arrangement or kernel combination cannot be assembled.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("singular system: pivot {pivot:e} at row {row} below threshold {threshold:e}")]
    Singular { row: usize, pivot: f64, threshold: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
