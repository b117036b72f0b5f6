use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum FdError {
    /// Input failed a structural or dimensional check.
    #[error("validation error: {0}")]
    Validation(String),

    /// Requested shape is outside the SISO scope of the toolkit.
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    /// Iterative solver did not converge within its budget.
    #[error("solver failed after {iterations} iterations, last residual {residual:.3e}")]
    SolverFailure { iterations: usize, residual: f64 },

    /// Transfer function cannot be inverted stably.
    #[error("not minimum phase: {0}")]
    NotMinimumPhase(String),

    /// Filter design is numerically ill-conditioned at the requested order.
    #[error("ill-conditioned filter design: {0}; reduce the order or widen the band")]
    Conditioning(String),

    /// A ratio or moment estimate has a degenerate denominator.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// External dataset could not be ingested.
    #[error("ingestion error at row {row}: {message}")]
    Ingestion { row: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, FdError>;

impl FdError {
    pub fn validation(msg: impl Into<String>) -> Self {
        FdError::Validation(msg.into())
    }
}
