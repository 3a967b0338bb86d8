use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point {point:?} is outside the chart domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("invalid Minkowski structure: {0}")]
    InvalidStructure(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("smooth approximation failed: {0}")]
    ApproximationFailed(String),
    #[error("empty sample set")]
    EmptySamples,
    #[error("cone membership rejected: {0}")]
    Rejected(#[from] crate::conealg::ConeRejection),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
