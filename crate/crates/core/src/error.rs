use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThinError {
    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no points provided")]
    EmptyInput,

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("index {index} out of range for point set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("non-finite coordinate in point {point}")]
    NonFinite { point: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("grid radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ThinError {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, ThinError::ContractViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, ThinError>;
