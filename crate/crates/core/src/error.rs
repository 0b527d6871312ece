use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum CvkanError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("batch statistics need at least {required} samples, got {got}")]
    Statistics { required: usize, got: usize },

    #[error("gradient failure in operation `{op}` (tape node {node})")]
    Gradient { op: &'static str, node: usize },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("schema version mismatch: expected {expected}, found {found}")]
    Version { expected: u32, found: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = CvkanError> = std::result::Result<T, E>;
