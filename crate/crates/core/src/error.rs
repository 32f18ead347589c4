use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QkmError>;

#[derive(Debug, Error)]
pub enum QkmError {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    Bounds { index: usize, num_qubits: usize },

    #[error("qubit index sets overlap: {0}")]
    Alias(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("class count error: {0}")]
    ClassCount(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl QkmError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QkmError::Io {
            path: path.into(),
            source,
        }
    }
}
