use thiserror::Error;

/// Errors produced by layout arithmetic, kernels, file I/O and the bench harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("element count of shape {0:?} overflows the index space")]
    SizeOverflow(Vec<usize>),

    #[error("index {index:?} out of bounds for sizes {sizes:?}")]
    IndexOutOfBounds { index: Vec<usize>, sizes: Vec<usize> },

    #[error("offset {offset} out of range for {count} elements")]
    OffsetOutOfRange { offset: u64, count: u64 },

    #[error("not a permutation of 0..{len}: {order:?}")]
    Permutation { order: Vec<usize>, len: usize },

    #[error("invalid spec: {0}")]
    Spec(String),

    #[error("tile ({row}, {col}) failed: {message}")]
    TaskFailed {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("kernel `{kernel}` disagrees with the reference oracle: {detail}")]
    Verification { kernel: String, detail: String },

    #[error("allocation of {bytes} bytes failed")]
    Allocation { bytes: usize },

    #[error("tensor file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
