use thiserror::Error;

/// Errors produced by the detection library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Plane or image dimensions do not agree.
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    /// Pixel coordinate outside the image.
    #[error("index ({row}, {col}) out of range for {height}x{width} image")]
    Index {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    /// A precondition of an operation was not met.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed PBM input.
    #[error("parse error at line {line}, byte offset {offset}: {msg}")]
    Parse {
        line: usize,
        offset: usize,
        msg: String,
    },

    /// Malformed scenario configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
