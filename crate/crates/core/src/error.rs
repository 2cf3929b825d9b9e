use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("unsupported factor kind: {0}")]
    UnsupportedFactor(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("unsatisfiable hard constraints: {0}")]
    Unsatisfiable(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
