use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data contained NaN or infinite values, or violated a type invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("numerical failure at iteration {iter}: {reason}")]
    Numerical { iter: usize, reason: String },

    #[error("sufficient decrease violated at iteration {iter} by {excess:e}")]
    DescentViolation { iter: usize, excess: f64 },

    #[error("{path}:{line}: {reason}")]
    Ingestion {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("bad SMM1 file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the data rather than the arguments or numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::ShapeMismatch { .. }
                | Error::Ingestion { .. }
                | Error::Format(_)
                | Error::Io(_)
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical { .. } | Error::DescentViolation { .. }
        )
    }
}
