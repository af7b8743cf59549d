use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed state spec at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl Error {
    /// True for failures of numerical validation (as opposed to bad input shape or syntax).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotHermitian { .. } | Error::InvalidState(_))
    }
}
