use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("qubit indices must be distinct, got {0} twice")]
    DuplicateQubit(usize),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("mapping is not a bijection: {0}")]
    NotBijective(String),

    #[error("subsets overlap at index {0}")]
    OverlappingSets(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside the regime of the closed-form expression: {0}")]
    Regime(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
