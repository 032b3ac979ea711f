use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qudit dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("subsystem {index} out of range for a register of {len} subsystems")]
    SubsystemOutOfRange { index: usize, len: usize },
    #[error("partial trace needs at least one kept subsystem")]
    EmptyKeep,
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("channel amplitude {index} is negative or not finite ({value})")]
    InvalidAmplitude { index: usize, value: f64 },
    #[error("tolerance must be strictly positive, got {0}")]
    InvalidTolerance(f64),
    #[error("outcome ({l}, {k}) has negligible probability {probability:e}")]
    DegenerateOutcome { l: usize, k: usize, probability: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
