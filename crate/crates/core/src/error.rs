use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix has numerical rank 0")]
    AllZero,

    #[error("matrix is not Hermitian: ||m - m*||_F = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("vector does not live in the domain of the block operator")]
    SpaceMismatch,

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),

    #[error("invalid weighted family: {0}")]
    InvalidFamily(String),

    #[error("family is not a fusion frame (A = {lower:e}, B = {upper:e})")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("local basis {index} does not span its subspace")]
    LocalBasisMismatch { index: usize },

    #[error("block index ({row}, {col}) out of range for {blocks} blocks")]
    IndexOutOfRange { row: usize, col: usize, blocks: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("families are not dual (duality defect {defect:e})")]
    NotDual { defect: f64 },

    #[error("Schatten exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),

    #[error("supplied (lambda1, lambda2, epsilon) violate the perturbation inequality by {residual:e}")]
    PurbViolated { residual: f64 },

    #[error("Neumann series contraction factor {factor} is not below 1")]
    DivergenceDetected { factor: f64 },

    #[error("matrix is not invertible (sigma_min / sigma_max = {ratio:e})")]
    NotInvertible { ratio: f64 },

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidDocument(e.to_string())
    }
}
