use thiserror::Error;

/// Errors raised by constructors, algebraic operations and recovery routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has {found} entries but {rows}x{cols} requires {expected}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("tolerance must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),

    #[error("invalid outcome space: {0}")]
    InvalidSpace(String),

    #[error("outcome spaces differ")]
    SpaceMismatch,

    #[error("not an effect: {0}")]
    NotEffect(String),

    #[error("effects are not orthogonal: sum exceeds the unit by {0:e}")]
    NotOrthogonal(f64),

    #[error("scalar {0} lies outside [0, 1]")]
    ScalarOutOfRange(f64),

    #[error("not a state: {0}")]
    NotState(String),

    #[error("functional is not affine (violation {0:e})")]
    NotAffine(f64),

    #[error("functional value {value} at `{label}` lies outside [0, 1]")]
    RangeViolation { label: String, value: f64 },

    #[error("map is not an effect-module homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("not a POVM: {0}")]
    NotPovm(String),

    #[error("group action is not transitive")]
    NotTransitive,

    #[error("group average is singular (smallest eigenvalue {0:e})")]
    SingularAverage(f64),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid measurement model: {0}")]
    InvalidModel(String),

    #[error("invalid transcript: {0}")]
    InvalidTranscript(String),

    #[error("fixture `{file}`: {message}")]
    Fixture { file: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
