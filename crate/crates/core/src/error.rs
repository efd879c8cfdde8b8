use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: entries ({row},{col}) differ by {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("halfspace has a zero normal vector")]
    ZeroNormal,

    #[error("non-finite number in input")]
    NonFinite,

    #[error("polyhedral set is empty")]
    EmptySet,

    #[error("set is not a cone (some offset is nonzero)")]
    NotACone,

    #[error("cone contains only the origin")]
    TrivialCone,

    #[error("prox-parameter must be nonnegative, got {0}")]
    NegativeProxParameter(f64),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("minimum of the quadratic form is {0}, expected a negative value")]
    NonNegativeMinimum(f64),

    #[error("PLQ function failed validation with {0} violation(s)")]
    InvalidPlq(usize),

    #[error("PLQ function has no pieces")]
    NoPieces,

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("cannot read input: {0}")]
    Io(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
