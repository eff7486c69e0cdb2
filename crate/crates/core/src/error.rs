use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to be
/// reported as a structured document by the CLI.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix has {d} states; at least 2 are required")]
    TooSmall { d: usize },
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("row {row} sums to 1{deviation:+e}")]
    RowSumNotOne { row: usize, deviation: f64 },
    #[error("probability vector sums to 1{deviation:+e}")]
    NotNormalized { deviation: f64 },
    #[error("probability vector has negative entry {value} at {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("chain is not irreducible")]
    NotIrreducible,
    #[error("chain is not ergodic")]
    NotErgodic,
    #[error("chain is not reversible")]
    NotReversible,
    #[error("stationary linear system is numerically singular")]
    SingularSystem,
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("mixing time exceeds the cap of {cap} steps")]
    CapExceeded { cap: u64 },
    #[error("stationary probability of state {index} is zero")]
    ZeroStationaryEntry { index: usize },
    #[error("laziness {alpha} is outside (0, 1)")]
    BadAlpha { alpha: f64 },
    #[error("trajectory length must be at least {min}, got {m}")]
    BadLength { m: usize, min: usize },
    #[error("cannot project an empty vector")]
    EmptyVector,
    #[error("path of length {len} is too short; need at least {min}")]
    PathTooShort { len: usize, min: usize },
    #[error("state {state} out of range for {d} states")]
    StateOutOfRange { state: usize, d: usize },
    #[error("state {state} never visited")]
    UnvisitedState { state: usize },
    #[error("accuracy {eps} is outside (0, 1)")]
    BadEpsilon { eps: f64 },
    #[error("invalid chain family spec: {0}")]
    BadSpec(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("recomputed value for {quantity} is {got}, expected {expected}")]
    CounterexampleMismatch {
        quantity: String,
        got: f64,
        expected: f64,
    },
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code for the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooSmall { .. } => "TooSmall",
            Error::NotSquare { .. } => "NotSquare",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::NonFinite { .. } => "NonFinite",
            Error::RowSumNotOne { .. } => "RowSumNotOne",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::NegativeProbability { .. } => "NegativeProbability",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NotIrreducible => "NotIrreducible",
            Error::NotErgodic => "NotErgodic",
            Error::NotReversible => "NotReversible",
            Error::SingularSystem => "SingularSystem",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::ZeroStationaryEntry { .. } => "ZeroStationaryEntry",
            Error::BadAlpha { .. } => "BadAlpha",
            Error::BadLength { .. } => "BadLength",
            Error::EmptyVector => "EmptyVector",
            Error::PathTooShort { .. } => "PathTooShort",
            Error::StateOutOfRange { .. } => "StateOutOfRange",
            Error::UnvisitedState { .. } => "UnvisitedState",
            Error::BadEpsilon { .. } => "BadEpsilon",
            Error::BadSpec(_) => "BadSpec",
            Error::BadGrid(_) => "BadGrid",
            Error::CounterexampleMismatch { .. } => "CounterexampleMismatch",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
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
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
