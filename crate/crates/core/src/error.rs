use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("negative off-diagonal weight {weight} at ({row}, {col}); -L would not generate a Markov chain")]
    NegativeOffDiagonal { row: usize, col: usize, weight: f64 },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("duplicate entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("matrix is not symmetric: a[{row},{col}] = {upper} but a[{col},{row}] = {lower}")]
    Asymmetric { row: usize, col: usize, upper: f64, lower: f64 },

    #[error("negative exit rate {0}")]
    NegativeRate(f64),

    #[error("node {0} is isolated and has no jump kernel")]
    IsolatedNode(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense oracle cap exceeded: n = {n} > cap = {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("matrix exponential overflow (scaled norm {0})")]
    ExpmOverflow(f64),

    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
