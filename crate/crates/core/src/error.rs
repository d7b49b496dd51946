use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) is {value}, expected -1 or +1")]
    NonBinaryEntry { row: usize, col: usize, value: i64 },

    #[error("matrix has no rows or no columns")]
    EmptyMatrix,

    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },

    #[error("score ({row}, {col}) is not finite")]
    NonFiniteScore { row: usize, col: usize },

    #[error("need at least 2 meaningful attributes to split, got {0}")]
    TooFewAttributes(usize),

    #[error("split ratio {ratio} of {n_attrs} attributes leaves one side empty")]
    DegenerateSplit { ratio: f64, n_attrs: usize },

    #[error("attribute length mismatch: {left} vs {right} images")]
    LengthMismatch { left: usize, right: usize },

    #[error("score {0} outside [0, 100]")]
    OutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {msg}")]
    ParseError { path: PathBuf, line: usize, msg: String },

    #[error("{path}: header declares {declared}, body has {found}")]
    HeaderMismatch { path: PathBuf, declared: String, found: String },

    #[error("{path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier printed by the CLI and mapped to FFI status codes.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonBinaryEntry { .. } => "NonBinaryEntry",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::RaggedRows { .. } => "RaggedRows",
            Error::NonFiniteScore { .. } => "NonFiniteScore",
            Error::TooFewAttributes(_) => "TooFewAttributes",
            Error::DegenerateSplit { .. } => "DegenerateSplit",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::OutOfRange(_) => "OutOfRange",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ParseError { .. } => "ParseError",
            Error::HeaderMismatch { .. } => "HeaderMismatch",
            Error::IoFailure { .. } => "IoFailure",
            Error::Json(_) => "ParseError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure { path: path.into(), source }
    }
}
