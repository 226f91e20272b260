//! Error type shared by every module in the crate.

use std::fmt;
use std::path::PathBuf;

/// Errors produced by table loading, preprocessing, model fitting and
/// report serialization.
#[derive(Debug)]
pub enum Error {
    /// File could not be opened, read or written.
    Io { path: PathBuf, source: std::io::Error },
    /// A CSV cell failed to parse as a number. Rows are 1-based data rows
    /// (the header is row 0).
    CellParse { row: usize, column: String, value: String },
    /// A column required by the operation is not present.
    MissingColumn(String),
    /// A column exists but holds no values at all.
    EmptyColumn(String),
    /// The operation requires a fully imputed column but found a hole.
    MissingValue { row: usize, column: String },
    /// The operation needs at least one row (or more; the message says).
    EmptyInput(&'static str),
    /// Two vectors that must be the same length are not.
    LengthMismatch { expected: usize, found: usize },
    /// A parameter or value is outside its valid domain.
    InvalidInput(String),
    /// The objective handed to the optimizer returned NaN or infinity.
    NonFiniteObjective { point: Vec<f64>, value: f64 },
    /// Feature importance was requested from a model that never split.
    NoSplits,
    /// Prediction input has the wrong number of feature columns.
    FeatureMismatch { expected: usize, found: usize },
    /// A saved model bundle declares a version this build does not read.
    BundleVersion { found: u32, supported: u32 },
    /// JSON (de)serialization failure.
    Json(serde_json::Error),
    /// CSV-level failure that is not a cell parse error.
    Csv(csv::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::CellParse { row, column, value } => {
                write!(f, "row {row}, column {column:?}: cannot parse {value:?} as a number")
            }
            Error::MissingColumn(name) => write!(f, "column {name:?} not found"),
            Error::EmptyColumn(name) => write!(f, "column {name:?} has no values"),
            Error::MissingValue { row, column } => {
                write!(f, "row {row}, column {column:?}: missing value (impute first)")
            }
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::InvalidInput(msg) => write!(f, "{msg}"),
            Error::NonFiniteObjective { point, value } => {
                write!(f, "objective returned non-finite value {value} at {point:?}")
            }
            Error::NoSplits => write!(f, "model contains no splits"),
            Error::FeatureMismatch { expected, found } => {
                write!(f, "feature count mismatch: model expects {expected}, input has {found}")
            }
            Error::BundleVersion { found, supported } => {
                write!(f, "bundle version {found} is not supported (this build reads {supported})")
            }
            Error::Json(e) => write!(f, "json: {e}"),
            Error::Csv(e) => write!(f, "csv: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Json(e) => Some(e),
            Error::Csv(e) => Some(e),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
