use thiserror::Error;

/// Errors raised across ingestion, clustering, fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header at line {line}: {message}")]
    Header { line: usize, message: String },

    #[error("row {row}: expected {expected} values, found {found}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: missing value in column `{column}`")]
    MissingValue { row: usize, column: String },

    #[error("row {row}: cannot parse `{value}` in numeric column `{column}`")]
    Numeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column `{column}` must hold exactly two classes, found {found}: {classes:?}")]
    NotBinary {
        column: String,
        found: usize,
        classes: Vec<String>,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("all merge heights are zero; the cut threshold is undefined")]
    DegenerateCut,

    #[error("both classes are required, only class {0} is present")]
    SingleClass(u8),

    #[error("minority class too small: {found} instances, need at least {required}")]
    TooFewMinority { found: usize, required: usize },

    #[error("dataset `{dataset}` has {minority} minority instances, fewer than {folds} folds")]
    TooFewForFolds {
        dataset: String,
        minority: usize,
        folds: usize,
    },

    #[error("AUC is undefined when only one class is present")]
    UndefinedAuc,

    #[error("score table is incomplete, missing cells: {}", .0.join("; "))]
    IncompleteTable(Vec<String>),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("feature layout mismatch: model expects {expected:?}, data has {found:?}")]
    FeatureMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
