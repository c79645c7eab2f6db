use thiserror::Error;

/// Errors raised by every estimation and testing routine in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error at row {row}, column '{column}': {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },

    #[error("duplicate year {0}")]
    DuplicateYear(i64),

    #[error("domain error in series '{series}' at year {year}: {message}")]
    Domain {
        series: String,
        year: i64,
        message: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported integration order: {0}")]
    UnsupportedOrder(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("normalization requires reordering: {0}")]
    ReorderRequired(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
