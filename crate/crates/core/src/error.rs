use thiserror::Error;

/// Errors raised by the tail-risk toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("record {record}: {reason}")]
    Parse { record: usize, reason: String },

    #[error("record {record}: level {level} is not strictly positive")]
    NonPositiveLevel { record: usize, level: f64 },

    #[error("duplicate date {date} (record {record})")]
    DuplicateDate { record: usize, date: String },

    #[error("insufficient data: {what} needs at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("split boundary {boundary} leaves the {side} period empty")]
    EmptySplit {
        boundary: String,
        side: &'static str,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate tail ({side}): the top {m} values are identical, tail index undefined")]
    DegenerateTail { side: String, m: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
