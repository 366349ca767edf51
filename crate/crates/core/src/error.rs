use thiserror::Error;

/// Errors raised by parameter validation, the closed-form evaluators and the
/// Monte Carlo drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} out of range: got {value}, expected {expected}")]
    OutOfRange {
        what: &'static str,
        value: String,
        expected: String,
    },

    #[error("closed-form series support at most {max} antennas, got {requested}")]
    UnsupportedAntennas { requested: usize, max: usize },

    #[error("expected {expected} projection powers, got {got}")]
    ProjectionCount { expected: usize, got: usize },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub(crate) fn out_of_range(
    what: &'static str,
    value: impl ToString,
    expected: impl ToString,
) -> Error {
    Error::OutOfRange {
        what,
        value: value.to_string(),
        expected: expected.to_string(),
    }
}
