use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty space")]
    EmptySpace,
    #[error("parameter error: {0}")]
    Param(String),
    #[error("budget exceeded: need {needed}, budget {budget} ({hint})")]
    Budget {
        needed: u128,
        budget: u128,
        hint: String,
    },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("non-monotone classification: {0}")]
    NonMonotone(String),
    #[error("config error at line {line} ({field}): {msg}")]
    Config {
        field: String,
        line: usize,
        msg: String,
    },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Param(msg.into()))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
