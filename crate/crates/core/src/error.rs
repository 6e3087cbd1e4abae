use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("unknown name: {0}")]
    Lookup(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("time budget exhausted: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
