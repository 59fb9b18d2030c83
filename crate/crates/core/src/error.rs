use thiserror::Error;

pub type Result<T> = std::result::Result<T, EnnError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in restart {restart}: {detail}")]
    NumericalFailure { restart: usize, detail: String },
}

impl EnnError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        EnnError::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        EnnError::Config(msg.into())
    }
}
