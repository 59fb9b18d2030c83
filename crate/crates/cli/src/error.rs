use std::path::PathBuf;

use enn::EnnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {detail}", path.display())]
    Parse { path: PathBuf, detail: String },
    #[error(transparent)]
    Enn(#[from] EnnError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn parse(path: &std::path::Path, detail: impl ToString) -> Self {
        CliError::Parse { path: path.to_path_buf(), detail: detail.to_string() }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 3 for a numerical failure during training, 2 for anything the user can fix.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Enn(EnnError::NumericalFailure { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
