use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnsfsError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("row {row}, column {column}: invalid value {value:?}")]
    InvalidLevel { row: usize, column: String, value: String },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ensfs_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl EnsfsError {
    /// Usage and configuration problems, as opposed to failures while running.
    pub fn is_config_error(&self) -> bool {
        matches!(self, EnsfsError::Config(_) | EnsfsError::Parse { .. })
            || matches!(
                self,
                EnsfsError::Core(ensfs_core::Error::InvalidParameter(_) | ensfs_core::Error::InfeasibleSpec(_) | ensfs_core::Error::UnknownFeatureName(_))
            )
    }
}

pub type Result<T, E = EnsfsError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &std::path::Path, source: std::io::Error) -> EnsfsError {
    if source.kind() == std::io::ErrorKind::NotFound {
        EnsfsError::FileNotFound(path.to_path_buf())
    } else {
        EnsfsError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
