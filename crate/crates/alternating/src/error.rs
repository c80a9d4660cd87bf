use std::path::PathBuf;

use alternating_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 2 for configuration and input-shape problems, 3 for numerical
    /// failures, 1 for everything else (IO, malformed files).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Core(e) => match e {
                CoreError::InvalidConfig(_) | CoreError::InsufficientData { .. } | CoreError::DimensionMismatch { .. } => 2,
                CoreError::Singular | CoreError::NumericalBreakdown | CoreError::NearZeroTarget { .. } => 3,
            },
            Error::Io { .. } | Error::Csv { .. } | Error::Format { .. } | Error::Json(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Error {
        let path = path.into();
        move |source| Error::Csv { path, source }
    }
}
