use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DefogError {
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported or malformed image {path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("image {path} is {width}x{height}; at least 3x3 is required")]
    TooSmall { path: PathBuf, width: u32, height: u32 },
    #[error(transparent)]
    Core(#[from] defog_core::Error),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl DefogError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DefogError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, DefogError>;
