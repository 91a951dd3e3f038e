use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Bad experiment name, schema violation or resource cap; nothing was run.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] noiselab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
