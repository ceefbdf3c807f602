use std::path::PathBuf;

use orbitgauge_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 success, 1 IO, 2 precondition or bad input, 3 budget refusal, 4 audit failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Budget { .. }) => 3,
            CliError::Core(CoreError::Audit(_)) | CliError::Failed(_) => 4,
            CliError::Core(_) | CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(CoreError::precondition("x")).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::unsupported("x")).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::budget("x", Some(3))).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::audit("x")).exit_code(), 4);
        assert_eq!(CliError::config("x").exit_code(), 2);
        assert_eq!(CliError::io("p", std::io::Error::other("x")).exit_code(), 1);
    }
}
