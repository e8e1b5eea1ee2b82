use std::path::PathBuf;

use qpreduce_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("segment length {segment} exceeds the {len} available samples")]
    Segment { segment: usize, len: usize },
    #[error("trajectories do not overlap in time")]
    Grid,
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::IrreducibleResonance(_)) => 2,
            CliError::Config(_)
            | CliError::Core(
                CoreError::InvalidInput(_)
                | CoreError::InvalidBasis(_)
                | CoreError::Commensurate { .. }
                | CoreError::Partition(_),
            ) => 3,
            CliError::Core(CoreError::ReducibilityViolation(_)) => 4,
            CliError::Core(CoreError::LinearResonance(_)) => 5,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
