use thiserror::Error;

/// Failures of a CLI command, each tied to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in {stage}: {source}")]
    Numeric {
        stage: String,
        #[source]
        source: simloc_core::Error,
    },
    #[error("comparison failed: {0}")]
    Comparison(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn numeric(stage: impl Into<String>, source: simloc_core::Error) -> Self {
        CliError::Numeric {
            stage: stage.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Comparison(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
