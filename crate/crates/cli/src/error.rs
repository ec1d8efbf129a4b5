use loadcast_core::{Error, ErrorClass};
use thiserror::Error;

/// Failure of a command, carrying enough to pick the exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration values.
    #[error("config error: {0}")]
    Config(String),

    /// A pipeline stage failed.
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Error,
    },

    /// Inputs that are individually valid but do not belong together.
    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("gradient check failed: {0}")]
    GradCheck(String),
}

impl CliError {
    pub(crate) fn stage(stage: impl Into<String>) -> impl FnOnce(Error) -> CliError {
        let stage = stage.into();
        move |source| CliError::Stage { stage, source }
    }

    pub(crate) fn from_core_config(e: Error) -> CliError {
        CliError::Config(e.to_string())
    }

    /// 0 success, 1 usage/config, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Incompatible(_) => 2,
            CliError::GradCheck(_) => 3,
            CliError::Stage { source, .. } => match source.class() {
                ErrorClass::Config => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numeric => 3,
            },
        }
    }
}
