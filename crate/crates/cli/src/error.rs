use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or flags; nothing was run.
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Feature(#[from] levyjump::features::FeatureError),
    #[error(transparent)]
    Study(#[from] levyjump::study::StudyError),
    #[error(transparent)]
    Pipeline(#[from] levyjump::pipeline::PipelineError),
    #[error(transparent)]
    Bns(#[from] levyjump::bns::BnsError),
    #[error(transparent)]
    Levy(#[from] levyjump::levy::LevyError),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            _ => 1,
        }
    }
}
