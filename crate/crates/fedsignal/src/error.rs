use std::path::PathBuf;

use fedsignal_core::eval::EvalError;
use fedsignal_core::explain::ExplainError;
use fedsignal_core::features::FeatureError;
use fedsignal_core::models::ModelError;
use fedsignal_core::sampling::SamplingError;
use fedsignal_core::text::TextError;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::{FredError, IngestError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("series {series}: {source}")]
    Fred { series: String, source: FredError },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("model was trained on different features: {0}")]
    ModelFeatureMismatch(String),
    #[error("cannot load model {path}: {message}")]
    Bundle { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Threads(String),
}

/// The single line written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorLine<'a> {
    pub error: &'a str,
    pub message: String,
    pub exit_code: i32,
}

impl PipelineError {
    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Output { path: path.into(), source }
    }

    /// 2 for configuration or input validation, 3 for external I/O, 1 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::ModelFeatureMismatch(_)
            | PipelineError::Bundle { .. }
            | PipelineError::Text(_)
            | PipelineError::Sampling(_) => 2,
            PipelineError::Ingest(e) if e.is_io() => 3,
            PipelineError::Ingest(_) => 2,
            PipelineError::Fred { source: FredError::MissingApiKey | FredError::Auth(_), .. } => 2,
            PipelineError::Fred { .. } | PipelineError::Output { .. } => 3,
            PipelineError::Feature(FeatureError::Text(_)) => 1,
            PipelineError::Feature(_) => 2,
            PipelineError::Eval(_) | PipelineError::Model(_) | PipelineError::Explain(_) | PipelineError::Threads(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Ingest(_) => "ingest",
            PipelineError::Fred { source: FredError::MissingApiKey, .. } => "missing_api_key",
            PipelineError::Fred { .. } => "fred",
            PipelineError::Feature(FeatureError::MissingModality { .. }) => "missing_modality",
            PipelineError::Feature(FeatureError::NoMeetingsInRange) => "no_meetings_in_range",
            PipelineError::Feature(_) => "features",
            PipelineError::Text(_) => "text",
            PipelineError::Sampling(_) => "sampling",
            PipelineError::Eval(_) => "eval",
            PipelineError::Model(_) => "model",
            PipelineError::Explain(_) => "explain",
            PipelineError::ModelFeatureMismatch(_) => "model_feature_mismatch",
            PipelineError::Bundle { .. } => "bundle",
            PipelineError::Output { .. } => "output",
            PipelineError::Threads(_) => "internal",
        }
    }

    pub fn to_json_line(&self) -> String {
        let line = ErrorLine { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string(&line).expect("error line serializes")
    }
}
