//! Versioned on-disk form of a trained model plus everything needed to
//! rebuild its input features.

use std::path::Path;

use fedsignal_core::features::{AssemblyConfig, Method, Standardizer};
use fedsignal_core::models::{ModelSpec, TrainedModel};
use fedsignal_core::text::TextFeaturizer;
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    /// Serialized as `model_kind` + `parameters`.
    #[serde(flatten)]
    pub model: TrainedModel,
    pub hyperparams: ModelSpec,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub seed: u64,
    pub method: Method,
    pub assembly: AssemblyConfig,
    /// Training-split statistics applied before prediction.
    pub standardizer: Option<Standardizer>,
    /// Fitted text basis for methods with a text block.
    pub featurizer: Option<TextFeaturizer>,
}

impl ModelBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, PipelineError> {
        let b: ModelBundle = serde_json::from_str(text)
            .map_err(|e| PipelineError::Bundle { path: path.into(), message: e.to_string() })?;
        if b.format_version != BUNDLE_VERSION {
            return Err(PipelineError::Bundle {
                path: path.into(),
                message: format!("format version {} is not supported", b.format_version),
            });
        }
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Bundle { path: path.into(), message: e.to_string() })?;
        Self::from_json(&text, path)
    }
}
