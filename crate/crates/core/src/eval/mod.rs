//! Metrics, cross-validation and the two-stage hyperparameter search.

pub mod auc;
pub mod cv;
pub mod metrics;
pub mod tune;

use thiserror::Error;

pub use auc::{binary_auc, roc_auc_ovr, roc_auc_ovr_with, AucAverage};
pub use cv::{cross_validate, CvOptions, CvResult, FoldExecutor, FoldResult, MetricSummary, Sequential};
pub use metrics::{classification_metrics, evaluate_probs, ClassMetrics, MetricsReport};
pub use tune::{tune, Axis, Candidate, SearchSpace, Stage, TuningResult};

use crate::features::FeatureError;
use crate::models::ModelError;
use crate::sampling::SamplingError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("only one class is present in the true labels")]
    SingleClassPresent,
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { labels: usize, predictions: usize },
    #[error("the search space is empty")]
    EmptySpace,
    #[error("unknown hyperparameter `{axis}` for {family}")]
    UnknownAxis { family: &'static str, axis: alloc::string::String },
    #[error("no candidate could be scored: {0}")]
    AllCandidatesFailed(alloc::string::String),
    #[error("fold {fold}: {source}")]
    Training { fold: usize, source: ModelError },
    #[error("fold {fold}: {source}")]
    Resampling { fold: usize, source: SamplingError },
    #[error("fold {fold}: {source}")]
    Scaling { fold: usize, source: FeatureError },
    #[error("fold {fold}: synthetic row derived from validation row {row}")]
    ProvenanceLeak { fold: usize, row: usize },
}
