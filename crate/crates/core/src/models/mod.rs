//! Model families behind one train / predict-probability contract.

pub mod fnn;
pub mod forest;
pub mod gbdt;
pub mod logreg;
pub mod naive_bayes;
pub mod prior;
pub mod tree;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fnn::{train_fnn, FnnConfig, FnnModel};
pub use forest::{train_forest, ForestMode, ForestModel, ForestParams};
pub use gbdt::{train_gbdt, GbdtModel, GbdtParams};
pub use logreg::{train_logreg, LinearModel, LogRegParams};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel, NaiveBayesParams};
pub use prior::{train_prior, PriorModel};
pub use tree::{MaxFeatures, NodeKind, Tree, TreeNode};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("training labels contain fewer than two classes")]
    SingleClass,
    #[error("feature value at row {row}, column {col} is not finite")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("naive Bayes requires non-negative features")]
    NegativeFeature,
    #[error("training loss became non-finite")]
    NonFiniteLoss,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} is outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("{rows} rows but {labels} labels or weights")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("sample weights must be finite, non-negative and not all zero")]
    InvalidWeights,
    #[error("no training rows")]
    Empty,
}

/// Shape, finiteness and label checks shared by every trainer. Returns the
/// sample weights, defaulting to one per row.
pub fn validate_inputs(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
) -> Result<Vec<f64>, ModelError> {
    if x.rows() == 0 {
        return Err(ModelError::Empty);
    }
    if n_classes < 2 {
        return Err(ModelError::SingleClass);
    }
    if y.len() != x.rows() {
        return Err(ModelError::LengthMismatch { rows: x.rows(), labels: y.len() });
    }
    if let Some(&label) = y.iter().find(|&&c| c >= n_classes) {
        return Err(ModelError::LabelOutOfRange { label, n_classes });
    }
    for (i, row) in x.iter_rows().enumerate() {
        if let Some(col) = row.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteFeature { row: i, col });
        }
    }
    match sample_weights {
        None => Ok(alloc::vec![1.0; x.rows()]),
        Some(w) => {
            if w.len() != x.rows() {
                return Err(ModelError::LengthMismatch { rows: x.rows(), labels: w.len() });
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().all(|&v| v == 0.0) {
                return Err(ModelError::InvalidWeights);
            }
            Ok(w.to_vec())
        }
    }
}

/// [`validate_inputs`] plus the requirement that two classes occur.
pub fn validate_training(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
) -> Result<Vec<f64>, ModelError> {
    let w = validate_inputs(x, y, n_classes, sample_weights)?;
    if y.iter().all(|&c| c == y[0]) {
        return Err(ModelError::SingleClass);
    }
    Ok(w)
}

/// Which family to train and with what hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum ModelSpec {
    Gbdt(GbdtParams),
    Forest(ForestParams),
    #[serde(rename = "logreg")]
    LogReg(LogRegParams),
    NaiveBayes(NaiveBayesParams),
    Fnn(FnnConfig),
    /// Class-frequency baseline.
    Prior,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Gbdt(_) => "gbdt",
            ModelSpec::Forest(p) => match p.mode {
                ForestMode::Rf => "random_forest",
                ForestMode::Extra => "extra_trees",
            },
            ModelSpec::LogReg(_) => "logreg",
            ModelSpec::NaiveBayes(_) => "naive_bayes",
            ModelSpec::Fnn(_) => "fnn",
            ModelSpec::Prior => "prior",
        }
    }

    pub fn train(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        sample_weights: Option<&[f64]>,
        seed: u64,
    ) -> Result<TrainedModel, ModelError> {
        Ok(match self {
            ModelSpec::Gbdt(p) => TrainedModel::Gbdt(train_gbdt(x, y, n_classes, sample_weights, p, seed)?),
            ModelSpec::Forest(p) => TrainedModel::Forest(train_forest(x, y, n_classes, sample_weights, p, seed)?),
            ModelSpec::LogReg(p) => TrainedModel::LogReg(train_logreg(x, y, n_classes, sample_weights, p)?),
            ModelSpec::NaiveBayes(p) => {
                TrainedModel::NaiveBayes(train_naive_bayes(x, y, n_classes, sample_weights, p)?)
            }
            ModelSpec::Fnn(c) => TrainedModel::Fnn(train_fnn(x, y, n_classes, sample_weights, c, seed)?),
            ModelSpec::Prior => TrainedModel::Prior(train_prior(x, y, n_classes)?),
        })
    }

    /// Naive Bayes consumes raw non-negative counts; everything else is fed
    /// z-scored features.
    pub fn wants_standardized(&self) -> bool {
        !matches!(self, ModelSpec::NaiveBayes(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", content = "parameters", rename_all = "snake_case")]
pub enum TrainedModel {
    Gbdt(GbdtModel),
    Forest(ForestModel),
    #[serde(rename = "logreg")]
    LogReg(LinearModel),
    NaiveBayes(NaiveBayesModel),
    Fnn(FnnModel),
    Prior(PriorModel),
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Gbdt(m) => m.n_features,
            TrainedModel::Forest(m) => m.n_features,
            TrainedModel::LogReg(m) => m.weights.cols(),
            TrainedModel::NaiveBayes(m) => m.log_likelihoods.cols(),
            TrainedModel::Fnn(m) => m.n_features,
            TrainedModel::Prior(m) => m.n_features,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedModel::Gbdt(m) => m.n_classes,
            TrainedModel::Forest(m) => m.n_classes,
            TrainedModel::LogReg(m) => m.bias.len(),
            TrainedModel::NaiveBayes(m) => m.log_priors.len(),
            TrainedModel::Fnn(m) => m.n_classes,
            TrainedModel::Prior(m) => m.probs.len(),
        }
    }

    /// Whether TreeSHAP applies.
    pub fn is_tree_ensemble(&self) -> bool {
        matches!(self, TrainedModel::Gbdt(_) | TrainedModel::Forest(_))
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.n_features() {
            return Err(ModelError::DimensionMismatch { expected: self.n_features(), got: x.len() });
        }
        Ok(match self {
            TrainedModel::Gbdt(m) => m.predict_row(x),
            TrainedModel::Forest(m) => m.predict_row(x),
            TrainedModel::LogReg(m) => m.predict_row(x),
            TrainedModel::NaiveBayes(m) => m.predict_row(x),
            TrainedModel::Fnn(m) => m.predict_row(x),
            TrainedModel::Prior(m) => m.probs.clone(),
        })
    }

    /// One probability row per input row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix, ModelError> {
        if x.cols() != self.n_features() {
            return Err(ModelError::DimensionMismatch { expected: self.n_features(), got: x.cols() });
        }
        let mut out = Matrix::zeros(x.rows(), self.n_classes());
        for (i, row) in x.iter_rows().enumerate() {
            out.row_mut(i).copy_from_slice(&self.predict_row(row)?);
        }
        Ok(out)
    }
}
