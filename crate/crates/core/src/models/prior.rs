use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{validate_inputs, ModelError};

/// Baseline that ignores the features and predicts the training class
/// frequencies. Sample weights are ignored so the baseline keeps predicting
/// the majority class under balanced weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorModel {
    pub n_features: usize,
    pub probs: Vec<f64>,
}

pub fn train_prior(x: &crate::Matrix, y: &[usize], n_classes: usize) -> Result<PriorModel, ModelError> {
    validate_inputs(x, y, n_classes, None)?;
    let mut probs = alloc::vec![0.0; n_classes];
    for &c in y {
        probs[c] += 1.0;
    }
    probs.iter_mut().for_each(|p| *p /= y.len() as f64);
    Ok(PriorModel { n_features: x.cols(), probs })
}
