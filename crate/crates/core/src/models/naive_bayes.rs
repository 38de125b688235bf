use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{validate_inputs, ModelError};
use crate::math;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    /// Laplace smoothing.
    pub alpha: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

/// Multinomial naive Bayes over non-negative features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub log_priors: Vec<f64>,
    /// `n_classes x n_features`:
    /// `ln((sum_{i in k} x_ij + alpha) / (sum_j sum_{i in k} x_ij + alpha d))`.
    pub log_likelihoods: Matrix,
    pub alpha: f64,
}

pub fn train_naive_bayes(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
    params: &NaiveBayesParams,
) -> Result<NaiveBayesModel, ModelError> {
    let w = validate_inputs(x, y, n_classes, sample_weights)?;
    if x.as_slice().iter().any(|&v| v < 0.0) {
        return Err(ModelError::NegativeFeature);
    }
    if !(params.alpha > 0.0) {
        return Err(ModelError::InvalidParams("alpha must be positive"));
    }
    let (d, k) = (x.cols(), n_classes);
    let mut feature_sums = Matrix::zeros(k, d);
    let mut class_weight = alloc::vec![0.0; k];
    for (i, (&c, &wi)) in y.iter().zip(&w).enumerate() {
        class_weight[c] += wi;
        for (s, v) in feature_sums.row_mut(c).iter_mut().zip(x.row(i)) {
            *s += wi * v;
        }
    }
    let total: f64 = class_weight.iter().sum();
    let log_priors = class_weight.iter().map(|cw| math::safe_ln(cw / total)).collect();
    let mut log_likelihoods = Matrix::zeros(k, d);
    for c in 0..k {
        let denom: f64 = feature_sums.row(c).iter().sum::<f64>() + params.alpha * d as f64;
        for j in 0..d {
            log_likelihoods.set(c, j, math::ln((feature_sums.get(c, j) + params.alpha) / denom));
        }
    }
    Ok(NaiveBayesModel { log_priors, log_likelihoods, alpha: params.alpha })
}

impl NaiveBayesModel {
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        self.log_priors
            .iter()
            .enumerate()
            .map(|(c, lp)| lp + self.log_likelihoods.row(c).iter().zip(x).map(|(l, v)| l * v).sum::<f64>())
            .collect()
    }

    pub fn predict_row(&self, x: &[f64]) -> Vec<f64> {
        math::softmax(&self.joint_log_likelihood(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_single_terms() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        let m = train_naive_bayes(&x, &[0, 1], 2, None, &NaiveBayesParams::default()).unwrap();
        let l = |c, j| math::exp(m.log_likelihoods.get(c, j));
        assert!((l(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((l(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((l(1, 1) - 2.0 / 3.0).abs() < 1e-15);
        // prior 1/2 each, repeat of doc 0: (2/3) / (2/3 + 1/3)
        let p = m.predict_row(&[1.0, 0.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn huge_alpha_falls_back_to_priors() {
        let x = Matrix::from_rows(&[[3.0, 0.0], [0.0, 2.0], [1.0, 1.0]]);
        let m = train_naive_bayes(&x, &[0, 1, 1], 2, None, &NaiveBayesParams { alpha: 1e12 }).unwrap();
        let p = m.predict_row(&[5.0, 0.0]);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn negative_entries_rejected() {
        let x = Matrix::from_rows(&[[1.0], [-0.5]]);
        assert_eq!(
            train_naive_bayes(&x, &[0, 1], 2, None, &NaiveBayesParams::default()).unwrap_err(),
            ModelError::NegativeFeature
        );
    }
}
