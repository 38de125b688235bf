//! Multinomial gradient boosting (Friedman's K-class TreeBoost).
//!
//! Each round fits one regression tree per class to the residuals
//! `r_ik = 1{y_i = k} - p_ik` using weighted variance reduction. Leaves take
//! a single Newton step
//!
//! ```text
//! gamma = (K - 1) / K * sum(w r) / sum(w |r| (1 - |r|))
//! ```
//!
//! and the learning rate is applied when scores are accumulated.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{Grower, GrowParams, MaxFeatures, ThresholdMode, Tree};
use super::{validate_training, ModelError};
use crate::math;
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

impl Default for GbdtParams {
    /// The tuned configuration reported for the baseline booster.
    fn default() -> Self {
        Self {
            n_estimators: 10,
            learning_rate: 0.01,
            max_depth: 4,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 10,
            min_samples_split: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub n_classes: usize,
    pub n_features: usize,
    /// `ln(prior_k)` from the weighted class frequencies.
    pub init_scores: Vec<f64>,
    /// `trees[round][class]`, leaf values before the learning rate.
    pub trees: Vec<Vec<Tree>>,
    pub params: GbdtParams,
    /// Weighted multinomial deviance on the training rows before the first
    /// round and after each round.
    pub train_deviance: Vec<f64>,
}

/// Weighted mean negative log-likelihood of the true classes.
pub fn multinomial_deviance(scores: &[Vec<f64>], y: &[usize], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut wsum = 0.0;
    for ((s, &c), &w) in scores.iter().zip(y).zip(weights) {
        let p = math::softmax(s);
        total -= w * math::safe_ln(p[c]);
        wsum += w;
    }
    total / wsum
}

pub fn train_gbdt(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
    params: &GbdtParams,
    seed: u64,
) -> Result<GbdtModel, ModelError> {
    let weights = validate_training(x, y, n_classes, sample_weights)?;
    if params.max_depth == 0 {
        return Err(ModelError::InvalidParams("max_depth must be at least 1"));
    }
    if !(params.learning_rate >= 0.0 && params.learning_rate.is_finite()) {
        return Err(ModelError::InvalidParams("learning_rate must be finite and non-negative"));
    }
    let n = x.rows();
    let k = n_classes;

    let wsum: f64 = weights.iter().sum();
    let mut prior = alloc::vec![0.0; k];
    for (&c, &w) in y.iter().zip(&weights) {
        prior[c] += w;
    }
    let init_scores: Vec<f64> = prior.iter().map(|p| math::safe_ln(p / wsum)).collect();

    let mut scores: Vec<Vec<f64>> = alloc::vec![init_scores.clone(); n];
    let mut train_deviance = alloc::vec![multinomial_deviance(&scores, y, &weights)];
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features.resolve(x.cols()),
        thresholds: ThresholdMode::Exhaustive,
    };
    let factor = (k as f64 - 1.0) / k as f64;

    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut residuals = alloc::vec![0.0; n];
    for round in 0..params.n_estimators {
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| math::softmax(s)).collect();
        let mut round_trees = Vec::with_capacity(k);
        for class in 0..k {
            for i in 0..n {
                residuals[i] = if y[i] == class { 1.0 } else { 0.0 } - probs[i][class];
            }
            let res = &residuals;
            let w = &weights;
            let grower = Grower {
                x,
                targets: res,
                width: 1,
                weights: w,
                params: grow,
                leaf_values: |rows: &[usize]| {
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for &i in rows {
                        let r = res[i];
                        num += w[i] * r;
                        den += w[i] * r.abs() * (1.0 - r.abs());
                    }
                    let gamma = if den.abs() < 1e-150 { 0.0 } else { factor * num / den };
                    alloc::vec![gamma]
                },
            };
            let mut tree_rng = rng::seeded(rng::derive_seed(seed, (round * k + class) as u64));
            round_trees.push(grower.grow((0..n).collect(), &mut tree_rng));
        }
        for (i, s) in scores.iter_mut().enumerate() {
            for (class, t) in round_trees.iter().enumerate() {
                s[class] += params.learning_rate * t.predict(x.row(i))[0];
            }
        }
        train_deviance.push(multinomial_deviance(&scores, y, &weights));
        trees.push(round_trees);
    }
    Ok(GbdtModel { n_classes: k, n_features: x.cols(), init_scores, trees, params: params.clone(), train_deviance })
}

impl GbdtModel {
    /// Pre-softmax scores.
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.init_scores.clone();
        for round in &self.trees {
            for (class, t) in round.iter().enumerate() {
                s[class] += self.params.learning_rate * t.predict(x)[0];
            }
        }
        s
    }

    pub fn predict_row(&self, x: &[f64]) -> Vec<f64> {
        math::softmax(&self.margins(x))
    }
}
