//! Random forests and extremely randomised trees with Gini splits.

use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{Grower, GrowParams, MaxFeatures, ThresholdMode, Tree};
use super::{validate_inputs, ModelError};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestMode {
    /// Bootstrap rows, best threshold among sampled features.
    Rf,
    /// All rows, one random threshold per sampled feature.
    Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub mode: ForestMode,
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            mode: ForestMode::Rf,
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub params: ForestParams,
    /// Leaves hold normalised class distributions.
    pub trees: Vec<Tree>,
}

/// Trains a forest. Data in which only one of the `n_classes` occurs is
/// accepted and predicts that class with probability one.
pub fn train_forest(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    let base_weights = validate_inputs(x, y, n_classes, sample_weights)?;
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParams("n_trees must be at least 1"));
    }
    let n = x.rows();
    let k = n_classes;
    let mut onehot = alloc::vec![0.0; n * k];
    for (i, &c) in y.iter().enumerate() {
        onehot[i * k + c] = 1.0;
    }
    let grow = GrowParams {
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        min_samples_split: params.min_samples_split.max(2),
        min_samples_leaf: params.min_samples_leaf.max(1),
        max_features: params.max_features.resolve(x.cols()),
        thresholds: match params.mode {
            ForestMode::Rf => ThresholdMode::Exhaustive,
            ForestMode::Extra => ThresholdMode::Random,
        },
    };
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut r = rng::seeded(rng::derive_seed(seed, t as u64));
        let weights: Vec<f64> = match params.mode {
            ForestMode::Rf => {
                let mut counts = alloc::vec![0u32; n];
                for _ in 0..n {
                    counts[r.gen_range(0..n)] += 1;
                }
                counts.iter().zip(&base_weights).map(|(&c, &w)| c as f64 * w).collect()
            }
            ForestMode::Extra => base_weights.clone(),
        };
        let rows: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
        let w = &weights;
        let grower = Grower {
            x,
            targets: &onehot,
            width: k,
            weights: w,
            params: grow,
            leaf_values: |rows: &[usize]| {
                let mut hist = alloc::vec![0.0; k];
                for &i in rows {
                    hist[y[i]] += w[i];
                }
                let total: f64 = hist.iter().sum();
                hist.iter_mut().for_each(|h| *h /= total);
                hist
            },
        };
        trees.push(grower.grow(rows, &mut r));
    }
    Ok(ForestModel { n_classes: k, n_features: x.cols(), params: params.clone(), trees })
}

impl ForestModel {
    /// Mean of the per-tree leaf distributions; also the forest's margin.
    pub fn predict_row(&self, x: &[f64]) -> Vec<f64> {
        let mut p = alloc::vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, v) in p.iter_mut().zip(t.predict(x)) {
                *a += v;
            }
        }
        let n = self.trees.len() as f64;
        p.iter_mut().for_each(|a| *a /= n);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn data() -> (Matrix, Vec<usize>) {
        let x = Matrix::from_rows(&[[0.0, 3.0], [0.5, 2.0], [1.0, 2.5], [3.0, 0.0], [3.5, 0.2], [4.0, 1.0], [4.2, 0.3]]);
        (x, vec![0, 0, 0, 1, 1, 1, 1])
    }

    #[test]
    fn depth_zero_predicts_class_frequencies() {
        let (x, y) = data();
        let p = ForestParams { mode: ForestMode::Extra, n_trees: 1, max_depth: Some(0), ..Default::default() };
        let m = train_forest(&x, &y, 2, None, &p, 3).unwrap();
        for row in x.iter_rows() {
            let pr = m.predict_row(row);
            assert!((pr[0] - 3.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_class_predicts_certainty() {
        let (x, _) = data();
        for mode in [ForestMode::Rf, ForestMode::Extra] {
            let p = ForestParams { mode, n_trees: 5, ..Default::default() };
            let m = train_forest(&x, &[2; 7], 3, None, &p, 0).unwrap();
            assert_eq!(m.predict_row(&[9.0, 9.0]), vec![0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = data();
        for mode in [ForestMode::Rf, ForestMode::Extra] {
            let p = ForestParams { mode, n_trees: 7, ..Default::default() };
            assert_eq!(train_forest(&x, &y, 2, None, &p, 9).unwrap(), train_forest(&x, &y, 2, None, &p, 9).unwrap());
        }
    }

    #[test]
    fn separates_clusters_and_covers_are_consistent() {
        let (x, y) = data();
        for mode in [ForestMode::Rf, ForestMode::Extra] {
            let p = ForestParams { mode, n_trees: 25, ..Default::default() };
            let m = train_forest(&x, &y, 2, None, &p, 4).unwrap();
            assert!(m.predict_row(&[0.2, 2.8])[0] > 0.5);
            assert!(m.predict_row(&[4.1, 0.1])[1] > 0.5);
            for t in &m.trees {
                t.check_covers(1e-12).unwrap();
                assert!((t.nodes[0].cover - 1.0).abs() < 1e-12);
            }
        }
    }
}
