use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{validate_inputs, ModelError};
use crate::math;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    /// L2 strength on the weights; biases are not penalised.
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self { l2: 1.0, learning_rate: 0.1, epochs: 500 }
    }
}

/// Multinomial logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// `n_classes x n_features`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub l2: f64,
}

/// Full-batch gradient descent on the weighted mean cross-entropy plus
/// `(l2 / 2) ||W||^2`, starting from zero.
///
/// The penalty is applied as the proximal step `W <- (W - lr g) / (1 + lr l2)`,
/// which shares its fixed points with plain gradient descent and stays stable
/// for arbitrarily large `l2`.
pub fn train_logreg(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
    params: &LogRegParams,
) -> Result<LinearModel, ModelError> {
    let w = validate_inputs(x, y, n_classes, sample_weights)?;
    let (n, d, k) = (x.rows(), x.cols(), n_classes);
    let wsum: f64 = w.iter().sum();
    let mut model = LinearModel { weights: Matrix::zeros(k, d), bias: alloc::vec![0.0; k], l2: params.l2 };
    let shrink = 1.0 / (1.0 + params.learning_rate * params.l2);
    let mut grad_b = alloc::vec![0.0; k];
    let mut p = alloc::vec![0.0; k];
    for _ in 0..params.epochs {
        let mut grad_w = Matrix::zeros(k, d);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for i in 0..n {
            math::softmax_into(&model.scores(x.row(i)), &mut p);
            loss -= w[i] * math::safe_ln(p[y[i]]);
            for c in 0..k {
                let e = w[i] * (p[c] - if y[i] == c { 1.0 } else { 0.0 }) / wsum;
                grad_b[c] += e;
                for (g, xv) in grad_w.row_mut(c).iter_mut().zip(x.row(i)) {
                    *g += e * xv;
                }
            }
        }
        if !(loss / wsum).is_finite() {
            return Err(ModelError::NonFiniteLoss);
        }
        for c in 0..k {
            model.bias[c] -= params.learning_rate * grad_b[c];
            for (wv, g) in model.weights.row_mut(c).iter_mut().zip(grad_w.row(c)) {
                *wv = (*wv - params.learning_rate * g) * shrink;
            }
        }
        if !model.weights.is_finite() || model.bias.iter().any(|b| !b.is_finite()) {
            return Err(ModelError::NonFiniteLoss);
        }
    }
    Ok(model)
}

impl LinearModel {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        (0..self.bias.len())
            .map(|c| self.bias[c] + self.weights.row(c).iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn predict_row(&self, x: &[f64]) -> Vec<f64> {
        math::softmax(&self.scores(x))
    }
}
