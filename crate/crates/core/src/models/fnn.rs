//! Feedforward network with ReLU hidden layers and a softmax output, trained
//! with Adam on class-weighted cross-entropy.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{validate_inputs, ModelError};
use crate::eval::roc_auc_ovr;
use crate::math;
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FnnConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Epochs without validation AUC improvement before stopping; 0 disables
    /// early stopping.
    pub early_stop_patience: usize,
    /// Share of the (chronologically last) training rows held out for early
    /// stopping.
    pub validation_fraction: f64,
}

impl Default for FnnConfig {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![64, 32],
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 16,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            early_stop_patience: 20,
            validation_fraction: 0.15,
        }
    }
}

/// Dense layer computing `W x + b` with `W` stored `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Self {
        Self { weights: Matrix::zeros(self.weights.rows(), self.weights.cols()), bias: alloc::vec![0.0; self.bias.len()] }
    }

    fn forward(&self, input: &[f64]) -> Vec<f64> {
        (0..self.bias.len())
            .map(|o| self.bias[o] + self.weights.row(o).iter().zip(input).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub layers: Vec<Layer>,
    /// Weighted cross-entropy over the fitting rows after each epoch.
    pub loss_history: Vec<f64>,
    /// Epoch whose parameters were kept (0 = initialisation).
    pub best_epoch: usize,
}

/// He-uniform weights, zero biases.
pub fn init_fnn(n_features: usize, n_classes: usize, hidden: &[usize], seed: u64) -> FnnModel {
    let mut r = rng::seeded(rng::derive_seed(seed, 0));
    let mut sizes = alloc::vec![n_features];
    sizes.extend_from_slice(hidden);
    sizes.push(n_classes);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = math::sqrt(6.0 / fan_in as f64);
            let data = (0..fan_in * fan_out).map(|_| r.gen_range(-limit..limit)).collect();
            Layer { weights: Matrix::from_vec(fan_out, fan_in, data), bias: alloc::vec![0.0; fan_out] }
        })
        .collect();
    FnnModel { n_classes, n_features, layers, loss_history: Vec::new(), best_epoch: 0 }
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + math::ln(z.iter().map(|v| math::exp(v - max)).sum::<f64>());
    z.iter().map(|v| v - lse).collect()
}

impl FnnModel {
    /// Pre-activation of every layer for one input.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&act);
            act = if l + 1 < self.layers.len() { z.iter().map(|v| v.max(0.0)).collect() } else { z.clone() };
            pre.push(z);
        }
        pre
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).pop().unwrap_or_default()
    }

    pub fn predict_row(&self, x: &[f64]) -> Vec<f64> {
        math::softmax(&self.logits(x))
    }

    /// Weighted mean cross-entropy over `rows` and its gradient, one `Layer`
    /// of partial derivatives per layer.
    pub fn loss_and_grad(&self, x: &Matrix, y: &[usize], weights: &[f64], rows: &[usize]) -> (f64, Vec<Layer>) {
        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        let wsum: f64 = rows.iter().map(|&i| weights[i]).sum();
        let mut loss = 0.0;
        for &i in rows {
            let input = x.row(i);
            let pre = self.forward(input);
            let last = pre.len() - 1;
            let logp = log_softmax(&pre[last]);
            let scale = weights[i] / wsum;
            loss -= scale * logp[y[i]];
            let mut delta: Vec<f64> =
                logp.iter().enumerate().map(|(c, lp)| scale * (math::exp(*lp) - if c == y[i] { 1.0 } else { 0.0 })).collect();
            for l in (0..self.layers.len()).rev() {
                let relu_in: Vec<f64>;
                let prev_act: &[f64] = if l == 0 {
                    input
                } else {
                    relu_in = pre[l - 1].iter().map(|v| v.max(0.0)).collect();
                    &relu_in
                };
                let g = &mut grads[l];
                for (o, d) in delta.iter().enumerate() {
                    g.bias[o] += d;
                    for (gw, a) in g.weights.row_mut(o).iter_mut().zip(prev_act) {
                        *gw += d * a;
                    }
                }
                if l > 0 {
                    let w = &self.layers[l].weights;
                    delta = (0..w.cols())
                        .map(|j| {
                            if pre[l - 1][j] > 0.0 {
                                delta.iter().enumerate().map(|(o, d)| d * w.get(o, j)).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        (loss, grads)
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    /// Inverse of [`FnnModel::parameters`].
    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut pos = 0;
        for l in &mut self.layers {
            let (r, c) = (l.weights.rows(), l.weights.cols());
            l.weights = Matrix::from_vec(r, c, params[pos..pos + r * c].to_vec());
            pos += r * c;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[pos..pos + nb]);
            pos += nb;
        }
    }

    fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(l.weights.as_slice());
        out.extend_from_slice(&l.bias);
    }
    out
}

/// Splits off the last rows for early stopping when they contain at least two
/// classes and leave at least one row for fitting.
fn holdout(y: &[usize], config: &FnnConfig) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = y.len();
    if config.early_stop_patience == 0 || !(config.validation_fraction > 0.0) {
        return None;
    }
    let n_val = libm::ceil(n as f64 * config.validation_fraction) as usize;
    if n_val == 0 || n_val >= n {
        return None;
    }
    let fit: Vec<usize> = (0..n - n_val).collect();
    let val: Vec<usize> = (n - n_val..n).collect();
    let first = y[val[0]];
    if val.iter().all(|&i| y[i] == first) {
        return None;
    }
    Some((fit, val))
}

pub fn train_fnn(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weights: Option<&[f64]>,
    config: &FnnConfig,
    seed: u64,
) -> Result<FnnModel, ModelError> {
    let weights = validate_inputs(x, y, n_classes, sample_weights)?;
    if x.cols() == 0 {
        return Err(ModelError::InvalidParams("the network needs at least one input feature"));
    }
    if config.batch_size == 0 || config.batch_size > x.rows() {
        return Err(ModelError::InvalidParams("batch_size must lie between 1 and the number of rows"));
    }
    if config.hidden.contains(&0) {
        return Err(ModelError::InvalidParams("hidden layers must have at least one unit"));
    }
    let mut model = init_fnn(x.cols(), n_classes, &config.hidden, seed);
    if config.epochs == 0 {
        return Ok(model);
    }
    let (fit_rows, val_rows) = match holdout(y, config) {
        Some((f, v)) => (f, Some(v)),
        None => ((0..x.rows()).collect(), None),
    };
    let batch_size = config.batch_size.min(fit_rows.len());
    let val_labels: Vec<usize> = val_rows.iter().flatten().map(|&i| y[i]).collect();

    let mut shuffle_rng = rng::seeded(rng::derive_seed(seed, 1));
    let n_params = model.parameters().len();
    let mut m = alloc::vec![0.0; n_params];
    let mut v = alloc::vec![0.0; n_params];
    let mut step = 0i32;
    let mut order = fit_rows.clone();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut since_best = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(batch_size) {
            let (_, grads) = model.loss_and_grad(x, y, &weights, batch);
            let g = flatten(&grads);
            step += 1;
            let bc1 = 1.0 - libm::pow(config.beta1, step as f64);
            let bc2 = 1.0 - libm::pow(config.beta2, step as f64);
            let mut p = model.parameters();
            for j in 0..n_params {
                m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
                v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
                p[j] -= config.learning_rate * (m[j] / bc1) / (math::sqrt(v[j] / bc2) + config.epsilon);
            }
            model.set_parameters(&p);
        }
        let (loss, _) = model.loss_and_grad(x, y, &weights, &fit_rows);
        if !loss.is_finite() || !model.is_finite() {
            return Err(ModelError::NonFiniteLoss);
        }
        model.loss_history.push(loss);

        if let Some(val) = &val_rows {
            let probs = Matrix::from_rows(&val.iter().map(|&i| model.predict_row(x.row(i))).collect::<Vec<_>>());
            let auc = roc_auc_ovr(&val_labels, &probs).unwrap_or(0.5);
            if best.as_ref().is_none_or(|(b, _, _)| auc > *b) {
                best = Some((auc, epoch, model.parameters()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= config.early_stop_patience {
                    break;
                }
            }
        }
    }
    match best {
        Some((_, epoch, params)) => {
            model.set_parameters(&params);
            model.best_epoch = epoch;
        }
        None => model.best_epoch = model.loss_history.len(),
    }
    Ok(model)
}
