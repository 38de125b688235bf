//! Shapley attributions for the tree ensembles.
//!
//! Attributions are computed on the pre-softmax margin of each class, where
//! they add up across trees. For the booster the margin is the accumulated
//! score; for a forest it is the averaged leaf distribution. Conditional
//! expectations follow the training covers stored in the nodes
//! (path-dependent TreeSHAP), so no background data is needed.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::models::tree::CoverError;
use crate::models::{NodeKind, Tree, TrainedModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error("tree {tree}: {source}")]
    MissingCover { tree: usize, source: CoverError },
    #[error("model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} features is too many for exhaustive Shapley enumeration (max 12)")]
    TooManyFeatures(usize),
    #[error("{0} models are not tree ensembles")]
    NotATreeModel(&'static str),
}

/// Largest feature count accepted by [`brute_force_shapley`].
pub const MAX_BRUTE_FORCE_FEATURES: usize = 12;

/// Cover sums may drift by rounding; larger gaps mean broken bookkeeping.
const COVER_TOLERANCE: f64 = 1e-9;

/// A tree's contribution to the class margins: either a single output added
/// to one class or one output per class, times `scale`.
struct Term<'a> {
    tree: &'a Tree,
    class: Option<usize>,
    scale: f64,
}

struct Ensemble<'a> {
    n_classes: usize,
    n_features: usize,
    offset: Vec<f64>,
    terms: Vec<Term<'a>>,
}

impl<'a> Ensemble<'a> {
    fn of(model: &'a TrainedModel) -> Result<Self, ExplainError> {
        let e = match model {
            TrainedModel::Gbdt(m) => Ensemble {
                n_classes: m.n_classes,
                n_features: m.n_features,
                offset: m.init_scores.clone(),
                terms: m
                    .trees
                    .iter()
                    .flat_map(|round| {
                        round.iter().enumerate().map(|(k, t)| Term {
                            tree: t,
                            class: Some(k),
                            scale: m.params.learning_rate,
                        })
                    })
                    .collect(),
            },
            TrainedModel::Forest(m) => Ensemble {
                n_classes: m.n_classes,
                n_features: m.n_features,
                offset: alloc::vec![0.0; m.n_classes],
                terms: m
                    .trees
                    .iter()
                    .map(|t| Term { tree: t, class: None, scale: 1.0 / m.trees.len() as f64 })
                    .collect(),
            },
            TrainedModel::LogReg(_) => return Err(ExplainError::NotATreeModel("logreg")),
            TrainedModel::NaiveBayes(_) => return Err(ExplainError::NotATreeModel("naive_bayes")),
            TrainedModel::Fnn(_) => return Err(ExplainError::NotATreeModel("fnn")),
            TrainedModel::Prior(_) => return Err(ExplainError::NotATreeModel("prior")),
        };
        for (i, term) in e.terms.iter().enumerate() {
            term.tree.check_covers(COVER_TOLERANCE).map_err(|source| ExplainError::MissingCover { tree: i, source })?;
        }
        Ok(e)
    }

    /// Adds `scale * values` of one tree into the per-class vector `out`.
    fn accumulate(&self, term: &Term<'_>, values: &[f64], out: &mut [f64]) {
        match term.class {
            Some(k) => out[k] += term.scale * values[0],
            None => {
                for (o, v) in out.iter_mut().zip(values) {
                    *o += term.scale * v;
                }
            }
        }
    }

    fn base_values(&self) -> Vec<f64> {
        let mut base = self.offset.clone();
        for term in &self.terms {
            self.accumulate(term, &term.tree.expected_value(), &mut base);
        }
        base
    }

    fn margins(&self, x: &[f64]) -> Vec<f64> {
        let mut m = self.offset.clone();
        for term in &self.terms {
            self.accumulate(term, term.tree.predict(x), &mut m);
        }
        m
    }
}

/// Per-sample Shapley values on the class margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    /// Expected margin per class under the training covers.
    pub base_values: Vec<f64>,
    /// One `n_features x n_classes` matrix per sample.
    pub phi: Vec<Matrix>,
    /// The model's margins per sample, for checking local accuracy.
    pub margins: Vec<Vec<f64>>,
}

impl Attribution {
    /// Largest `|base + sum(phi) - margin|` over samples and classes.
    pub fn local_accuracy_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (phi, margin) in self.phi.iter().zip(&self.margins) {
            for (k, m) in margin.iter().enumerate() {
                let total: f64 = self.base_values[k] + (0..phi.rows()).map(|j| phi.get(j, k)).sum::<f64>();
                worst = worst.max((total - m).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

fn extend_path(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: Option<usize>) {
    let l = path.len();
    path.push(PathElement { feature, zero_fraction, one_fraction, weight: if l == 0 { 1.0 } else { 0.0 } });
    let lf = l as f64;
    for i in (0..l).rev() {
        let w = path[i].weight;
        path[i + 1].weight += one_fraction * w * (i as f64 + 1.0) / (lf + 1.0);
        path[i].weight = zero_fraction * w * (lf - i as f64) / (lf + 1.0);
    }
}

fn unwind_path(path: &mut Vec<PathElement>, i: usize) {
    let l = path.len() - 1;
    let lf = l as f64;
    let (o, z) = (path[i].one_fraction, path[i].zero_fraction);
    let mut n = path[l].weight;
    for j in (0..l).rev() {
        if o != 0.0 {
            let t = path[j].weight;
            path[j].weight = n * (lf + 1.0) / ((j as f64 + 1.0) * o);
            n = t - path[j].weight * z * (lf - j as f64) / (lf + 1.0);
        } else {
            path[j].weight = path[j].weight * (lf + 1.0) / (z * (lf - j as f64));
        }
    }
    for j in i..l {
        let next = path[j + 1];
        path[j].feature = next.feature;
        path[j].zero_fraction = next.zero_fraction;
        path[j].one_fraction = next.one_fraction;
    }
    path.pop();
}

fn unwound_sum(path: &[PathElement], i: usize) -> f64 {
    let l = path.len() - 1;
    let lf = l as f64;
    let (o, z) = (path[i].one_fraction, path[i].zero_fraction);
    let mut n = path[l].weight;
    let mut total = 0.0;
    for j in (0..l).rev() {
        if o != 0.0 {
            let t = n * (lf + 1.0) / ((j as f64 + 1.0) * o);
            total += t;
            n = path[j].weight - t * z * (lf - j as f64) / (lf + 1.0);
        } else {
            total += path[j].weight / z * (lf + 1.0) / (lf - j as f64);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &Tree,
    x: &[f64],
    node: usize,
    mut path: Vec<PathElement>,
    zero_fraction: f64,
    one_fraction: f64,
    feature: Option<usize>,
    phi: &mut Matrix,
) {
    extend_path(&mut path, zero_fraction, one_fraction, feature);
    match &tree.nodes[node].kind {
        NodeKind::Leaf { values } => {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let el = path[i];
                let f = el.feature.expect("only the root element lacks a feature");
                for (k, v) in values.iter().enumerate() {
                    let cur = phi.get(f, k);
                    phi.set(f, k, cur + w * (el.one_fraction - el.zero_fraction) * v);
                }
            }
        }
        NodeKind::Split { feature: f, threshold, left, right } => {
            let (hot, cold) = if x[*f] <= *threshold { (*left, *right) } else { (*right, *left) };
            let cover = tree.nodes[node].cover;
            let (mut iz, mut io) = (1.0, 1.0);
            if let Some(k) = path.iter().position(|p| p.feature == Some(*f)) {
                iz = path[k].zero_fraction;
                io = path[k].one_fraction;
                unwind_path(&mut path, k);
            }
            recurse(tree, x, hot, path.clone(), iz * tree.nodes[hot].cover / cover, io, Some(*f), phi);
            recurse(tree, x, cold, path, iz * tree.nodes[cold].cover / cover, 0.0, Some(*f), phi);
        }
    }
}

/// Path-dependent TreeSHAP for a single tree: an `n_features x n_outputs`
/// matrix of Shapley values of the leaf output.
pub fn tree_shap_single(tree: &Tree, x: &[f64], n_features: usize) -> Matrix {
    let mut phi = Matrix::zeros(n_features, tree.n_outputs());
    recurse(tree, x, 0, Vec::new(), 1.0, 1.0, None, &mut phi);
    phi
}

fn check_width(expected: usize, got: usize) -> Result<(), ExplainError> {
    if expected != got {
        return Err(ExplainError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// TreeSHAP attributions for every row of `x`.
pub fn tree_shap(
    model: &TrainedModel,
    x: &Matrix,
    feature_names: &[String],
    class_names: &[String],
) -> Result<Attribution, ExplainError> {
    let e = Ensemble::of(model)?;
    check_width(e.n_features, x.cols())?;
    let mut phi = Vec::with_capacity(x.rows());
    let mut margins = Vec::with_capacity(x.rows());
    for row in x.iter_rows() {
        let mut total = Matrix::zeros(e.n_features, e.n_classes);
        for term in &e.terms {
            let single = tree_shap_single(term.tree, row, e.n_features);
            for j in 0..e.n_features {
                let mut contrib = alloc::vec![0.0; e.n_classes];
                e.accumulate(term, single.row(j), &mut contrib);
                for (t, c) in total.row_mut(j).iter_mut().zip(&contrib) {
                    *t += c;
                }
            }
        }
        phi.push(total);
        margins.push(e.margins(row));
    }
    Ok(Attribution {
        feature_names: feature_names.to_vec(),
        class_names: class_names.to_vec(),
        base_values: e.base_values(),
        phi,
        margins,
    })
}

/// Expected output of `tree` when the features in `known` (a bit set) are
/// fixed to `x` and the rest follow the training covers.
fn conditional_expectation(tree: &Tree, x: &[f64], known: u32, node: usize) -> Vec<f64> {
    match &tree.nodes[node].kind {
        NodeKind::Leaf { values } => values.clone(),
        NodeKind::Split { feature, threshold, left, right } => {
            if known & (1 << feature) != 0 {
                let next = if x[*feature] <= *threshold { *left } else { *right };
                conditional_expectation(tree, x, known, next)
            } else {
                let c = tree.nodes[node].cover;
                let (wl, wr) = (tree.nodes[*left].cover / c, tree.nodes[*right].cover / c);
                let l = conditional_expectation(tree, x, known, *left);
                let r = conditional_expectation(tree, x, known, *right);
                l.iter().zip(&r).map(|(a, b)| wl * a + wr * b).collect()
            }
        }
    }
}

/// Exact Shapley values of the class margins for one sample by enumerating
/// all feature subsets. Returns an `n_features x n_classes` matrix.
pub fn brute_force_shapley(model: &TrainedModel, x: &[f64]) -> Result<Matrix, ExplainError> {
    let e = Ensemble::of(model)?;
    check_width(e.n_features, x.len())?;
    let d = e.n_features;
    if d > MAX_BRUTE_FORCE_FEATURES {
        return Err(ExplainError::TooManyFeatures(d));
    }
    let value = |known: u32| -> Vec<f64> {
        let mut v = e.offset.clone();
        for term in &e.terms {
            e.accumulate(term, &conditional_expectation(term.tree, x, known, 0), &mut v);
        }
        v
    };
    let values: Vec<Vec<f64>> = (0..1u32 << d).map(value).collect();
    let mut factorial = alloc::vec![1.0f64; d + 1];
    for i in 1..=d {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let mut phi = Matrix::zeros(d, e.n_classes);
    for j in 0..d {
        for s in 0..1u32 << d {
            if s & (1 << j) != 0 {
                continue;
            }
            let size = s.count_ones() as usize;
            let w = factorial[size] * factorial[d - size - 1] / factorial[d];
            let with = &values[(s | (1 << j)) as usize];
            let without = &values[s as usize];
            for k in 0..e.n_classes {
                let cur = phi.get(j, k);
                phi.set(j, k, cur + w * (with[k] - without[k]));
            }
        }
    }
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub rank: usize,
    pub feature: String,
    /// Mean `|phi|` over samples and classes.
    pub mean_abs_shap: f64,
    /// Mean `|phi|` over samples, per class.
    pub per_class: Vec<f64>,
}

/// Features ranked by mean absolute attribution, ties in name order, cut to
/// `top_n`.
pub fn shap_summary(attr: &Attribution, top_n: usize) -> Vec<SummaryRow> {
    let d = attr.feature_names.len();
    let k = attr.base_values.len();
    let n = attr.phi.len().max(1) as f64;
    let mut rows: Vec<SummaryRow> = (0..d)
        .map(|j| {
            let mut per_class = alloc::vec![0.0; k];
            for phi in &attr.phi {
                for (c, p) in per_class.iter_mut().enumerate() {
                    *p += phi.get(j, c).abs();
                }
            }
            per_class.iter_mut().for_each(|p| *p /= n);
            let mean_abs_shap = if k == 0 { 0.0 } else { per_class.iter().sum::<f64>() / k as f64 };
            SummaryRow { rank: 0, feature: attr.feature_names[j].clone(), mean_abs_shap, per_class }
        })
        .collect();
    rows.sort_by(|a, b| b.mean_abs_shap.total_cmp(&a.mean_abs_shap).then_with(|| a.feature.cmp(&b.feature)));
    rows.truncate(top_n);
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub sample: usize,
    pub feature: String,
    pub class: String,
    pub shap: f64,
    pub feature_value: f64,
}

/// One row per (sample, feature, class) for beeswarm-style plots.
/// `feature_values` supplies the values to report, typically unscaled.
pub fn shap_long(attr: &Attribution, feature_values: &Matrix) -> Vec<LongRow> {
    let mut out = Vec::new();
    for (s, phi) in attr.phi.iter().enumerate() {
        for (j, name) in attr.feature_names.iter().enumerate() {
            for (k, class) in attr.class_names.iter().enumerate() {
                out.push(LongRow {
                    sample: s,
                    feature: name.clone(),
                    class: class.clone(),
                    shap: phi.get(j, k),
                    feature_value: feature_values.get(s, j),
                });
            }
        }
    }
    out
}
