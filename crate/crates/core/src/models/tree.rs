//! Binary decision trees shared by the boosted and bagged ensembles.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Fraction of training weight reaching this node.
    pub cover: f64,
    #[serde(flatten)]
    pub kind: NodeKind,
}

/// Arena-allocated tree, root at index 0. Leaves hold one value per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoverError {
    #[error("node {0} has a missing or non-positive cover")]
    Missing(usize),
    #[error("node {0} cover differs from the sum of its children")]
    Inconsistent(usize),
}

impl Tree {
    pub fn constant(values: Vec<f64>) -> Self {
        Self { nodes: alloc::vec![TreeNode { cover: 1.0, kind: NodeKind::Leaf { values } }] }
    }

    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i].kind {
                NodeKind::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                NodeKind::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> &[f64] {
        match &self.nodes[self.leaf_index(x)].kind {
            NodeKind::Leaf { values } => values,
            NodeKind::Split { .. } => unreachable!(),
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.nodes
            .iter()
            .find_map(|n| match &n.kind {
                NodeKind::Leaf { values } => Some(values.len()),
                NodeKind::Split { .. } => None,
            })
            .unwrap_or(0)
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i].kind {
                NodeKind::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                NodeKind::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }

    /// Cover-weighted mean of the leaf values.
    pub fn expected_value(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_outputs()];
        let root = self.nodes[0].cover;
        for n in &self.nodes {
            if let NodeKind::Leaf { values } = &n.kind {
                for (o, v) in out.iter_mut().zip(values) {
                    *o += n.cover / root * v;
                }
            }
        }
        out
    }

    pub fn uses_feature(&self, feature: usize) -> bool {
        self.nodes.iter().any(|n| matches!(n.kind, NodeKind::Split { feature: f, .. } if f == feature))
    }

    /// Every cover is positive and finite, and each split's cover equals the
    /// sum of its children's covers to within `tol`.
    pub fn check_covers(&self, tol: f64) -> Result<(), CoverError> {
        for (i, n) in self.nodes.iter().enumerate() {
            if !(n.cover.is_finite() && n.cover > 0.0) {
                return Err(CoverError::Missing(i));
            }
            if let NodeKind::Split { left, right, .. } = n.kind {
                if (self.nodes[left].cover + self.nodes[right].cover - n.cover).abs() > tol {
                    return Err(CoverError::Inconsistent(i));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ThresholdMode {
    /// Every midpoint between consecutive distinct values.
    Exhaustive,
    /// One uniform draw between the node's min and max per feature.
    Random,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Candidate features drawn per split.
    pub max_features: usize,
    pub thresholds: ThresholdMode,
}

/// Gains smaller than this are treated as no improvement.
const MIN_GAIN: f64 = 1e-12;

/// Relative gain difference below which two candidate splits are tied, so
/// that rounding noise cannot override the earlier (lower feature, lower
/// threshold) candidate.
const TIE_TOLERANCE: f64 = 1e-10;

/// Grows a tree that maximises the reduction of `sum_j (sum_i w_i t_ij)^2 / sum_i w_i`,
/// the common form of weighted variance reduction (`t` = residual) and Gini
/// decrease (`t` = one-hot class).
pub(crate) struct Grower<'a, L> {
    pub x: &'a Matrix,
    /// Row-major `n x width` targets.
    pub targets: &'a [f64],
    pub width: usize,
    pub weights: &'a [f64],
    pub params: GrowParams,
    pub leaf_values: L,
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl<L: Fn(&[usize]) -> Vec<f64>> Grower<'_, L> {
    pub fn grow(&self, rows: Vec<usize>, rng: &mut Rng) -> Tree {
        let total: f64 = rows.iter().map(|&i| self.weights[i]).sum();
        let mut nodes = Vec::new();
        self.build(rows, 0, total, rng.gen(), &mut nodes);
        sum_covers(&mut nodes, 0);
        Tree { nodes }
    }

    /// Each node draws its randomness from a stream keyed by its position in
    /// the tree, so a node's candidates do not depend on how many draws other
    /// nodes made.
    fn build(&self, rows: Vec<usize>, depth: usize, total: f64, key: u64, nodes: &mut Vec<TreeNode>) -> usize {
        let id = nodes.len();
        let weight: f64 = rows.iter().map(|&i| self.weights[i]).sum();
        nodes.push(TreeNode { cover: weight / total, kind: NodeKind::Leaf { values: Vec::new() } });
        let split = if depth < self.params.max_depth
            && rows.len() >= self.params.min_samples_split
            && rows.len() >= 2 * self.params.min_samples_leaf.max(1)
        {
            self.best_split(&rows, &mut rng::seeded(key))
        } else {
            None
        };
        match split {
            Some(c) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x.get(i, c.feature) <= c.threshold);
                let left = self.build(l, depth + 1, total, rng::derive_seed(key, 1), nodes);
                let right = self.build(r, depth + 1, total, rng::derive_seed(key, 2), nodes);
                nodes[id].kind = NodeKind::Split { feature: c.feature, threshold: c.threshold, left, right };
            }
            None => nodes[id].kind = NodeKind::Leaf { values: (self.leaf_values)(&rows) },
        }
        id
    }

    fn score(acc: &[f64], w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        acc.iter().map(|a| a * a).sum::<f64>() / w
    }

    fn accumulate(&self, acc: &mut [f64], i: usize, sign: f64) -> f64 {
        let w = self.weights[i] * sign;
        for (a, t) in acc.iter_mut().zip(&self.targets[i * self.width..(i + 1) * self.width]) {
            *a += w * t;
        }
        w
    }

    fn best_split(&self, rows: &[usize], rng: &mut Rng) -> Option<Candidate> {
        let d = self.x.cols();
        let m = self.params.max_features.clamp(1, d);
        let mut features: Vec<usize> = if m >= d { (0..d).collect() } else { index::sample(rng, d, m).into_vec() };
        features.sort_unstable();

        let mut parent = alloc::vec![0.0; self.width];
        let mut parent_w = 0.0;
        for &i in rows {
            parent_w += self.accumulate(&mut parent, i, 1.0);
        }
        let parent_score = Self::score(&parent, parent_w);
        let min_leaf = self.params.min_samples_leaf.max(1);

        let mut best: Option<Candidate> = None;
        let consider = |gain: f64, feature: usize, threshold: f64, best: &mut Option<Candidate>| {
            if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain + TIE_TOLERANCE * b.gain.abs()) {
                *best = Some(Candidate { gain, feature, threshold });
            }
        };
        let mut order: Vec<usize> = rows.to_vec();
        for &f in &features {
            match self.params.thresholds {
                ThresholdMode::Exhaustive => {
                    order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
                    let mut left = alloc::vec![0.0; self.width];
                    let mut left_w = 0.0;
                    for pos in 0..order.len() - 1 {
                        left_w += self.accumulate(&mut left, order[pos], 1.0);
                        let (a, b) = (self.x.get(order[pos], f), self.x.get(order[pos + 1], f));
                        let n_left = pos + 1;
                        if a == b || n_left < min_leaf || order.len() - n_left < min_leaf {
                            continue;
                        }
                        let right: Vec<f64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                        let gain = Self::score(&left, left_w) + Self::score(&right, parent_w - left_w) - parent_score;
                        let mid = a + (b - a) / 2.0;
                        let threshold = if mid < b { mid } else { a };
                        consider(gain, f, threshold, &mut best);
                    }
                }
                ThresholdMode::Random => {
                    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        let v = self.x.get(i, f);
                        (lo.min(v), hi.max(v))
                    });
                    if !(lo < hi) {
                        continue;
                    }
                    let u: f64 = rng.gen();
                    let mut threshold = lo + u * (hi - lo);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    let mut left = alloc::vec![0.0; self.width];
                    let mut left_w = 0.0;
                    let mut n_left = 0;
                    for &i in rows {
                        if self.x.get(i, f) <= threshold {
                            left_w += self.accumulate(&mut left, i, 1.0);
                            n_left += 1;
                        }
                    }
                    if n_left < min_leaf || rows.len() - n_left < min_leaf {
                        continue;
                    }
                    let right: Vec<f64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                    let gain = Self::score(&left, left_w) + Self::score(&right, parent_w - left_w) - parent_score;
                    consider(gain, f, threshold, &mut best);
                }
            }
        }
        best
    }
}

/// Rewrites internal covers as the sum of their children so that the
/// parent/child identity holds exactly as computed.
fn sum_covers(nodes: &mut [TreeNode], i: usize) -> f64 {
    if let NodeKind::Split { left, right, .. } = nodes[i].kind {
        let c = sum_covers(nodes, left) + sum_covers(nodes, right);
        nodes[i].cover = c;
    }
    nodes[i].cover
}

/// Number of candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxFeatures {
    /// `ceil(sqrt(d))`.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (libm::ceil(libm::sqrt(d as f64)) as usize).max(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(n) => n.clamp(1, d.max(1)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MaxFeaturesRepr {
    Named(alloc::string::String),
    Count(usize),
}

impl Serialize for MaxFeatures {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MaxFeatures::Sqrt => s.serialize_str("sqrt"),
            MaxFeatures::All => s.serialize_str("all"),
            MaxFeatures::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for MaxFeatures {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match MaxFeaturesRepr::deserialize(d)? {
            MaxFeaturesRepr::Named(s) if s == "sqrt" => Ok(MaxFeatures::Sqrt),
            MaxFeaturesRepr::Named(s) if s == "all" || s == "none" => Ok(MaxFeatures::All),
            MaxFeaturesRepr::Named(s) => Err(serde::de::Error::custom(alloc::format!("unknown max_features {s:?}"))),
            MaxFeaturesRepr::Count(n) => Ok(MaxFeatures::Count(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;

    fn grow(x: &Matrix, targets: &[f64], params: GrowParams) -> Tree {
        let weights = vec![1.0; x.rows()];
        let g = Grower {
            x,
            targets,
            width: 1,
            weights: &weights,
            params,
            leaf_values: |rows: &[usize]| vec![rows.iter().map(|&i| targets[i]).sum::<f64>() / rows.len() as f64],
        };
        g.grow((0..x.rows()).collect(), &mut rng::seeded(0))
    }

    const FULL: GrowParams =
        GrowParams { max_depth: 3, min_samples_split: 2, min_samples_leaf: 1, max_features: 8, thresholds: ThresholdMode::Exhaustive };

    #[test]
    fn splits_at_midpoint_and_keeps_covers() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let t = grow(&x, &[0.0, 0.0, 1.0, 1.0], FULL);
        match t.nodes[0].kind {
            NodeKind::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 1.5);
            }
            _ => panic!("expected split"),
        }
        assert_eq!(t.nodes[0].cover, 1.0);
        t.check_covers(0.0).unwrap();
        assert_eq!(t.predict(&[2.9]), &[1.0]);
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn min_samples_leaf_blocks_split() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let t = grow(&x, &[0.0, 0.0, 0.0, 1.0], GrowParams { min_samples_leaf: 2, ..FULL });
        // best unrestricted split isolates the last row; with leaf minimum 2 it splits 2|2
        if let NodeKind::Split { threshold, .. } = t.nodes[0].kind {
            assert_eq!(threshold, 1.5);
        } else {
            panic!("expected split");
        }
        let t = grow(&x, &[0.0, 0.0, 0.0, 1.0], GrowParams { min_samples_split: 5, ..FULL });
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn tie_prefers_lower_feature_index() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]);
        let t = grow(&x, &[0.0, 1.0], FULL);
        assert!(matches!(t.nodes[0].kind, NodeKind::Split { feature: 0, .. }));
    }

    #[test]
    fn max_features_resolution_and_serde() {
        assert_eq!(MaxFeatures::Sqrt.resolve(500), 23);
        assert_eq!(MaxFeatures::Sqrt.resolve(16), 4);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
        assert_eq!(serde_json::to_string(&MaxFeatures::Sqrt).unwrap(), "\"sqrt\"");
        assert_eq!(serde_json::from_str::<MaxFeatures>("3").unwrap(), MaxFeatures::Count(3));
    }
}
