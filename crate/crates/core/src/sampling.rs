//! Holdout splits, stratified folds, SMOTE and balanced class weights.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("{0} rows is too few for a holdout split (need at least 5)")]
    TooFewRows(usize),
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("k = {k} is not usable with {n} rows (need 2 <= k <= n)")]
    KTooLarge { k: usize, n: usize },
    #[error("class {0} has fewer than 2 members and cannot be oversampled")]
    ClassTooSmall(usize),
    #[error("class {0} has no members")]
    MissingClass(usize),
    #[error("features have {rows} rows but {labels} labels were given")]
    LengthMismatch { rows: usize, labels: usize },
}

/// Train/test holdout plus cross-validation folds over the training rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// `(train, validation)` row indices, both drawn from `train_indices`.
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
}

impl SplitPlan {
    /// Chronological holdout followed by stratified folds inside the training
    /// rows. `labels` covers every row.
    pub fn chronological(labels: &[usize], test_fraction: f64, k: usize, seed: u64) -> Result<Self, SamplingError> {
        let (train_indices, test_indices) = chronological_split(labels.len(), test_fraction)?;
        let train_labels: Vec<usize> = train_indices.iter().map(|&i| labels[i]).collect();
        let folds = stratified_kfold(&train_labels, k, seed)?
            .into_iter()
            .map(|(tr, va)| {
                (tr.iter().map(|&i| train_indices[i]).collect(), va.iter().map(|&i| train_indices[i]).collect())
            })
            .collect();
        Ok(Self { train_indices, test_indices, folds })
    }
}

/// The last `ceil(n * test_fraction)` rows form the test set.
pub fn chronological_split(n_rows: usize, test_fraction: f64) -> Result<(Vec<usize>, Vec<usize>), SamplingError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(SamplingError::InvalidFraction(test_fraction));
    }
    if n_rows < 5 {
        return Err(SamplingError::TooFewRows(n_rows));
    }
    // guard against 0.2 * 10 landing a hair above 2
    let n_test = libm::ceil(n_rows as f64 * test_fraction - 1e-9) as usize;
    let n_test = n_test.clamp(1, n_rows - 1);
    let cut = n_rows - n_test;
    Ok(((0..cut).collect(), (cut..n_rows).collect()))
}

/// Stratified k-fold assignment.
///
/// Each class's members are shuffled with the seeded RNG and dealt round-robin
/// across folds; the dealing position carries over from one class to the next
/// so fold sizes stay within one of each other. Returns `(train, validation)`
/// pairs with sorted indices.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>, SamplingError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(SamplingError::KTooLarge { k, n });
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = rng::seeded(seed);
    let mut fold_of = alloc::vec![0usize; n];
    let mut next = 0usize;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (va, tr): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == f);
            (tr, va)
        })
        .collect())
}

/// Output of [`smote_resample`]: original rows first, then synthetic rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub x: Matrix,
    pub y: Vec<usize>,
    /// Number of leading rows copied from the input.
    pub n_original: usize,
    /// For each synthetic row, the `(sample, neighbour)` input rows it was
    /// interpolated between.
    pub provenance: Vec<(usize, usize)>,
}

/// SMOTE: grows every class to the majority count with points
/// `x + u (x' - x)`, `x` a random member, `x'` one of its `k_neighbors`
/// nearest same-class members (Euclidean, ties to the lower row index) and
/// `u ~ U(0, 1)`.
pub fn smote_resample(x: &Matrix, y: &[usize], k_neighbors: usize, seed: u64) -> Result<Resampled, SamplingError> {
    if x.rows() != y.len() {
        return Err(SamplingError::LengthMismatch { rows: x.rows(), labels: y.len() });
    }
    let n_classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        members[c].push(i);
    }
    let majority = members.iter().map(Vec::len).max().unwrap_or(0);
    let mut out_x = x.clone();
    let mut out_y = y.to_vec();
    let mut provenance = Vec::new();
    let mut rng = rng::seeded(seed);
    for (class, rows) in members.iter().enumerate() {
        if rows.is_empty() || rows.len() == majority {
            continue;
        }
        if rows.len() < 2 {
            return Err(SamplingError::ClassTooSmall(class));
        }
        let k = k_neighbors.min(rows.len() - 1).max(1);
        let neighbours: Vec<Vec<usize>> = rows.iter().map(|&i| nearest(x, i, rows, k)).collect();
        let mut point = alloc::vec![0.0; x.cols()];
        for _ in rows.len()..majority {
            let pick = rng.gen_range(0..rows.len());
            let nb = neighbours[pick][rng.gen_range(0..k)];
            let u: f64 = rng.gen();
            let (a, b) = (x.row(rows[pick]), x.row(nb));
            for ((p, &ai), &bi) in point.iter_mut().zip(a).zip(b) {
                *p = ai + u * (bi - ai);
            }
            out_x.push_row(&point);
            out_y.push(class);
            provenance.push((rows[pick], nb));
        }
    }
    Ok(Resampled { x: out_x, y: out_y, n_original: y.len(), provenance })
}

fn nearest(x: &Matrix, i: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| {
            let dist: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (dist, j)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Balanced weights `n / (K * n_k)` for classes `0..n_classes`.
pub fn class_weights(labels: &[usize], n_classes: usize) -> Result<Vec<f64>, SamplingError> {
    let mut counts = alloc::vec![0usize; n_classes];
    for &c in labels {
        counts[c] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(SamplingError::MissingClass(missing));
    }
    let n = labels.len() as f64;
    Ok(counts.iter().map(|&c| n / (n_classes as f64 * c as f64)).collect())
}

/// Balanced weights over the classes that occur; absent classes get 0.
pub fn present_class_weights(labels: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = alloc::vec![0usize; n_classes];
    for &c in labels {
        counts[c] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    let n = labels.len() as f64;
    counts.iter().map(|&c| if c == 0 { 0.0 } else { n / (present * c as f64) }).collect()
}
