use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::matrix::Matrix;

/// How per-class one-vs-rest AUCs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucAverage {
    /// Unweighted mean over the classes present.
    #[default]
    Macro,
    /// Mean weighted by class support.
    Weighted,
}

/// Mann-Whitney AUC: the share of (positive, negative) pairs the score ranks
/// correctly, ties counting one half. `None` unless both groups are non-empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the mid-rank keeps the sums integral
    let mut rank_sum2 = 0u128;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let twice_mid = (i + 1 + j + 1) as u128;
        for &o in &order[i..=j] {
            if positive[o] {
                rank_sum2 += twice_mid;
            }
        }
        i = j + 1;
    }
    let n_pos_u = n_pos as u128;
    let u2 = rank_sum2 - n_pos_u * (n_pos_u + 1);
    Some(u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Macro one-vs-rest AUC over the classes present in `y_true`.
pub fn roc_auc_ovr(y_true: &[usize], probs: &Matrix) -> Result<f64, EvalError> {
    roc_auc_ovr_with(y_true, probs, AucAverage::Macro)
}

pub fn roc_auc_ovr_with(y_true: &[usize], probs: &Matrix, average: AucAverage) -> Result<f64, EvalError> {
    if y_true.len() != probs.rows() {
        return Err(EvalError::LengthMismatch { labels: y_true.len(), predictions: probs.rows() });
    }
    let mut total = 0.0;
    let mut norm = 0.0;
    let mut present = 0;
    for k in 0..probs.cols() {
        let positive: Vec<bool> = y_true.iter().map(|&c| c == k).collect();
        let support = positive.iter().filter(|&&p| p).count();
        if support == 0 {
            continue;
        }
        present += 1;
        let column: Vec<f64> = (0..probs.rows()).map(|i| probs.get(i, k)).collect();
        let Some(auc) = binary_auc(&column, &positive) else { continue };
        let w = match average {
            AucAverage::Macro => 1.0,
            AucAverage::Weighted => support as f64,
        };
        total += w * auc;
        norm += w;
    }
    if present < 2 || norm == 0.0 {
        return Err(EvalError::SingleClassPresent);
    }
    Ok(total / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_tied() {
        assert_eq!(binary_auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]), Some(1.0));
        assert_eq!(binary_auc(&[0.5; 4], &[false, true, true, false]), Some(0.5));
        assert_eq!(binary_auc(&[0.9, 0.1], &[true, true]), None);
    }

    #[test]
    fn uniform_probs_are_half() {
        let p = Matrix::from_rows(&[[1.0 / 3.0; 3]; 6]);
        assert_eq!(roc_auc_ovr(&[0, 1, 2, 0, 1, 2], &p).unwrap(), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let p = Matrix::from_rows(&[[0.2, 0.8], [0.6, 0.4]]);
        assert_eq!(roc_auc_ovr(&[1, 1], &p).unwrap_err(), EvalError::SingleClassPresent);
    }

    #[test]
    fn weighted_average_uses_support() {
        // class 0 perfectly ranked, class 1 inverted
        let p = Matrix::from_rows(&[[0.9, 0.1], [0.8, 0.2], [0.7, 0.3], [0.1, 0.9]]);
        let y = [0, 0, 0, 1];
        let macro_auc = roc_auc_ovr(&y, &p).unwrap();
        assert_eq!(macro_auc, 1.0);
        let w = roc_auc_ovr_with(&y, &p, AucAverage::Weighted).unwrap();
        assert_eq!(w, 1.0);
    }
}
