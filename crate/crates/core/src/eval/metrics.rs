use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::auc::{roc_auc_ovr_with, AucAverage};
use super::EvalError;
use crate::math;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_samples: usize,
    pub accuracy: f64,
    /// Indexed by class.
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Absent when fewer than two classes occur in the true labels.
    pub ovr_macro_auc: Option<f64>,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Label-based metrics. Precision and recall with an empty denominator are 0,
/// as is F1 when both are 0. Macro averages run over the classes that occur in
/// either the true or the predicted labels.
pub fn classification_metrics(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<MetricsReport, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch { labels: y_true.len(), predictions: y_pred.len() });
    }
    let mut confusion = alloc::vec![alloc::vec![0usize; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
    }
    let n = y_true.len();
    let correct: usize = (0..n_classes).map(|k| confusion[k][k]).sum();
    let mut per_class = Vec::with_capacity(n_classes);
    let (mut sp, mut sr, mut sf, mut present) = (0.0, 0.0, 0.0, 0usize);
    for k in 0..n_classes {
        let support: usize = confusion[k].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[k]).sum();
        let precision = ratio(confusion[k][k], predicted);
        let recall = ratio(confusion[k][k], support);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        if support > 0 || predicted > 0 {
            sp += precision;
            sr += recall;
            sf += f1;
            present += 1;
        }
        per_class.push(ClassMetrics { precision, recall, f1, support });
    }
    let m = present.max(1) as f64;
    Ok(MetricsReport {
        n_samples: n,
        accuracy: ratio(correct, n),
        per_class,
        macro_precision: sp / m,
        macro_recall: sr / m,
        macro_f1: sf / m,
        ovr_macro_auc: None,
        confusion,
    })
}

/// Metrics of argmax predictions plus one-vs-rest AUC from the probabilities.
pub fn evaluate_probs(y_true: &[usize], probs: &Matrix, average: AucAverage) -> Result<MetricsReport, EvalError> {
    let y_pred: Vec<usize> = probs.iter_rows().map(math::argmax).collect();
    let mut report = classification_metrics(y_true, &y_pred, probs.cols())?;
    report.ovr_macro_auc = match roc_auc_ovr_with(y_true, probs, average) {
        Ok(a) => Some(a),
        Err(EvalError::SingleClassPresent) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}
