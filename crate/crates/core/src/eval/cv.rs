use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::auc::AucAverage;
use super::metrics::{evaluate_probs, MetricsReport};
use super::EvalError;
use crate::features::Standardizer;
use crate::math;
use crate::matrix::Matrix;
use crate::models::ModelSpec;
use crate::rng;
use crate::sampling::{present_class_weights, smote_resample};

/// Runs independent jobs `0..n` and returns their results in index order.
/// Implementations may run jobs concurrently but must not reorder results.
pub trait FoldExecutor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl FoldExecutor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvOptions {
    pub apply_smote: bool,
    pub smote_k: usize,
    /// Balanced per-class sample weights on the (possibly resampled) training
    /// rows.
    pub class_weighting: bool,
    /// z-score with the fold's training statistics; ignored for models that
    /// take raw features.
    pub standardize: bool,
    pub auc_average: AucAverage,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { apply_smote: false, smote_k: 5, class_weighting: true, standardize: true, auc_average: AucAverage::Macro }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: MetricsReport,
    pub n_train: usize,
    pub n_synthetic: usize,
    /// Original row indices the synthetic rows were interpolated between.
    pub synthetic_sources: Vec<(usize, usize)>,
    pub validation_rows: Vec<usize>,
}

/// Mean and population standard deviation over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Option<Self> {
        (!values.is_empty()).then(|| Self { mean: math::mean(values), std: math::population_std(values) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub accuracy: MetricSummary,
    pub macro_precision: MetricSummary,
    pub macro_recall: MetricSummary,
    pub macro_f1: MetricSummary,
    /// Over the folds whose validation rows contain at least two classes.
    pub ovr_macro_auc: Option<MetricSummary>,
}

impl CvResult {
    pub fn fold_aucs(&self) -> Vec<Option<f64>> {
        self.folds.iter().map(|f| f.metrics.ovr_macro_auc).collect()
    }

    pub fn mean_auc(&self) -> Option<f64> {
        self.ovr_macro_auc.map(|s| s.mean)
    }
}

fn run_fold(
    spec: &ModelSpec,
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    fold: usize,
    (train, val): (&[usize], &[usize]),
    options: &CvOptions,
    seed: u64,
) -> Result<FoldResult, EvalError> {
    let fold_seed = rng::derive_seed(seed, fold as u64);
    let (mut x_train, x_val) = if options.standardize && spec.wants_standardized() {
        let s = Standardizer::fit(x, train).map_err(|source| EvalError::Scaling { fold, source })?;
        (s.apply(&x.select_rows(train)), s.apply(&x.select_rows(val)))
    } else {
        (x.select_rows(train), x.select_rows(val))
    };
    let mut y_train: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let y_val: Vec<usize> = val.iter().map(|&i| y[i]).collect();

    let mut synthetic_sources = Vec::new();
    if options.apply_smote {
        let r = smote_resample(&x_train, &y_train, options.smote_k, rng::derive_seed(fold_seed, 1))
            .map_err(|source| EvalError::Resampling { fold, source })?;
        synthetic_sources = r.provenance.iter().map(|&(a, b)| (train[a], train[b])).collect();
        for &(a, b) in &synthetic_sources {
            for row in [a, b] {
                if val.contains(&row) {
                    return Err(EvalError::ProvenanceLeak { fold, row });
                }
            }
        }
        x_train = r.x;
        y_train = r.y;
    }
    let weights: Option<Vec<f64>> = options.class_weighting.then(|| {
        let per_class = present_class_weights(&y_train, n_classes);
        y_train.iter().map(|&c| per_class[c]).collect()
    });
    let model = spec
        .train(&x_train, &y_train, n_classes, weights.as_deref(), rng::derive_seed(fold_seed, 2))
        .map_err(|source| EvalError::Training { fold, source })?;
    let probs = model.predict_proba(&x_val).map_err(|source| EvalError::Training { fold, source })?;
    let metrics = evaluate_probs(&y_val, &probs, options.auc_average)?;
    Ok(FoldResult {
        fold,
        metrics,
        n_train: train.len(),
        n_synthetic: synthetic_sources.len(),
        synthetic_sources,
        validation_rows: val.to_vec(),
    })
}

/// Trains and scores `spec` on every fold. Per-fold work only ever sees the
/// fold's training rows: scaling statistics, SMOTE neighbours and class
/// weights are all computed from them.
pub fn cross_validate<E: FoldExecutor>(
    spec: &ModelSpec,
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    folds: &[(Vec<usize>, Vec<usize>)],
    options: &CvOptions,
    seed: u64,
    executor: &E,
) -> Result<CvResult, EvalError> {
    if y.len() != x.rows() {
        return Err(EvalError::LengthMismatch { labels: y.len(), predictions: x.rows() });
    }
    let results = executor.map(folds.len(), |f| {
        let (tr, va) = &folds[f];
        run_fold(spec, x, y, n_classes, f, (tr, va), options, seed)
    });
    let folds: Vec<FoldResult> = results.into_iter().collect::<Result<_, _>>()?;
    let collect = |f: fn(&MetricsReport) -> f64| -> Vec<f64> { folds.iter().map(|r| f(&r.metrics)).collect() };
    let empty = MetricSummary { mean: 0.0, std: 0.0 };
    let aucs: Vec<f64> = folds.iter().filter_map(|r| r.metrics.ovr_macro_auc).collect();
    Ok(CvResult {
        accuracy: MetricSummary::of(&collect(|m| m.accuracy)).unwrap_or(empty),
        macro_precision: MetricSummary::of(&collect(|m| m.macro_precision)).unwrap_or(empty),
        macro_recall: MetricSummary::of(&collect(|m| m.macro_recall)).unwrap_or(empty),
        macro_f1: MetricSummary::of(&collect(|m| m.macro_f1)).unwrap_or(empty),
        ovr_macro_auc: MetricSummary::of(&aucs),
        folds,
    })
}
