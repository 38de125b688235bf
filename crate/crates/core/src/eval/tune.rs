//! Random search over discrete hyperparameter ladders followed by a grid
//! search in the neighbourhood of the random-search winner.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvOptions, FoldExecutor, Sequential};
use super::EvalError;
use crate::math;
use crate::matrix::Matrix;
use crate::models::{ForestParams, GbdtParams, ModelSpec};
use crate::rng;

/// One tunable hyperparameter and the values it may take, in increasing
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: &[f64]) -> Self {
        Self { name: name.to_string(), values: values.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Hyperparameters not covered by an axis are taken from here.
    pub base: ModelSpec,
    pub axes: Vec<Axis>,
}

const GBDT_ESTIMATORS: [f64; 10] = [10.0, 15.0, 20.0, 30.0, 50.0, 75.0, 100.0, 150.0, 200.0, 300.0];
const GBDT_LEARNING_RATES: [f64; 7] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3];
const DEPTHS: [f64; 7] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
const LEAF_SIZES: [f64; 4] = [1.0, 5.0, 10.0, 20.0];
const SPLIT_SIZES: [f64; 4] = [2.0, 5.0, 10.0, 20.0];

impl SearchSpace {
    /// Default ladders for each family. The booster's ladders are log-spaced
    /// and contain its default configuration.
    pub fn default_for(base: &ModelSpec) -> Self {
        let axes = match base {
            ModelSpec::Gbdt(_) => alloc::vec![
                Axis::new("n_estimators", &GBDT_ESTIMATORS),
                Axis::new("learning_rate", &GBDT_LEARNING_RATES),
                Axis::new("max_depth", &DEPTHS),
                Axis::new("min_samples_leaf", &LEAF_SIZES),
                Axis::new("min_samples_split", &SPLIT_SIZES),
            ],
            ModelSpec::Forest(_) => alloc::vec![
                Axis::new("n_trees", &[25.0, 50.0, 100.0, 200.0, 300.0]),
                Axis::new("max_depth", &DEPTHS),
                Axis::new("min_samples_leaf", &LEAF_SIZES),
            ],
            ModelSpec::LogReg(_) => alloc::vec![
                Axis::new("l2", &[0.001, 0.01, 0.1, 1.0, 10.0, 100.0]),
                Axis::new("learning_rate", &[0.01, 0.03, 0.1, 0.3]),
            ],
            ModelSpec::NaiveBayes(_) => alloc::vec![Axis::new("alpha", &[0.01, 0.1, 0.3, 1.0, 3.0, 10.0])],
            ModelSpec::Fnn(_) => alloc::vec![
                Axis::new("learning_rate", &[1e-4, 3e-4, 1e-3, 3e-3, 1e-2]),
                Axis::new("epochs", &[50.0, 100.0, 200.0, 400.0]),
            ],
            ModelSpec::Prior => Vec::new(),
        };
        Self { base: base.clone(), axes }
    }

    /// Number of grid points.
    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// The model specification at the given per-axis value indices.
    pub fn spec_at(&self, point: &[usize]) -> Result<ModelSpec, EvalError> {
        let mut spec = self.base.clone();
        for (axis, &i) in self.axes.iter().zip(point) {
            set_param(&mut spec, &axis.name, axis.values[i])?;
        }
        Ok(spec)
    }

    fn value(&self, point: &[usize], name: &str) -> Option<f64> {
        self.axes.iter().position(|a| a.name == name).map(|a| self.axes[a].values[point[a]])
    }
}

fn as_count(v: f64) -> usize {
    libm::round(v) as usize
}

fn set_param(spec: &mut ModelSpec, name: &str, v: f64) -> Result<(), EvalError> {
    let family = spec.name();
    let unknown = || EvalError::UnknownAxis { family, axis: name.to_string() };
    match spec {
        ModelSpec::Gbdt(p) => {
            let GbdtParams { n_estimators, learning_rate, max_depth, min_samples_leaf, min_samples_split, .. } = p;
            match name {
                "n_estimators" => *n_estimators = as_count(v),
                "learning_rate" => *learning_rate = v,
                "max_depth" => *max_depth = as_count(v),
                "min_samples_leaf" => *min_samples_leaf = as_count(v),
                "min_samples_split" => *min_samples_split = as_count(v),
                _ => return Err(unknown()),
            }
        }
        ModelSpec::Forest(p) => {
            let ForestParams { n_trees, max_depth, min_samples_leaf, min_samples_split, .. } = p;
            match name {
                "n_trees" => *n_trees = as_count(v),
                "max_depth" => *max_depth = Some(as_count(v)),
                "min_samples_leaf" => *min_samples_leaf = as_count(v),
                "min_samples_split" => *min_samples_split = as_count(v),
                _ => return Err(unknown()),
            }
        }
        ModelSpec::LogReg(p) => match name {
            "l2" => p.l2 = v,
            "learning_rate" => p.learning_rate = v,
            "epochs" => p.epochs = as_count(v),
            _ => return Err(unknown()),
        },
        ModelSpec::NaiveBayes(p) => match name {
            "alpha" => p.alpha = v,
            _ => return Err(unknown()),
        },
        ModelSpec::Fnn(c) => match name {
            "learning_rate" => c.learning_rate = v,
            "epochs" => c.epochs = as_count(v),
            "batch_size" => c.batch_size = as_count(v),
            "early_stop_patience" => c.early_stop_patience = as_count(v),
            _ => return Err(unknown()),
        },
        ModelSpec::Prior => return Err(unknown()),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Random,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub stage: Stage,
    /// Per-axis value indices.
    pub point: Vec<usize>,
    pub params: ModelSpec,
    /// `None` for folds whose validation rows hold a single class.
    pub fold_aucs: Vec<Option<f64>>,
    /// Mean over the folds with an AUC; candidates that fail to train score
    /// `None` and never win.
    pub mean_cv_auc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best_index: usize,
    pub best_params: ModelSpec,
    pub mean_cv_auc: f64,
    pub trail: Vec<Candidate>,
}

/// AUCs closer than this count as tied.
const AUC_TIE: f64 = 1e-12;

/// Whether `a` beats `b`: higher mean AUC, then fewer estimators, then a
/// shallower depth, then the earlier candidate.
fn better(space: &SearchSpace, a: &Candidate, b: &Candidate) -> bool {
    let (Some(sa), Some(sb)) = (a.mean_cv_auc, b.mean_cv_auc) else {
        return a.mean_cv_auc.is_some() && b.mean_cv_auc.is_none();
    };
    if (sa - sb).abs() > AUC_TIE {
        return sa > sb;
    }
    for key in ["n_estimators", "n_trees", "max_depth"] {
        if let (Some(va), Some(vb)) = (space.value(&a.point, key), space.value(&b.point, key)) {
            if va != vb {
                return va < vb;
            }
        }
    }
    a.index < b.index
}

fn evaluate<E: FoldExecutor>(
    space: &SearchSpace,
    points: &[(Stage, Vec<usize>)],
    first_index: usize,
    ctx: &TuneContext<'_>,
    executor: &E,
) -> Vec<Candidate> {
    executor.map(points.len(), |j| {
        let (stage, point) = &points[j];
        let index = first_index + j;
        let params = match space.spec_at(point) {
            Ok(p) => p,
            Err(e) => {
                return Candidate {
                    index,
                    stage: *stage,
                    point: point.clone(),
                    params: space.base.clone(),
                    fold_aucs: Vec::new(),
                    mean_cv_auc: None,
                    error: Some(e.to_string()),
                }
            }
        };
        // each candidate sees the same fold seeds, so differences come from
        // the hyperparameters alone
        let cv = cross_validate(&params, ctx.x, ctx.y, ctx.n_classes, ctx.folds, ctx.options, ctx.seed, &Sequential);
        let (fold_aucs, mean_cv_auc, error) = match cv {
            Ok(r) => {
                let aucs = r.fold_aucs();
                let present: Vec<f64> = aucs.iter().flatten().copied().collect();
                let mean = (!present.is_empty()).then(|| math::mean(&present));
                (aucs, mean, None)
            }
            Err(e) => (Vec::new(), None, Some(e.to_string())),
        };
        Candidate { index, stage: *stage, point: point.clone(), params, fold_aucs, mean_cv_auc, error }
    })
}

struct TuneContext<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    folds: &'a [(Vec<usize>, Vec<usize>)],
    options: &'a CvOptions,
    seed: u64,
}

/// Two-stage search. Stage one evaluates `random_budget` grid points drawn
/// uniformly (repeats are skipped); stage two evaluates every point within
/// `grid_radius` ladder steps of the stage-one winner along each axis that
/// was not already evaluated. Candidates run through `executor`; each
/// candidate's folds run sequentially.
#[allow(clippy::too_many_arguments)]
pub fn tune<E: FoldExecutor>(
    space: &SearchSpace,
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    folds: &[(Vec<usize>, Vec<usize>)],
    options: &CvOptions,
    random_budget: usize,
    grid_radius: usize,
    seed: u64,
    executor: &E,
) -> Result<TuningResult, EvalError> {
    if random_budget == 0 || space.axes.iter().any(|a| a.values.is_empty()) {
        return Err(EvalError::EmptySpace);
    }
    let ctx = TuneContext { x, y, n_classes, folds, options, seed };
    let mut sampler = rng::seeded(rng::derive_seed(seed, 0x7475_6e65));
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stage1 = Vec::new();
    for _ in 0..random_budget {
        let point: Vec<usize> = space.axes.iter().map(|a| sampler.gen_range(0..a.values.len())).collect();
        if seen.insert(point.clone()) {
            stage1.push((Stage::Random, point));
        }
    }
    let mut trail = evaluate(space, &stage1, 0, &ctx, executor);
    let winner = pick(space, &trail).ok_or(EvalError::EmptySpace)?;

    let centre = trail[winner].point.clone();
    let mut stage2 = Vec::new();
    let mut point = alloc::vec![0usize; centre.len()];
    neighbourhood(space, &centre, grid_radius, 0, &mut point, &mut |p| {
        if seen.insert(p.to_vec()) {
            stage2.push((Stage::Grid, p.to_vec()));
        }
    });
    let more = evaluate(space, &stage2, trail.len(), &ctx, executor);
    trail.extend(more);

    let best = pick(space, &trail).ok_or(EvalError::EmptySpace)?;
    let Some(mean_cv_auc) = trail[best].mean_cv_auc else {
        let reason = trail.iter().find_map(|c| c.error.clone()).unwrap_or_else(|| "no fold produced an AUC".to_string());
        return Err(EvalError::AllCandidatesFailed(reason));
    };
    Ok(TuningResult { best_index: best, best_params: trail[best].params.clone(), mean_cv_auc, trail })
}

fn pick(space: &SearchSpace, trail: &[Candidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in trail.iter().enumerate() {
        if best.is_none_or(|b| better(space, c, &trail[b])) {
            best = Some(i);
        }
    }
    best
}

/// Cartesian box of ladder indices `centre ± radius`, clipped to each axis.
fn neighbourhood(
    space: &SearchSpace,
    centre: &[usize],
    radius: usize,
    axis: usize,
    point: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if axis == centre.len() {
        emit(point);
        return;
    }
    let lo = centre[axis].saturating_sub(radius);
    let hi = (centre[axis] + radius).min(space.axes[axis].values.len() - 1);
    for i in lo..=hi {
        point[axis] = i;
        neighbourhood(space, centre, radius, axis + 1, point, emit);
    }
}
