//! The subcommands: data loading, feature preparation, training, evaluation,
//! explanation and artifact emission.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use fedsignal_core::eval::{
    cross_validate, evaluate_probs, tune, CvResult, MetricSummary, MetricsReport, SearchSpace, TuningResult,
};
use fedsignal_core::explain::{shap_long, shap_summary, tree_shap, SummaryRow};
use fedsignal_core::features::{
    align_documents_to_meetings, assemble_feature_matrix, assemble_meetings, eligible_meetings, label_decision,
    AssemblyInputs, FeatureError, FeatureMatrix, MeetingSpec, Method, Standardizer, LABEL_EPSILON,
};
use fedsignal_core::models::{ModelSpec, TrainedModel};
use fedsignal_core::rng::derive_seed;
use fedsignal_core::sampling::{chronological_split, present_class_weights, smote_resample, SplitPlan};
use fedsignal_core::text::{
    clean_and_tokenize, corpus_stats, score_lm_sentiment, LmTermBasis, Lexicon, TextError, TextFeaturizer,
    TokenizedDocument, TOP_WORDS,
};
use fedsignal_core::{Class, DecisionRecord, DocumentRecord, FinbertProbRecord, MacroSeries, Matrix};
use serde::{Deserialize, Serialize};

use crate::bundle::{ModelBundle, BUNDLE_VERSION};
use crate::config::PipelineConfig;
use crate::error::PipelineError;
use crate::exec::RayonExecutor;
use crate::ingest::{
    fetch_fred_series, finbert_by_doc, load_decisions, load_documents, load_finbert_probs, load_lexicon,
    load_macro_dir, load_stopwords, write_macro_csv, FredClient, FredError, FredOptions,
};
use crate::output::{
    write_confusion_csv, write_feature_csv, write_file, write_json, write_lm_csv, write_shap_long_csv,
    write_shap_summary_csv, LmRow,
};

/// RNG stream of the model refit on the whole training split.
const FINAL_STREAM: u64 = 0x6669_6e61_6c;
/// Features listed per prediction.
const PREDICT_TOP_SHAP: usize = 5;

pub fn class_names() -> Vec<String> {
    Class::ALL.iter().map(|c| c.name().to_string()).collect()
}

/// Everything read from disk for one method.
#[derive(Debug, Clone, Default)]
pub struct LoadedData {
    pub macro_series: Vec<MacroSeries>,
    pub decisions: Vec<DecisionRecord>,
    pub documents: Vec<DocumentRecord>,
    pub finbert: Option<BTreeMap<String, FinbertProbRecord>>,
    pub lexicon: Option<Lexicon>,
    pub stopwords: BTreeSet<String>,
}

impl LoadedData {
    fn inputs<'a>(
        &'a self,
        tokenized: Option<&'a BTreeMap<String, TokenizedDocument>>,
        featurizer: Option<&'a TextFeaturizer>,
    ) -> AssemblyInputs<'a> {
        AssemblyInputs {
            macro_series: &self.macro_series,
            decisions: &self.decisions,
            documents: &self.documents,
            tokenized,
            featurizer,
            finbert: self.finbert.as_ref(),
        }
    }
}

/// Validates the config for `method` and loads what it needs.
pub fn load_data(cfg: &PipelineConfig, method: Method) -> Result<LoadedData, PipelineError> {
    cfg.validate(method)?;
    let d = &cfg.data;
    let mut data = LoadedData { decisions: load_decisions(&cfg.require(&d.decisions, "decisions")?)?, ..Default::default() };
    if method.uses_macro() {
        data.macro_series = load_macro_dir(&cfg.require(&d.macro_dir, "macro_dir")?, &cfg.macro_ids(), &d.daily_series)?;
    }
    if method.uses_text() || method.uses_finbert() {
        data.documents = load_documents(&cfg.require(&d.documents, "documents")?)?;
    }
    if method.uses_finbert() {
        data.finbert = Some(finbert_by_doc(load_finbert_probs(&cfg.require(&d.finbert, "finbert")?)?)?);
    }
    if method.uses_text() {
        let negators = cfg.optional(&d.negators, "negators")?;
        let lexicon = load_lexicon(&cfg.require(&d.lexicon, "lexicon")?, negators.as_deref())?;
        data.lexicon = Some(lexicon.restrict(&cfg.text.categories));
    }
    data.stopwords = load_stopword_set(cfg, data.lexicon.as_ref())?;
    Ok(data)
}

/// Stopwords never remove negators or lexicon words.
fn load_stopword_set(cfg: &PipelineConfig, lexicon: Option<&Lexicon>) -> Result<BTreeSet<String>, PipelineError> {
    let mut stop = match cfg.optional(&cfg.data.stopwords, "stopwords")? {
        Some(p) => load_stopwords(&p)?,
        None => BTreeSet::new(),
    };
    if let Some(lex) = lexicon {
        let keep = lex.all_words();
        stop.retain(|w| !keep.contains(w.as_str()) && !lex.is_negator(w));
    }
    Ok(stop)
}

/// Cleans every document; ones with nothing left are skipped and reported.
pub fn tokenize_all(
    docs: &[DocumentRecord],
    stopwords: &BTreeSet<String>,
) -> Result<(BTreeMap<String, TokenizedDocument>, Vec<String>), PipelineError> {
    let mut out = BTreeMap::new();
    let mut skipped = Vec::new();
    for d in docs {
        match clean_and_tokenize(d, stopwords) {
            Ok(t) => {
                out.insert(d.doc_id.clone(), t);
            }
            Err(TextError::EmptyAfterCleaning(_)) => skipped.push(d.doc_id.clone()),
            Err(e) => return Err(e.into()),
        }
    }
    Ok((out, skipped))
}

/// Assembled features, labels and the chronological split plan.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub method: Method,
    pub matrix: FeatureMatrix,
    pub y: Vec<usize>,
    pub plan: SplitPlan,
    pub featurizer: Option<TextFeaturizer>,
    pub skipped_docs: Vec<String>,
}

/// Builds the feature matrix for `cfg.method`. The text basis is fitted only
/// on documents dated up to the last training meeting.
pub fn prepare(cfg: &PipelineConfig, data: &LoadedData) -> Result<Prepared, PipelineError> {
    let method = cfg.method;
    let meetings = eligible_meetings(method, &data.inputs(None, None), &cfg.features)?;
    if meetings.is_empty() {
        return Err(FeatureError::NoMeetingsInRange.into());
    }
    let (train, _) = chronological_split(meetings.len(), cfg.split.test_fraction)?;
    let cutoff = meetings[*train.last().expect("split leaves training rows")];

    let (tokenized, skipped) = if method.uses_text() {
        tokenize_all(&data.documents, &data.stopwords)?
    } else {
        (BTreeMap::new(), Vec::new())
    };
    let featurizer = match &data.lexicon {
        Some(lex) if method.uses_text() => {
            let train_docs: Vec<TokenizedDocument> = data
                .documents
                .iter()
                .filter(|d| d.date <= cutoff)
                .filter_map(|d| tokenized.get(&d.doc_id).cloned())
                .collect();
            let t = &cfg.text;
            Some(TextFeaturizer::fit(
                &train_docs,
                lex.clone(),
                t.max_features,
                t.negation_window,
                t.top_terms,
                t.categories.clone(),
            )?)
        }
        _ => None,
    };
    let tok = method.uses_text().then_some(&tokenized);
    let matrix = assemble_feature_matrix(method, &data.inputs(tok, featurizer.as_ref()), &cfg.features)?;
    debug_assert_eq!(matrix.meeting_dates, meetings);
    let y = matrix.label_indices();
    let plan = SplitPlan::chronological(&y, cfg.split.test_fraction, cfg.split.folds, cfg.seed)?;
    Ok(Prepared { method, matrix, y, plan, featurizer, skipped_docs: skipped })
}

/// A model refit on the full training split.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: TrainedModel,
    pub standardizer: Option<Standardizer>,
    pub n_synthetic: usize,
}

impl Fitted {
    pub fn scale(&self, x: &Matrix) -> Matrix {
        match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.clone(),
        }
    }
}

/// Same treatment as a CV fold: scaling, optional SMOTE and class weights
/// all from the training rows.
pub fn fit_final(cfg: &PipelineConfig, x: &Matrix, y: &[usize], train: &[usize]) -> Result<Fitted, PipelineError> {
    let seed = derive_seed(cfg.seed, FINAL_STREAM);
    let standardizer = if cfg.cv.standardize && cfg.model.wants_standardized() {
        Some(Standardizer::fit(x, train)?)
    } else {
        None
    };
    let raw = x.select_rows(train);
    let mut xt = standardizer.as_ref().map_or(raw.clone(), |s| s.apply(&raw));
    let mut yt: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let mut n_synthetic = 0;
    if cfg.cv.apply_smote {
        let r = smote_resample(&xt, &yt, cfg.cv.smote_k, derive_seed(seed, 1))?;
        n_synthetic = r.provenance.len();
        xt = r.x;
        yt = r.y;
    }
    let weights: Option<Vec<f64>> = cfg.cv.class_weighting.then(|| {
        let w = present_class_weights(&yt, Class::COUNT);
        yt.iter().map(|&c| w[c]).collect()
    });
    let model = cfg.model.train(&xt, &yt, Class::COUNT, weights.as_deref(), derive_seed(seed, 2))?;
    Ok(Fitted { model, standardizer, n_synthetic })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub git_describe: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            git_describe: env!("FEDSIGNAL_GIT_DESCRIBE").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n_meetings: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub train_period: (NaiveDate, NaiveDate),
    pub test_period: (NaiveDate, NaiveDate),
    pub class_counts: BTreeMap<String, usize>,
    pub documents_skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: usize,
    pub accuracy: MetricSummary,
    pub macro_precision: MetricSummary,
    pub macro_recall: MetricSummary,
    pub macro_f1: MetricSummary,
    pub ovr_macro_auc: Option<MetricSummary>,
    pub fold_aucs: Vec<Option<f64>>,
}

impl From<&CvResult> for CvSummary {
    fn from(r: &CvResult) -> Self {
        Self {
            folds: r.folds.len(),
            accuracy: r.accuracy,
            macro_precision: r.macro_precision,
            macro_recall: r.macro_recall,
            macro_f1: r.macro_f1,
            ovr_macro_auc: r.ovr_macro_auc,
            fold_aucs: r.fold_aucs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapReport {
    /// Attributions are of pre-softmax class margins.
    pub space: String,
    pub local_accuracy_max_error: f64,
    pub top: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub config_sha256: String,
    pub seed: u64,
    pub method: Method,
    pub model: String,
    pub data: DataSummary,
    pub cv: CvSummary,
    pub test: MetricsReport,
    pub final_model: FinalModelInfo,
    pub shap: Option<ShapReport>,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalModelInfo {
    pub n_train_rows: usize,
    pub n_synthetic_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub train_rows: Vec<usize>,
    pub validation_rows: Vec<usize>,
    pub validation_meetings: Vec<NaiveDate>,
    pub n_synthetic: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldsFile {
    pub seed: u64,
    pub test_fraction: f64,
    pub meetings: Vec<NaiveDate>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub folds: Vec<FoldRecord>,
}

/// Outcome of `run`, as written to `report.json`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub bundle: ModelBundle,
    pub prepared: Prepared,
}

fn out_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

/// CV on the training split, a refit scored on the held-out meetings, SHAP
/// for tree ensembles, and every artifact written under `cfg.out`.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    let exec = RayonExecutor::new(cfg.threads)?;
    let data = load_data(cfg, cfg.method)?;
    let prep = prepare(cfg, &data)?;
    let (x, y, plan) = (&prep.matrix.x, &prep.y, &prep.plan);

    let cv = cross_validate(&cfg.model, x, y, Class::COUNT, &plan.folds, &cfg.cv, cfg.seed, &exec)?;
    let fitted = fit_final(cfg, x, y, &plan.train_indices)?;
    let test_x = fitted.scale(&x.select_rows(&plan.test_indices));
    let test_y: Vec<usize> = plan.test_indices.iter().map(|&i| y[i]).collect();
    let probs = fitted.model.predict_proba(&test_x)?;
    let test = evaluate_probs(&test_y, &probs, cfg.cv.auc_average)?;

    let names = class_names();
    let m = &prep.matrix;
    let mut shap = None;
    if cfg.explain.enabled && fitted.model.is_tree_ensemble() {
        let attr = tree_shap(&fitted.model, &fitted.scale(x), &m.feature_names, &names)?;
        let summary = shap_summary(&attr, m.n_features());
        let long = shap_long(&attr, x);
        write_file(&out_path(cfg, "shap_summary.csv"), |w| write_shap_summary_csv(w, &summary, &names))?;
        write_file(&out_path(cfg, "shap_long.csv"), |w| write_shap_long_csv(w, &long, &m.meeting_dates))?;
        shap = Some(ShapReport {
            space: "margin".into(),
            local_accuracy_max_error: attr.local_accuracy_error(),
            top: summary.into_iter().take(cfg.explain.top_n).collect(),
        });
    }

    let dates = &m.meeting_dates;
    let span = |rows: &[usize]| (dates[rows[0]], dates[*rows.last().unwrap()]);
    let mut class_counts = BTreeMap::new();
    for c in Class::ALL {
        class_counts.insert(c.name().to_string(), y.iter().filter(|&&v| v == c.index()).count());
    }
    let report = Report {
        tool: ToolInfo::current(),
        config_sha256: cfg.sha256(),
        seed: cfg.seed,
        method: cfg.method,
        model: cfg.model.name().into(),
        data: DataSummary {
            n_meetings: m.n_rows(),
            n_train: plan.train_indices.len(),
            n_test: plan.test_indices.len(),
            n_features: m.n_features(),
            train_period: span(&plan.train_indices),
            test_period: span(&plan.test_indices),
            class_counts,
            documents_skipped: prep.skipped_docs.clone(),
        },
        cv: CvSummary::from(&cv),
        test,
        final_model: FinalModelInfo { n_train_rows: plan.train_indices.len(), n_synthetic_rows: fitted.n_synthetic },
        shap,
        config: cfg.clone(),
    };
    let folds = FoldsFile {
        seed: cfg.seed,
        test_fraction: cfg.split.test_fraction,
        meetings: dates.clone(),
        train_rows: plan.train_indices.clone(),
        test_rows: plan.test_indices.clone(),
        folds: cv
            .folds
            .iter()
            .zip(&plan.folds)
            .map(|(r, (tr, va))| FoldRecord {
                fold: r.fold,
                train_rows: tr.clone(),
                validation_rows: va.clone(),
                validation_meetings: va.iter().map(|&i| dates[i]).collect(),
                n_synthetic: r.n_synthetic,
                metrics: r.metrics.clone(),
            })
            .collect(),
    };
    let bundle = ModelBundle {
        format_version: BUNDLE_VERSION,
        model: fitted.model,
        hyperparams: cfg.model.clone(),
        feature_names: m.feature_names.clone(),
        class_names: names.clone(),
        seed: cfg.seed,
        method: cfg.method,
        assembly: cfg.features.clone(),
        standardizer: fitted.standardizer,
        featurizer: prep.featurizer.clone(),
    };

    write_json(&out_path(cfg, "report.json"), &report)?;
    write_json(&out_path(cfg, "cv_folds.json"), &folds)?;
    write_file(&out_path(cfg, "confusion.csv"), |w| write_confusion_csv(w, &report.test.confusion, &names))?;
    write_file(&out_path(cfg, "features.csv"), |w| write_feature_csv(w, m))?;
    let model_json = bundle.to_json();
    write_file(&out_path(cfg, "model.json"), |w| w.write_all(model_json.as_bytes()))?;
    Ok(RunOutput { report, bundle, prepared: prep })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub seed: u64,
    pub method: Method,
    pub family: String,
    pub random_budget: usize,
    pub grid_radius: usize,
    pub space: SearchSpace,
    #[serde(flatten)]
    pub result: TuningResult,
}

/// Two-stage search over the configured (or default) space; writes
/// `tuning.json`.
pub fn cmd_tune(cfg: &PipelineConfig) -> Result<TuningReport, PipelineError> {
    let exec = RayonExecutor::new(cfg.threads)?;
    let data = load_data(cfg, cfg.method)?;
    let prep = prepare(cfg, &data)?;
    let space = match &cfg.tuning.axes {
        Some(axes) => SearchSpace { base: cfg.model.clone(), axes: axes.clone() },
        None => SearchSpace::default_for(&cfg.model),
    };
    let t = &cfg.tuning;
    let result = tune(
        &space,
        &prep.matrix.x,
        &prep.y,
        Class::COUNT,
        &prep.plan.folds,
        &cfg.cv,
        t.random_budget,
        t.grid_radius,
        cfg.seed,
        &exec,
    )?;
    let report = TuningReport {
        seed: cfg.seed,
        method: cfg.method,
        family: cfg.model.name().into(),
        random_budget: t.random_budget,
        grid_radius: t.grid_radius,
        space,
        result,
    };
    write_json(&out_path(cfg, "tuning.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapContribution {
    pub feature: String,
    pub shap: f64,
    pub feature_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub as_of: NaiveDate,
    pub p_raise: f64,
    pub p_hold: f64,
    pub p_lower: f64,
    pub argmax: String,
    /// Largest contributions to the predicted class's margin (tree models).
    pub top_shap_features: Option<Vec<ShapContribution>>,
}

/// Scores a hypothetical meeting on `as_of` with a saved model, using only
/// data available before that date; writes `prediction.json`.
pub fn cmd_predict(cfg: &PipelineConfig, model_path: &Path, as_of: NaiveDate) -> Result<Prediction, PipelineError> {
    let bundle = ModelBundle::load(model_path)?;
    let method = bundle.method;
    let mut data = load_data(cfg, method)?;
    let first = data.decisions.first().map(|d| d.meeting_date);
    if first.is_none_or(|f| as_of < f) {
        return Err(FeatureError::NoMeetingsInRange.into());
    }
    data.decisions.retain(|d| d.meeting_date < as_of);
    let prev = data.decisions.last().map_or(0.0, |d| d.target_rate);
    let spec = MeetingSpec { date: as_of, prev_target_rate: prev, label: None };

    let (tokenized, _) =
        if method.uses_text() { tokenize_all(&data.documents, &data.stopwords)? } else { (BTreeMap::new(), Vec::new()) };
    if method.uses_text() && bundle.featurizer.is_none() {
        return Err(PipelineError::ModelFeatureMismatch("model carries no text basis".into()));
    }
    let tok = method.uses_text().then_some(&tokenized);
    let matrix = assemble_meetings(method, &[spec], &data.inputs(tok, bundle.featurizer.as_ref()), &cfg.features)?;
    if matrix.feature_names != bundle.feature_names {
        let diff = first_difference(&bundle.feature_names, &matrix.feature_names);
        return Err(PipelineError::ModelFeatureMismatch(diff));
    }
    let x = match &bundle.standardizer {
        Some(s) => s.apply(&matrix.x),
        None => matrix.x.clone(),
    };
    let p = bundle.model.predict_row(x.row(0))?;
    let best = fedsignal_core::math::argmax(&p);
    let top = if bundle.model.is_tree_ensemble() {
        let attr = tree_shap(&bundle.model, &x, &bundle.feature_names, &bundle.class_names)?;
        let phi = &attr.phi[0];
        let mut contrib: Vec<ShapContribution> = (0..phi.rows())
            .map(|j| ShapContribution {
                feature: bundle.feature_names[j].clone(),
                shap: phi.get(j, best),
                feature_value: matrix.x.get(0, j),
            })
            .collect();
        contrib.sort_by(|a, b| b.shap.abs().total_cmp(&a.shap.abs()).then_with(|| a.feature.cmp(&b.feature)));
        contrib.truncate(PREDICT_TOP_SHAP);
        Some(contrib)
    } else {
        None
    };
    let pred = Prediction {
        as_of,
        p_raise: p[Class::Raise.index()],
        p_hold: p[Class::Hold.index()],
        p_lower: p[Class::Lower.index()],
        argmax: bundle.class_names[best].clone(),
        top_shap_features: top,
    };
    write_json(&out_path(cfg, "prediction.json"), &pred)?;
    Ok(pred)
}

fn first_difference(stored: &[String], current: &[String]) -> String {
    match stored.iter().zip(current).position(|(a, b)| a != b) {
        Some(i) => format!("column {i} is {:?} in the model but {:?} now", stored[i], current[i]),
        None => format!("model has {} columns, current config builds {}", stored.len(), current.len()),
    }
}

/// Corpus statistics and per-document lexicon scores; writes `stats.csv`
/// and, with a lexicon, `lm_sentiment.csv`.
pub fn cmd_stats(cfg: &PipelineConfig) -> Result<PathBuf, PipelineError> {
    let docs = load_documents(&cfg.require(&cfg.data.documents, "documents")?)?;
    let lexicon = match cfg.optional(&cfg.data.lexicon, "lexicon")? {
        Some(p) => Some(load_lexicon(&p, cfg.optional(&cfg.data.negators, "negators")?.as_deref())?),
        None => None,
    };
    let stop = load_stopword_set(cfg, lexicon.as_ref())?;
    let (tokenized, _) = tokenize_all(&docs, &stop)?;

    let labels = match cfg.optional(&cfg.data.decisions, "decisions")? {
        Some(p) => {
            let decisions = load_decisions(&p)?;
            let dates: Vec<NaiveDate> = decisions.iter().map(|d| d.meeting_date).collect();
            let class_of: BTreeMap<NaiveDate, Class> =
                decisions.iter().map(|d| (d.meeting_date, label_decision(d, LABEL_EPSILON))).collect();
            let mut by_doc = BTreeMap::new();
            for (m, ids) in align_documents_to_meetings(&docs, &dates) {
                for id in ids {
                    by_doc.insert(id, class_of[&m]);
                }
            }
            Some(by_doc)
        }
        None => None,
    };
    let corpus: Vec<TokenizedDocument> = docs.iter().filter_map(|d| tokenized.get(&d.doc_id).cloned()).collect();
    let stats = corpus_stats(&corpus, labels.as_ref(), TOP_WORDS);
    let path = out_path(cfg, "stats.csv");
    write_file(&path, |w| crate::output::write_stats_csv(w, &stats))?;

    if let Some(lex) = &lexicon {
        let basis = LmTermBasis::fit(&[], lex, 0);
        let mut rows = Vec::new();
        for d in &docs {
            if let Some(t) = tokenized.get(&d.doc_id) {
                let features = score_lm_sentiment(t, lex, cfg.text.negation_window, &cfg.text.categories, &basis)?;
                rows.push(LmRow { doc_id: &d.doc_id, date: d.date, doc_type: d.doc_type, token_count: t.token_count(), features });
            }
        }
        write_file(&out_path(cfg, "lm_sentiment.csv"), |w| write_lm_csv(w, &rows))?;
    }
    Ok(path)
}

/// Downloads every configured FRED series to `<out>/fred/<ID>.csv`.
pub fn cmd_fetch(cfg: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let f = &cfg.fred;
    let opts = FredOptions {
        endpoint: f.endpoint.clone(),
        timeout: Duration::from_secs(f.timeout_secs),
        max_retries: f.max_retries,
        backoff: Duration::from_millis(f.retry_backoff_ms),
    };
    let client = FredClient::from_env(opts).map_err(|e| match e {
        FredError::MissingApiKey => PipelineError::Config("FRED_API_KEY is not set".into()),
        other => PipelineError::Fred { series: String::new(), source: other },
    })?;
    let dir = cfg.out.join("fred");
    let mut written = Vec::new();
    for s in &f.series {
        let series = fetch_fred_series(&client, s.fred_id(), &s.id, f.start, f.end, s.frequency)
            .map_err(|source| PipelineError::Fred { series: s.id.clone(), source })?;
        let path = dir.join(format!("{}.csv", s.id));
        write_file(&path, |w| write_macro_csv(&series, w))?;
        written.push(path);
    }
    Ok(written)
}

/// Loads data and prepares features without training; used by tests and
/// tooling that only need the matrix.
pub fn prepare_from_config(cfg: &PipelineConfig) -> Result<(LoadedData, Prepared), PipelineError> {
    let data = load_data(cfg, cfg.method)?;
    let prep = prepare(cfg, &data)?;
    Ok((data, prep))
}

/// Mean CV AUC of `spec` on prepared features.
pub fn cv_auc(cfg: &PipelineConfig, prep: &Prepared, spec: &ModelSpec) -> Result<CvResult, PipelineError> {
    let exec = RayonExecutor::new(cfg.threads)?;
    Ok(cross_validate(spec, &prep.matrix.x, &prep.y, Class::COUNT, &prep.plan.folds, &cfg.cv, cfg.seed, &exec)?)
}
