use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::transform::{diff_transform, inertia_diff, label_decision, taylor_rate, yoy_percent, DiffKind, LABEL_EPSILON};
use super::{FeatureError, FeatureMatrix, Modalities};
use crate::matrix::Matrix;
use crate::text::{TextFeaturizer, TokenizedDocument};
use crate::types::{Class, DecisionRecord, DocType, DocumentRecord, FinbertProbRecord, MacroSeries};

/// Indicator column set to 1 for meetings without any aligned document.
pub const NO_DOCS: &str = "no_docs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MacroOnly,
    TextOnly,
    /// Macro + TF-IDF + lexicon sentiment.
    Method1,
    /// Macro + FinBERT probabilities, tree model.
    Method2,
    /// Macro + FinBERT probabilities, neural network.
    Method3,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MacroOnly => "macro_only",
            Method::TextOnly => "text_only",
            Method::Method1 => "method1",
            Method::Method2 => "method2",
            Method::Method3 => "method3",
        }
    }

    pub fn uses_macro(self) -> bool {
        !matches!(self, Method::TextOnly)
    }

    pub fn uses_text(self) -> bool {
        matches!(self, Method::TextOnly | Method::Method1)
    }

    pub fn uses_finbert(self) -> bool {
        matches!(self, Method::Method2 | Method::Method3)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "macro_only" => Ok(Method::MacroOnly),
            "text_only" => Ok(Method::TextOnly),
            "method1" | "1" => Ok(Method::Method1),
            "method2" | "2" => Ok(Method::Method2),
            "method3" | "3" => Ok(Method::Method3),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Which series feed the macro block and how the Taylor-rule inputs are
/// derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MacroConfig {
    /// Each listed series contributes `<id>_diff_prev` and `<id>_diff_year`.
    pub series: Vec<String>,
    /// Price-index series whose year-over-year percent change is inflation.
    pub inflation_series: String,
    /// When false the inflation series is already a percent rate.
    pub inflation_is_index: bool,
    /// Output-gap series in percent. When absent the gap is
    /// `-okun * (12-month change of the unemployment rate)`.
    pub output_gap_series: Option<String>,
    pub unemployment_series: String,
    pub okun_coefficient: f64,
    pub neutral_real_rate: f64,
    pub inflation_target: f64,
}

impl Default for MacroConfig {
    fn default() -> Self {
        Self {
            series: ["CPI", "PCE", "UNRATE", "NFP", "HOUST", "HPI", "10YUST", "FEDFUNDS", "UMich"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            inflation_series: "CPI".into(),
            inflation_is_index: true,
            output_gap_series: None,
            unemployment_series: "UNRATE".into(),
            okun_coefficient: 2.0,
            neutral_real_rate: 2.0,
            inflation_target: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocAggregation {
    /// Unweighted mean over every aligned document.
    #[default]
    Pooled,
    /// One mean per document type; columns suffixed `@<type>`.
    PerDocType,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssemblyConfig {
    #[serde(rename = "macro")]
    pub macro_cfg: MacroConfig,
    pub aggregation: DocAggregation,
    /// Inclusive meeting-date bounds.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

/// Everything assembly reads. Text and FinBERT inputs are optional; a method
/// that needs a missing one fails with `MissingModality`.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyInputs<'a> {
    pub macro_series: &'a [MacroSeries],
    pub decisions: &'a [DecisionRecord],
    pub documents: &'a [DocumentRecord],
    /// Cleaned documents keyed by doc id. Documents that failed cleaning are
    /// simply absent.
    pub tokenized: Option<&'a BTreeMap<String, TokenizedDocument>>,
    pub featurizer: Option<&'a TextFeaturizer>,
    pub finbert: Option<&'a BTreeMap<String, FinbertProbRecord>>,
}

/// A meeting to build a row for. Prediction queries carry no label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeetingSpec {
    pub date: NaiveDate,
    pub prev_target_rate: f64,
    pub label: Option<Class>,
}

/// Assigns each document to the earliest meeting on or after its date, so a
/// meeting collects the documents published since the previous meeting.
/// Documents dated after the last meeting are left out. `meetings` must be
/// sorted.
pub fn align_documents_to_meetings(docs: &[DocumentRecord], meetings: &[NaiveDate]) -> BTreeMap<NaiveDate, Vec<String>> {
    debug_assert!(meetings.windows(2).all(|w| w[0] < w[1]));
    let mut order: Vec<&DocumentRecord> = docs.iter().collect();
    order.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.doc_id.cmp(&b.doc_id)));
    let mut out: BTreeMap<NaiveDate, Vec<String>> = BTreeMap::new();
    for doc in order {
        let idx = meetings.partition_point(|m| *m < doc.date);
        if let Some(&m) = meetings.get(idx) {
            out.entry(m).or_default().push(doc.doc_id.clone());
        }
    }
    out
}

struct MacroBlock<'a> {
    diffs: Vec<MacroSeries>,
    inflation: MacroSeries,
    gap: GapSource<'a>,
    cfg: &'a MacroConfig,
}

enum GapSource<'a> {
    Series(&'a MacroSeries),
    OkunProxy(MacroSeries),
}

impl<'a> MacroBlock<'a> {
    fn build(method: Method, series: &'a [MacroSeries], cfg: &'a MacroConfig) -> Result<Self, FeatureError> {
        let find = |id: &str| {
            series.iter().find(|s| s.id() == id).ok_or_else(|| FeatureError::MissingModality {
                method,
                block: format!("macro series {id}"),
            })
        };
        let mut diffs = Vec::new();
        for id in &cfg.series {
            let s = find(id)?;
            diffs.push(diff_transform(s, DiffKind::Prev)?);
            diffs.push(diff_transform(s, DiffKind::Year)?);
        }
        let infl_src = find(&cfg.inflation_series)?;
        let inflation = if cfg.inflation_is_index {
            yoy_percent(infl_src).ok_or_else(|| FeatureError::TooShort(format!("{}_yoy_pct", infl_src.id())))?
        } else {
            infl_src.clone()
        };
        let gap = match &cfg.output_gap_series {
            Some(id) => GapSource::Series(find(id)?),
            None => GapSource::OkunProxy(diff_transform(find(&cfg.unemployment_series)?, DiffKind::Year)?),
        };
        Ok(Self { diffs, inflation, gap, cfg })
    }

    fn names(&self) -> Vec<String> {
        let mut n: Vec<String> = self.diffs.iter().map(|s| s.id().to_string()).collect();
        n.push("Taylor_Rate".into());
        n.push("Inertia_diff".into());
        n
    }

    /// Uses the latest value strictly before the meeting month; `None` when
    /// any input has no such value yet.
    fn row(&self, meeting: &MeetingSpec) -> Option<Vec<f64>> {
        let mut row = Vec::with_capacity(self.diffs.len() + 2);
        for s in &self.diffs {
            row.push(s.latest_before_month_of(meeting.date)?.1);
        }
        let pi = self.inflation.latest_before_month_of(meeting.date)?.1;
        let gap = match &self.gap {
            GapSource::Series(s) => s.latest_before_month_of(meeting.date)?.1,
            GapSource::OkunProxy(du) => -self.cfg.okun_coefficient * du.latest_before_month_of(meeting.date)?.1,
        };
        let taylor = taylor_rate(pi, gap, self.cfg.neutral_real_rate, self.cfg.inflation_target);
        row.push(taylor);
        row.push(inertia_diff(taylor, meeting.prev_target_rate));
        Some(row)
    }
}

fn groups(aggregation: DocAggregation) -> Vec<Option<DocType>> {
    match aggregation {
        DocAggregation::Pooled => alloc::vec![None],
        DocAggregation::PerDocType => DocType::ALL.iter().map(|t| Some(*t)).collect(),
    }
}

fn group_names(base: &[String], aggregation: DocAggregation) -> Vec<String> {
    groups(aggregation)
        .into_iter()
        .flat_map(|g| {
            base.iter().map(move |n| match g {
                None => n.clone(),
                Some(t) => format!("{n}@{t}"),
            })
        })
        .collect()
}

/// Means of `vectors` (tagged with doc type) per aggregation group, zeros for
/// empty groups.
fn grouped_mean(vectors: &[(DocType, Vec<f64>)], width: usize, aggregation: DocAggregation) -> Vec<f64> {
    let mut out = Vec::new();
    for g in groups(aggregation) {
        let mut acc = alloc::vec![0.0; width];
        let mut n = 0usize;
        for (ty, v) in vectors {
            if g.is_none_or(|t| t == *ty) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            acc.iter_mut().for_each(|a| *a /= n as f64);
        }
        out.extend(acc);
    }
    out
}

fn check_modalities(method: Method, inputs: &AssemblyInputs<'_>) -> Result<(), FeatureError> {
    let missing = |block: &str| FeatureError::MissingModality { method, block: block.into() };
    if method.uses_text() && (inputs.tokenized.is_none() || inputs.featurizer.is_none()) {
        return Err(missing("text"));
    }
    if method.uses_finbert() && inputs.finbert.is_none() {
        return Err(missing("finbert"));
    }
    Ok(())
}

/// Labelled meetings from the decision records inside the configured range.
fn labelled_meetings(inputs: &AssemblyInputs<'_>, cfg: &AssemblyConfig) -> Vec<MeetingSpec> {
    inputs
        .decisions
        .iter()
        .filter(|d| cfg.start.is_none_or(|s| d.meeting_date >= s) && cfg.end.is_none_or(|e| d.meeting_date <= e))
        .map(|d| MeetingSpec {
            date: d.meeting_date,
            prev_target_rate: d.prev_target_rate,
            label: Some(label_decision(d, LABEL_EPSILON)),
        })
        .collect()
}

/// Meeting dates that will receive a row for `method`: inside the range and,
/// for methods with a macro block, with every macro input already observed.
pub fn eligible_meetings(method: Method, inputs: &AssemblyInputs<'_>, cfg: &AssemblyConfig) -> Result<Vec<NaiveDate>, FeatureError> {
    let specs = labelled_meetings(inputs, cfg);
    if !method.uses_macro() {
        return Ok(specs.iter().map(|s| s.date).collect());
    }
    let block = MacroBlock::build(method, inputs.macro_series, &cfg.macro_cfg)?;
    Ok(specs.iter().filter(|s| block.row(s).is_some()).map(|s| s.date).collect())
}

/// Builds the per-meeting matrix for `method` over the decision records in range.
pub fn assemble_feature_matrix(method: Method, inputs: &AssemblyInputs<'_>, cfg: &AssemblyConfig) -> Result<FeatureMatrix, FeatureError> {
    let specs = labelled_meetings(inputs, cfg);
    assemble_meetings(method, &specs, inputs, cfg)
}

/// Builds rows for explicit meetings. Documents are aligned against the full
/// decision calendar plus the requested dates. Meetings lacking macro history
/// are dropped.
pub fn assemble_meetings(
    method: Method,
    meetings: &[MeetingSpec],
    inputs: &AssemblyInputs<'_>,
    cfg: &AssemblyConfig,
) -> Result<FeatureMatrix, FeatureError> {
    check_modalities(method, inputs)?;
    let macro_block = if method.uses_macro() {
        Some(MacroBlock::build(method, inputs.macro_series, &cfg.macro_cfg)?)
    } else {
        None
    };

    let mut calendar: Vec<NaiveDate> = inputs.decisions.iter().map(|d| d.meeting_date).collect();
    calendar.extend(meetings.iter().map(|m| m.date));
    calendar.sort();
    calendar.dedup();
    let aligned = align_documents_to_meetings(inputs.documents, &calendar);
    let doc_types: BTreeMap<&str, DocType> = inputs.documents.iter().map(|d| (d.doc_id.as_str(), d.doc_type)).collect();

    let mut names: Vec<String> = Vec::new();
    if let Some(b) = &macro_block {
        names.extend(b.names());
    }
    let text_names = match (method.uses_text(), inputs.featurizer) {
        (true, Some(f)) => f.feature_names(),
        _ => Vec::new(),
    };
    names.extend(group_names(&text_names, cfg.aggregation));
    let finbert_names: Vec<String> = if method.uses_finbert() {
        ["finbert_positive", "finbert_negative", "finbert_neutral"].iter().map(|s| s.to_string()).collect()
    } else {
        Vec::new()
    };
    names.extend(group_names(&finbert_names, cfg.aggregation));
    let with_docs = method.uses_text() || method.uses_finbert();
    if with_docs {
        names.push(NO_DOCS.into());
    }

    let mut x = Matrix::zeros(0, names.len());
    let mut dates = Vec::new();
    let mut labels = Vec::new();
    for spec in meetings {
        let mut row = Vec::with_capacity(names.len());
        if let Some(b) = &macro_block {
            match b.row(spec) {
                Some(r) => row.extend(r),
                None => continue,
            }
        }
        if with_docs {
            let ids: &[String] = aligned.get(&spec.date).map_or(&[], Vec::as_slice);
            let mut any_doc = false;
            if method.uses_text() {
                let (tok, feat) = (inputs.tokenized.unwrap(), inputs.featurizer.unwrap());
                let mut vecs = Vec::new();
                for id in ids {
                    if let Some(doc) = tok.get(id) {
                        vecs.push((doc_types[id.as_str()], feat.featurize(doc)?.values));
                    }
                }
                any_doc |= !vecs.is_empty();
                row.extend(grouped_mean(&vecs, text_names.len(), cfg.aggregation));
            }
            if method.uses_finbert() {
                let probs = inputs.finbert.unwrap();
                let vecs: Vec<(DocType, Vec<f64>)> = ids
                    .iter()
                    .filter_map(|id| probs.get(id).map(|p| (doc_types[id.as_str()], p.as_array().to_vec())))
                    .collect();
                any_doc |= !vecs.is_empty();
                row.extend(grouped_mean(&vecs, 3, cfg.aggregation));
            }
            row.push(if any_doc { 0.0 } else { 1.0 });
        }
        x.push_row(&row);
        dates.push(spec.date);
        labels.push(spec.label);
    }
    if dates.is_empty() {
        return Err(FeatureError::NoMeetingsInRange);
    }
    debug_assert!(x.is_finite());
    Ok(FeatureMatrix {
        meeting_dates: dates,
        feature_names: names,
        x,
        labels,
        sources: Modalities {
            macro_block: method.uses_macro(),
            text: method.uses_text(),
            finbert: method.uses_finbert(),
        },
    })
}
