//! Artifact writers. Floats use Rust's shortest round-trip formatting so the
//! same values always produce the same bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use fedsignal_core::explain::{LongRow, SummaryRow};
use fedsignal_core::features::FeatureMatrix;
use fedsignal_core::text::{CorpusStats, LmSentimentFeatures};
use fedsignal_core::DocType;
use serde::Serialize;

use crate::error::PipelineError;

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::output(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| PipelineError::output(path, e))
}

/// Runs `body` against a buffered file at `path`, flushing at the end.
pub fn write_file<F>(path: &Path, body: F) -> Result<(), PipelineError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| PipelineError::output(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_file(path, |w| w.write_all(text.as_bytes()))
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().flexible(true).from_writer(w)
}

fn io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// `meeting_date,label,<features...>`.
pub fn write_feature_csv(w: &mut dyn Write, m: &FeatureMatrix) -> std::io::Result<()> {
    let mut c = csv_writer(w);
    let mut header = vec!["meeting_date".to_string(), "label".to_string()];
    header.extend(m.feature_names.iter().cloned());
    c.write_record(&header).map_err(io)?;
    for (i, row) in m.x.iter_rows().enumerate() {
        let mut rec = vec![m.meeting_dates[i].to_string(), m.labels[i].map_or(String::new(), |l| l.name().to_string())];
        rec.extend(row.iter().map(|v| v.to_string()));
        c.write_record(&rec).map_err(io)?;
    }
    c.flush()
}

/// Rows are actual classes, columns predicted, in `class_names` order.
pub fn write_confusion_csv(w: &mut dyn Write, confusion: &[Vec<usize>], class_names: &[String]) -> std::io::Result<()> {
    let mut c = csv_writer(w);
    let mut header = vec!["actual".to_string()];
    header.extend(class_names.iter().cloned());
    c.write_record(&header).map_err(io)?;
    for (name, row) in class_names.iter().zip(confusion) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        c.write_record(&rec).map_err(io)?;
    }
    c.flush()
}

/// Two sections, each introduced by a `#name` line.
pub fn write_stats_csv(w: &mut dyn Write, stats: &CorpusStats) -> std::io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["#doc_type_stats"]).map_err(io)?;
    c.write_record(["doc_type", "n_docs", "min_tokens", "median_tokens", "max_tokens"]).map_err(io)?;
    for s in &stats.per_type {
        c.write_record([
            s.doc_type.as_str().to_string(),
            s.n_docs.to_string(),
            s.min_tokens.to_string(),
            s.median_tokens.to_string(),
            s.max_tokens.to_string(),
        ])
        .map_err(io)?;
    }
    if !stats.top_words.is_empty() {
        c.write_record(["#top_words"]).map_err(io)?;
        c.write_record(["class", "rank", "word", "count"]).map_err(io)?;
        for (class, words) in &stats.top_words {
            for (rank, (word, count)) in words.iter().enumerate() {
                c.write_record([class.name(), &(rank + 1).to_string(), word, &count.to_string()]).map_err(io)?;
            }
        }
    }
    c.flush()
}

pub struct LmRow<'a> {
    pub doc_id: &'a str,
    pub date: NaiveDate,
    pub doc_type: DocType,
    pub token_count: usize,
    pub features: LmSentimentFeatures,
}

/// Per-document counts, densities, net sentiment and polarity.
pub fn write_lm_csv(w: &mut dyn Write, rows: &[LmRow<'_>]) -> std::io::Result<()> {
    let mut c = csv_writer(w);
    let Some(first) = rows.first() else {
        return c.flush();
    };
    let mut header: Vec<String> = ["doc_id", "date", "doc_type", "token_count"].iter().map(|s| s.to_string()).collect();
    header.extend(first.features.categories.iter().map(|k| format!("count_{k}")));
    header.extend(first.features.categories.iter().map(|k| format!("density_{k}")));
    header.extend(["net_sentiment".to_string(), "polarity".to_string()]);
    c.write_record(&header).map_err(io)?;
    for r in rows {
        let f = &r.features;
        let mut rec = vec![r.doc_id.to_string(), r.date.to_string(), r.doc_type.to_string(), r.token_count.to_string()];
        rec.extend(f.counts.iter().map(|v| v.to_string()));
        rec.extend(f.densities.iter().map(|v| v.to_string()));
        rec.push(f.net_sentiment.to_string());
        rec.push(f.polarity.to_string());
        c.write_record(&rec).map_err(io)?;
    }
    c.flush()
}

pub fn write_shap_summary_csv(w: &mut dyn Write, rows: &[SummaryRow], class_names: &[String]) -> std::io::Result<()> {
    let mut c = csv_writer(w);
    let mut header = vec!["rank".to_string(), "feature".to_string(), "mean_abs_shap".to_string()];
    header.extend(class_names.iter().map(|k| format!("mean_abs_shap_{}", k.to_ascii_lowercase())));
    c.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec = vec![r.rank.to_string(), r.feature.clone(), r.mean_abs_shap.to_string()];
        rec.extend(r.per_class.iter().map(|v| v.to_string()));
        c.write_record(&rec).map_err(io)?;
    }
    c.flush()
}

/// Long form for beeswarm plots; `dates[sample]` labels each row.
pub fn write_shap_long_csv(w: &mut dyn Write, rows: &[LongRow], dates: &[NaiveDate]) -> std::io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["sample", "meeting_date", "feature", "class", "shap", "feature_value"]).map_err(io)?;
    for r in rows {
        c.write_record([
            r.sample.to_string(),
            dates[r.sample].to_string(),
            r.feature.clone(),
            r.class.clone(),
            r.shap.to_string(),
            r.feature_value.to_string(),
        ])
        .map_err(io)?;
    }
    c.flush()
}
