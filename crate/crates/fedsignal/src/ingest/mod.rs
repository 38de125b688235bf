//! Loaders for every external input: macro CSVs (or FRED), the document
//! manifest, decision records, FinBERT probabilities and the word lists.

mod decisions;
mod documents;
mod finbert;
pub mod fred;
mod lexicon;
mod macro_csv;

use std::path::PathBuf;

use chrono::NaiveDate;
use fedsignal_core::text::TextError;
use thiserror::Error;

pub use decisions::{load_decisions, parse_decisions};
pub use documents::{load_documents, ManifestEntry};
pub use finbert::{finbert_by_doc, load_finbert_probs, parse_finbert_probs};
pub use fred::{fetch_fred_series, FredClient, FredError, FredOptions, FRED_ENDPOINT};
pub use lexicon::{load_lexicon, load_stopwords, parse_lexicon, parse_word_list};
pub use macro_csv::{load_macro_csv, load_macro_dir, parse_macro_csv, write_macro_csv, Frequency};

/// Line numbers count the header as line 1.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: expected header {expected:?}")]
    BadHeader { path: PathBuf, expected: &'static str },
    #[error("{path}: malformed row at line {line}")]
    MalformedRow { path: PathBuf, line: u64 },
    #[error("{path}: two observations for month {date}")]
    DuplicateMonth { path: PathBuf, date: NaiveDate },
    #[error("{path}: no observations")]
    EmptySeries { path: PathBuf },
    #[error("unknown document type {0:?}")]
    UnknownDocType(String),
    #[error("document file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("document id {0:?} appears more than once")]
    DuplicateDocId(String),
    #[error("document {0:?} has no text")]
    EmptyDocument(String),
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}: meeting dates stop increasing at line {line}")]
    NonMonotonicDates { path: PathBuf, line: u64 },
    #[error("{path}: rate {rate} at line {line} is outside [0, 25]")]
    RateOutOfRange { path: PathBuf, line: u64, rate: f64 },
    #[error("{path}: line {line}: {value} is not a probability")]
    NotAProbability { path: PathBuf, line: u64, value: f64 },
    #[error("{path}: line {line}: probabilities sum to {sum}")]
    SimplexViolation { path: PathBuf, line: u64, sum: f64 },
    #[error("{path}: {source}")]
    Lexicon { path: PathBuf, source: TextError },
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io { path: path.into(), source }
    }

    /// True for failures reading bytes off disk, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        matches!(self, IngestError::Io { .. })
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))
}

/// A CSV reader over `text` that checks the header row matches `expected`.
pub(crate) fn csv_reader<'a>(
    text: &'a str,
    path: &std::path::Path,
    expected: &'static str,
) -> Result<csv::Reader<&'a [u8]>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|_| IngestError::BadHeader { path: path.into(), expected })?;
    let got: Vec<&str> = header.iter().collect();
    if got.join(",") != expected {
        return Err(IngestError::BadHeader { path: path.into(), expected });
    }
    Ok(rdr)
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

/// Finite decimal; rejects `NaN`, `inf` and blanks.
pub(crate) fn parse_value(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
