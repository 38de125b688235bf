use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tokenize::TokenizedDocument;
use super::TextError;
use crate::math;

pub const DEFAULT_MAX_FEATURES: usize = 500;

/// A fitted TF-IDF basis.
///
/// Weights are `tf * (ln((1 + n_docs) / (1 + df)) + 1)` with raw counts for
/// `tf`, and each document vector is L2-normalised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TfidfRepr", into = "TfidfRepr")]
pub struct TfidfModel {
    vocabulary: Vec<String>,
    document_frequency: Vec<usize>,
    n_docs: usize,
    index: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct TfidfRepr {
    vocabulary: Vec<String>,
    document_frequency: Vec<usize>,
    n_docs: usize,
}

impl From<TfidfModel> for TfidfRepr {
    fn from(m: TfidfModel) -> Self {
        Self { vocabulary: m.vocabulary, document_frequency: m.document_frequency, n_docs: m.n_docs }
    }
}

impl TryFrom<TfidfRepr> for TfidfModel {
    type Error = String;

    fn try_from(r: TfidfRepr) -> Result<Self, Self::Error> {
        if r.vocabulary.len() != r.document_frequency.len() {
            return Err("vocabulary and document_frequency lengths differ".into());
        }
        let index: BTreeMap<String, usize> = r.vocabulary.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        if index.len() != r.vocabulary.len() {
            return Err("duplicate vocabulary term".into());
        }
        Ok(Self { vocabulary: r.vocabulary, document_frequency: r.document_frequency, n_docs: r.n_docs, index })
    }
}

/// Keeps the `max_features` terms with the highest document frequency,
/// breaking ties alphabetically.
pub fn fit_tfidf(corpus: &[TokenizedDocument], max_features: usize) -> Result<TfidfModel, TextError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(max_features);
    let vocabulary: Vec<String> = ranked.iter().map(|(t, _)| String::from(*t)).collect();
    let document_frequency = ranked.iter().map(|(_, d)| *d).collect();
    let index = vocabulary.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    Ok(TfidfModel { vocabulary, document_frequency, n_docs: corpus.len(), index })
}

impl TfidfModel {
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn document_frequency(&self) -> &[usize] {
        &self.document_frequency
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| self.document_frequency[i])
    }

    pub fn idf(&self, i: usize) -> f64 {
        math::ln((1.0 + self.n_docs as f64) / (1.0 + self.document_frequency[i] as f64)) + 1.0
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.vocabulary.iter().map(|t| format!("tfidf_{t}")).collect()
    }

    /// L2-normalised weights over the vocabulary. Unknown tokens are ignored;
    /// a document without vocabulary terms maps to the zero vector.
    pub fn transform(&self, doc: &TokenizedDocument) -> Vec<f64> {
        let mut w = alloc::vec![0.0; self.vocabulary.len()];
        for t in &doc.tokens {
            if let Some(&i) = self.index.get(t.as_str()) {
                w[i] += 1.0;
            }
        }
        for (i, v) in w.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= self.idf(i);
            }
        }
        let norm = math::sqrt(w.iter().map(|v| v * v).sum());
        if norm > 0.0 {
            for v in w.iter_mut() {
                *v /= norm;
            }
        }
        w
    }
}
