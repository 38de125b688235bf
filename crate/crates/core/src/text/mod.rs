//! Text featurisation: cleaning, lexicon sentiment, TF-IDF and the fused
//! per-document feature vector.

mod lexicon;
mod sentiment;
mod stats;
mod tfidf;
mod tokenize;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{Category, Lexicon, DEFAULT_NEGATORS};
pub use sentiment::{score_lm_sentiment, LmScorer, LmSentimentFeatures, LmTermBasis, DEFAULT_NEGATION_WINDOW, DEFAULT_TOP_TERMS};
pub use stats::{corpus_stats, CorpusStats, DocTypeStats, TOP_WORDS};
pub use tfidf::{fit_tfidf, TfidfModel, DEFAULT_MAX_FEATURES};
pub use tokenize::{clean_and_tokenize, TokenizedDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("document {0} has no tokens left after cleaning")]
    EmptyAfterCleaning(String),
    #[error("document {0} has zero tokens")]
    ZeroLengthDocument(String),
    #[error("cannot fit on an empty corpus")]
    EmptyCorpus,
    #[error("lexicon needs at least one negator")]
    NoNegators,
    #[error("unknown lexicon category {0:?}")]
    UnknownCategory(String),
}

/// A document's fused text features: TF-IDF weights followed by the lexicon
/// sentiment block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextFeatureVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

/// Concatenates `[tfidf..., lm...]` with names `tfidf_<term>` and `lm_<feature>`.
pub fn combine_text_features(model: &TfidfModel, tfidf_vec: &[f64], lm: &LmSentimentFeatures) -> TextFeatureVector {
    assert_eq!(tfidf_vec.len(), model.vocabulary().len(), "tfidf vector does not match vocabulary");
    let mut values = Vec::with_capacity(tfidf_vec.len() + lm.len());
    values.extend_from_slice(tfidf_vec);
    values.extend(lm.values());
    let mut names = model.feature_names();
    names.extend(lm.names());
    TextFeatureVector { values, names }
}

/// Fitted text pipeline: a TF-IDF basis plus a lexicon scorer, both fitted on
/// training documents only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextFeaturizer {
    pub tfidf: TfidfModel,
    pub lm: LmScorer,
}

impl TextFeaturizer {
    pub fn fit(
        train_docs: &[TokenizedDocument],
        lexicon: Lexicon,
        max_features: usize,
        negation_window: usize,
        top_terms: usize,
        categories: Vec<Category>,
    ) -> Result<Self, TextError> {
        let tfidf = fit_tfidf(train_docs, max_features)?;
        let basis = LmTermBasis::fit(train_docs, &lexicon, top_terms);
        Ok(Self { tfidf, lm: LmScorer { lexicon, negation_window, categories, basis } })
    }

    pub fn featurize(&self, doc: &TokenizedDocument) -> Result<TextFeatureVector, TextError> {
        let t = self.tfidf.transform(doc);
        let lm = self.lm.score(doc)?;
        Ok(combine_text_features(&self.tfidf, &t, &lm))
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = self.tfidf.feature_names();
        names.extend(self.lm.feature_names());
        names
    }

    pub fn len(&self) -> usize {
        self.tfidf.vocabulary().len() + self.lm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
