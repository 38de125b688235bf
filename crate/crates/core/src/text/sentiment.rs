use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::lexicon::{Category, Lexicon};
use super::tokenize::TokenizedDocument;
use super::TextError;

pub const DEFAULT_NEGATION_WINDOW: usize = 3;
pub const DEFAULT_TOP_TERMS: usize = 36;

/// Lexicon-based features of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmSentimentFeatures {
    /// Categories reported, in column order.
    pub categories: Vec<Category>,
    /// Raw counts aligned with `categories`, after negation flips.
    pub counts: Vec<u32>,
    /// `counts / token_count`.
    pub densities: Vec<f64>,
    /// `(s_pos - s_neg) / token_count`.
    pub net_sentiment: f64,
    /// `(s_pos - s_neg) / (s_pos + s_neg + 1)`.
    pub polarity: f64,
    /// Normalised counts of the fitted top lexicon terms: `(feature name, value)`.
    pub term_frequencies: Vec<(String, f64)>,
}

impl LmSentimentFeatures {
    pub fn len(&self) -> usize {
        2 * self.categories.len() + 2 + self.term_frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.counts
            .iter()
            .map(|&c| c as f64)
            .chain(self.densities.iter().copied())
            .chain([self.net_sentiment, self.polarity])
            .chain(self.term_frequencies.iter().map(|(_, v)| *v))
    }

    pub fn names(&self) -> Vec<String> {
        block_names(&self.categories, self.term_frequencies.iter().map(|(n, _)| n.clone()))
    }

    pub fn count(&self, category: Category) -> Option<u32> {
        self.categories.iter().position(|&c| c == category).map(|i| self.counts[i])
    }
}

fn block_names(categories: &[Category], term_names: impl Iterator<Item = String>) -> Vec<String> {
    let mut names = Vec::new();
    names.extend(categories.iter().map(|c| format!("lm_count_{c}")));
    names.extend(categories.iter().map(|c| format!("lm_density_{c}")));
    names.push("lm_net_sentiment".into());
    names.push("lm_polarity".into());
    names.extend(term_names);
    names
}

/// The lexicon terms whose normalised counts fill the tail of the sentiment
/// block: the most frequent lexicon words of the training corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LmTermBasis {
    /// `Some(word)` for a real term, `None` for a padding slot when the
    /// lexicon has fewer words than requested.
    pub terms: Vec<Option<String>>,
}

impl LmTermBasis {
    /// Ranks every lexicon word by total occurrences in `corpus` (descending,
    /// ties alphabetical) and keeps the first `n`.
    pub fn fit(corpus: &[TokenizedDocument], lexicon: &Lexicon, n: usize) -> Self {
        let mut counts: BTreeMap<&str, usize> = lexicon.all_words().into_iter().map(|w| (w, 0)).collect();
        for doc in corpus {
            for t in &doc.tokens {
                if let Some(c) = counts.get_mut(t.as_str()) {
                    *c += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut terms: Vec<Option<String>> = ranked.into_iter().take(n).map(|(w, _)| Some(String::from(w))).collect();
        terms.resize(n, None);
        Self { terms }
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| match t {
                Some(w) => format!("lm_term_{w}"),
                None => format!("lm_term_slot{i}"),
            })
            .collect()
    }
}

/// Per-category tallies with negation applied to the two polar categories.
///
/// A negator scopes over the next `negation_window` tokens and is consumed by
/// the first positive or negative word inside that scope. A negated positive
/// word counts as negative and vice versa; other categories ignore negation.
fn tally(doc: &TokenizedDocument, lexicon: &Lexicon, negation_window: usize) -> [u32; 6] {
    let mut counts = [0u32; 6];
    let mut open_negator: Option<usize> = None;
    for (i, tok) in doc.tokens.iter().enumerate() {
        let tok = tok.as_str();
        let pos = lexicon.contains(Category::Positive, tok);
        let neg = lexicon.contains(Category::Negative, tok);
        if pos || neg {
            let negated = open_negator.is_some_and(|j| i - j <= negation_window);
            open_negator = None;
            let (to_pos, to_neg) = if negated { (neg, pos) } else { (pos, neg) };
            counts[Category::Positive as usize] += to_pos as u32;
            counts[Category::Negative as usize] += to_neg as u32;
        }
        for cat in &Category::ALL[2..] {
            if lexicon.contains(*cat, tok) {
                counts[*cat as usize] += 1;
            }
        }
        if lexicon.is_negator(tok) {
            open_negator = Some(i);
        }
    }
    counts
}

/// Negation-aware lexicon scoring of one document.
pub fn score_lm_sentiment(
    doc: &TokenizedDocument,
    lexicon: &Lexicon,
    negation_window: usize,
    categories: &[Category],
    basis: &LmTermBasis,
) -> Result<LmSentimentFeatures, TextError> {
    let n = doc.token_count();
    if n == 0 {
        return Err(TextError::ZeroLengthDocument(doc.doc_id.clone()));
    }
    let all = tally(doc, lexicon, negation_window);
    let nf = n as f64;
    let counts: Vec<u32> = categories.iter().map(|&c| all[c as usize]).collect();
    let densities = counts.iter().map(|&c| c as f64 / nf).collect();
    let s_pos = all[Category::Positive as usize] as f64;
    let s_neg = all[Category::Negative as usize] as f64;

    let mut term_counts: BTreeMap<&str, u32> =
        basis.terms.iter().flatten().map(|t| (t.as_str(), 0)).collect();
    for t in &doc.tokens {
        if let Some(c) = term_counts.get_mut(t.as_str()) {
            *c += 1;
        }
    }
    let term_frequencies = basis
        .terms
        .iter()
        .zip(basis.feature_names())
        .map(|(t, name)| {
            let v = t.as_deref().map_or(0.0, |w| term_counts[w] as f64 / nf);
            (name, v)
        })
        .collect();

    Ok(LmSentimentFeatures {
        categories: categories.to_vec(),
        counts,
        densities,
        net_sentiment: (s_pos - s_neg) / nf,
        polarity: (s_pos - s_neg) / (s_pos + s_neg + 1.0),
        term_frequencies,
    })
}

/// A lexicon together with its scoring settings and fitted term basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmScorer {
    pub lexicon: Lexicon,
    pub negation_window: usize,
    pub categories: Vec<Category>,
    pub basis: LmTermBasis,
}

impl LmScorer {
    pub fn score(&self, doc: &TokenizedDocument) -> Result<LmSentimentFeatures, TextError> {
        score_lm_sentiment(doc, &self.lexicon, self.negation_window, &self.categories, &self.basis)
    }

    pub fn feature_names(&self) -> Vec<String> {
        block_names(&self.categories, self.basis.feature_names().into_iter())
    }

    pub fn len(&self) -> usize {
        2 * self.categories.len() + 2 + self.basis.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DocType;
    use alloc::vec;

    fn doc(tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            doc_id: "d".into(),
            doc_type: DocType::Speech,
            tokens: tokens.iter().map(|t| String::from(*t)).collect(),
        }
    }

    fn lexicon(entries: &[(&str, Category)]) -> Lexicon {
        Lexicon::new(
            entries.iter().map(|(w, c)| (String::from(*w), *c)),
            super::super::DEFAULT_NEGATORS.iter().map(|w| String::from(*w)),
        )
        .unwrap()
    }

    fn empty_basis() -> LmTermBasis {
        LmTermBasis { terms: vec![] }
    }

    #[test]
    fn negated_positive_counts_as_negative() {
        let lex = lexicon(&[
            ("good", Category::Positive),
            ("growth", Category::Positive),
            ("risks", Category::Negative),
        ]);
        let d = doc(&["growth", "is", "not", "good", "and", "risks", "increase"]);
        let f = score_lm_sentiment(&d, &lex, 3, &Category::ALL, &empty_basis()).unwrap();
        assert_eq!(f.count(Category::Positive), Some(1));
        assert_eq!(f.count(Category::Negative), Some(2));
        assert!((f.net_sentiment - (-1.0 / 7.0)).abs() < 1e-12);
        assert!((f.polarity - (-1.0 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn no_lexicon_words_scores_zero() {
        let lex = lexicon(&[("good", Category::Positive)]);
        let f = score_lm_sentiment(&doc(&["rates", "held"]), &lex, 3, &Category::ALL, &empty_basis()).unwrap();
        assert!(f.counts.iter().all(|&c| c == 0));
        assert_eq!(f.net_sentiment, 0.0);
    }

    #[test]
    fn negation_leaves_uncertainty_alone() {
        let lex = lexicon(&[("uncertain", Category::Uncertainty)]);
        let f = score_lm_sentiment(&doc(&["not", "uncertain"]), &lex, 3, &Category::ALL, &empty_basis()).unwrap();
        assert_eq!(f.count(Category::Uncertainty), Some(1));
    }

    #[test]
    fn negator_outside_window_is_ignored() {
        let lex = lexicon(&[("good", Category::Positive)]);
        let d = doc(&["not", "a1", "a2", "a3", "good"]);
        let f = score_lm_sentiment(&d, &lex, 3, &Category::ALL, &empty_basis()).unwrap();
        assert_eq!(f.count(Category::Positive), Some(1));
        let f = score_lm_sentiment(&d, &lex, 4, &Category::ALL, &empty_basis()).unwrap();
        assert_eq!(f.count(Category::Negative), Some(1));
    }

    #[test]
    fn zero_length_document_errors() {
        let lex = lexicon(&[]);
        assert_eq!(
            score_lm_sentiment(&doc(&[]), &lex, 3, &Category::ALL, &empty_basis()),
            Err(TextError::ZeroLengthDocument("d".into()))
        );
    }

    #[test]
    fn default_block_has_fifty_features() {
        let mut entries = vec![];
        let words: Vec<String> = (0..40).map(|i| format!("w{}", char::from(b'a' + (i % 26) as u8)).repeat(1 + i / 26)).collect();
        for w in &words {
            entries.push((w.as_str(), Category::Negative));
        }
        let lex = lexicon(&entries);
        let corpus = [doc(&["wb", "wb", "wa"])];
        let basis = LmTermBasis::fit(&corpus, &lex, DEFAULT_TOP_TERMS);
        assert_eq!(basis.terms[0].as_deref(), Some("wb"));
        assert_eq!(basis.terms[1].as_deref(), Some("wa"));
        let f = score_lm_sentiment(&corpus[0], &lex, 3, &Category::ALL, &basis).unwrap();
        assert_eq!(f.len(), 50);
        assert_eq!(f.values().count(), 50);
        assert_eq!(f.names().len(), 50);
        assert!((f.term_frequencies[0].1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn small_lexicon_pads_basis() {
        let lex = lexicon(&[("good", Category::Positive)]);
        let basis = LmTermBasis::fit(&[], &lex, 3);
        assert_eq!(basis.terms, vec![Some(String::from("good")), None, None]);
        assert_eq!(basis.feature_names()[2], "lm_term_slot2");
    }
}
