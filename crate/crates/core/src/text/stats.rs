use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tokenize::TokenizedDocument;
use crate::math;
use crate::types::{Class, DocType};

pub const TOP_WORDS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTypeStats {
    pub doc_type: DocType,
    pub n_docs: usize,
    pub min_tokens: usize,
    pub median_tokens: f64,
    pub max_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_type: Vec<DocTypeStats>,
    /// Most frequent tokens per decision class, count descending then
    /// alphabetical. Empty when no labels were supplied.
    pub top_words: Vec<(Class, Vec<(String, usize)>)>,
}

/// Token-count summaries per document type and, when `labels` maps doc ids to
/// decision classes, the `top_n` most frequent tokens per class.
pub fn corpus_stats(
    corpus: &[TokenizedDocument],
    labels: Option<&BTreeMap<String, Class>>,
    top_n: usize,
) -> CorpusStats {
    let mut lengths: BTreeMap<DocType, Vec<usize>> = BTreeMap::new();
    for d in corpus {
        lengths.entry(d.doc_type).or_default().push(d.token_count());
    }
    let per_type = lengths
        .into_iter()
        .map(|(doc_type, lens)| {
            let as_f: Vec<f64> = lens.iter().map(|&l| l as f64).collect();
            DocTypeStats {
                doc_type,
                n_docs: lens.len(),
                min_tokens: lens.iter().copied().min().unwrap_or(0),
                median_tokens: math::median(&as_f).unwrap_or(0.0),
                max_tokens: lens.iter().copied().max().unwrap_or(0),
            }
        })
        .collect();

    let mut per_class: BTreeMap<Class, BTreeMap<&str, usize>> = BTreeMap::new();
    if let Some(labels) = labels {
        for d in corpus {
            if let Some(class) = labels.get(&d.doc_id) {
                let counts = per_class.entry(*class).or_default();
                for t in &d.tokens {
                    *counts.entry(t.as_str()).or_insert(0) += 1;
                }
            }
        }
    }
    let top_words = per_class
        .into_iter()
        .map(|(class, counts)| {
            let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            let top = ranked.into_iter().take(top_n).map(|(w, c)| (String::from(w), c)).collect();
            (class, top)
        })
        .collect();
    CorpusStats { per_type, top_words }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(id: &str, ty: DocType, tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument { doc_id: id.into(), doc_type: ty, tokens: tokens.iter().map(|t| String::from(*t)).collect() }
    }

    #[test]
    fn median_of_two_lengths() {
        let corpus = [
            doc("a", DocType::Speech, &["w"; 4]),
            doc("b", DocType::Speech, &["w"; 10]),
        ];
        let s = corpus_stats(&corpus, None, TOP_WORDS);
        assert_eq!(s.per_type[0].median_tokens, 7.0);
        assert_eq!((s.per_type[0].min_tokens, s.per_type[0].max_tokens), (4, 10));
        assert!(s.top_words.is_empty());
    }

    #[test]
    fn top_words_per_class() {
        let corpus = [doc("a", DocType::Statement, &["rate", "rate", "cut"])];
        let labels: BTreeMap<String, Class> = [(String::from("a"), Class::Lower)].into_iter().collect();
        let s = corpus_stats(&corpus, Some(&labels), TOP_WORDS);
        assert_eq!(s.top_words, vec![(Class::Lower, vec![(String::from("rate"), 2), (String::from("cut"), 1)])]);
    }

    #[test]
    fn empty_label_map_has_no_class_section() {
        let corpus = [doc("a", DocType::Statement, &["rate"])];
        let s = corpus_stats(&corpus, Some(&BTreeMap::new()), TOP_WORDS);
        assert_eq!(s.per_type.len(), 1);
        assert!(s.top_words.is_empty());
    }
}
