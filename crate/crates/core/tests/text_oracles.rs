//! Text features checked against straightforward re-implementations.

use std::collections::{BTreeMap, BTreeSet};

use fedsignal_core::text::{fit_tfidf, score_lm_sentiment, Category, Lexicon, LmTermBasis, TokenizedDocument};
use fedsignal_core::DocType;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn doc(id: &str, tokens: &[&str]) -> TokenizedDocument {
    TokenizedDocument { doc_id: id.into(), doc_type: DocType::Statement, tokens: tokens.iter().map(|t| t.to_string()).collect() }
}

/// Textbook smoothed TF-IDF over an explicit vocabulary.
fn oracle_tfidf(corpus: &[Vec<String>], vocab: &[String], doc: &[String]) -> Vec<f64> {
    let n = corpus.len() as f64;
    let mut v: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = corpus.iter().filter(|d| d.contains(t)).count() as f64;
            let tf = doc.iter().filter(|w| *w == t).count() as f64;
            tf * (((1.0 + n) / (1.0 + df)).ln() + 1.0)
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[test]
fn tfidf_hand_example() {
    let corpus = vec![doc("a", &["inflation", "rises"]), doc("b", &["inflation", "falls"]), doc("c", &["rates", "hold"])];
    let m = fit_tfidf(&corpus, 500).unwrap();
    assert_eq!(m.df("inflation"), Some(2));
    let i = m.vocabulary().iter().position(|t| t == "inflation").unwrap();
    assert!((m.idf(i) - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-12);
    assert!((m.idf(i) - 1.287682).abs() < 1e-6);
    let v = m.transform(&doc("q", &["inflation", "inflation"]));
    assert!((v[i] - 1.0).abs() < 1e-12);
    assert_eq!(v.iter().filter(|&&x| x != 0.0).count(), 1);
}

#[test]
fn tfidf_matches_oracle_on_random_corpora() {
    let words: Vec<String> = (0..30).map(|i| format!("w{}", (b'a' + i as u8 % 26) as char).repeat(1 + i / 26)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let corpus: Vec<Vec<String>> = (0..rng.gen_range(1..12))
            .map(|_| (0..rng.gen_range(1..15)).map(|_| words[rng.gen_range(0..words.len())].clone()).collect())
            .collect();
        let docs: Vec<TokenizedDocument> =
            corpus.iter().enumerate().map(|(i, t)| TokenizedDocument { doc_id: i.to_string(), doc_type: DocType::Minutes, tokens: t.clone() }).collect();
        let max = rng.gen_range(1..20);
        let m = fit_tfidf(&docs, max).unwrap();

        // vocabulary: df descending, then term ascending
        let mut df: BTreeMap<&String, usize> = BTreeMap::new();
        for d in &corpus {
            for t in d.iter().collect::<BTreeSet<_>>() {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&String, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let vocab: Vec<String> = ranked.iter().take(max).map(|(t, _)| (*t).clone()).collect();
        assert_eq!(m.vocabulary(), vocab.as_slice());

        for d in &docs {
            let got = m.transform(d);
            let want = oracle_tfidf(&corpus, &vocab, &d.tokens);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9);
            }
        }
    }
}

const POS: [&str; 4] = ["good", "growth", "strong", "gain"];
const NEG: [&str; 4] = ["risks", "weak", "loss", "decline"];
const UNC: [&str; 2] = ["uncertain", "may"];
const FILLER: [&str; 6] = ["the", "rate", "policy", "is", "and", "committee"];
const NEGATORS: [&str; 3] = ["not", "no", "never"];

fn lexicon() -> Lexicon {
    let entries = POS
        .iter()
        .map(|w| (w.to_string(), Category::Positive))
        .chain(NEG.iter().map(|w| (w.to_string(), Category::Negative)))
        .chain(UNC.iter().map(|w| (w.to_string(), Category::Uncertainty)));
    Lexicon::new(entries, NEGATORS.iter().map(|w| w.to_string())).unwrap()
}

/// Quadratic re-implementation: a polar word is flipped when the nearest
/// negator among the previous `window` tokens has no polar word between it
/// and the current token.
fn oracle_counts(tokens: &[&str], window: usize) -> (u32, u32, u32) {
    let is_polar = |t: &str| POS.contains(&t) || NEG.contains(&t);
    let (mut p, mut n, mut u) = (0, 0, 0);
    for (i, t) in tokens.iter().enumerate() {
        if UNC.contains(t) {
            u += 1;
        }
        if !is_polar(t) {
            continue;
        }
        let lo = i.saturating_sub(window);
        let negated = (lo..i).rev().find(|&j| NEGATORS.contains(&tokens[j])).is_some_and(|j| (j + 1..i).all(|k| !is_polar(tokens[k])));
        let positive = POS.contains(t) != negated;
        if positive {
            p += 1
        } else {
            n += 1
        }
    }
    (p, n, u)
}

#[test]
fn negation_example() {
    let lex = lexicon();
    let d = doc("x", &["growth", "is", "not", "good", "and", "risks", "increase"]);
    let f = score_lm_sentiment(&d, &lex, 3, &Category::ALL, &LmTermBasis { terms: vec![] }).unwrap();
    assert_eq!(f.count(Category::Positive), Some(1));
    assert_eq!(f.count(Category::Negative), Some(2));
    assert!((f.net_sentiment + 1.0 / 7.0).abs() < 1e-12);
}

#[test]
fn lm_scoring_matches_naive_reimplementation() {
    let lex = lexicon();
    let vocab: Vec<&str> = POS.iter().chain(&NEG).chain(&UNC).chain(&FILLER).chain(&NEGATORS).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..100 {
        let tokens: Vec<&str> = (0..rng.gen_range(1..40)).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
        let window = 1 + k % 5;
        let f = score_lm_sentiment(&doc("r", &tokens), &lex, window, &Category::ALL, &LmTermBasis { terms: vec![] }).unwrap();
        let (p, n, u) = oracle_counts(&tokens, window);
        assert_eq!(f.count(Category::Positive), Some(p), "{tokens:?} window {window}");
        assert_eq!(f.count(Category::Negative), Some(n), "{tokens:?} window {window}");
        assert_eq!(f.count(Category::Uncertainty), Some(u));
        let len = tokens.len() as f64;
        assert!((f.net_sentiment - (p as f64 - n as f64) / len).abs() < 1e-12);
        assert!((f.polarity - (p as f64 - n as f64) / (p as f64 + n as f64 + 1.0)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn tfidf_rows_unit_or_zero(docs in prop::collection::vec(prop::collection::vec(0usize..12, 1..10), 1..8), probe in prop::collection::vec(0usize..15, 1..10)) {
        let corpus: Vec<TokenizedDocument> = docs.iter().enumerate()
            .map(|(i, d)| TokenizedDocument { doc_id: i.to_string(), doc_type: DocType::Speech, tokens: d.iter().map(|w| format!("t{w}")).collect() })
            .collect();
        let m = fit_tfidf(&corpus, 8).unwrap();
        let p = TokenizedDocument { doc_id: "p".into(), doc_type: DocType::Speech, tokens: probe.iter().map(|w| format!("t{w}")).collect() };
        let norm = m.transform(&p).iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vocabulary_ignores_corpus_order(docs in prop::collection::vec(prop::collection::vec(0usize..12, 1..10), 2..8), rot in 0usize..8) {
        let corpus: Vec<TokenizedDocument> = docs.iter().enumerate()
            .map(|(i, d)| TokenizedDocument { doc_id: i.to_string(), doc_type: DocType::Speech, tokens: d.iter().map(|w| format!("t{w}")).collect() })
            .collect();
        let mut rotated = corpus.clone();
        rotated.rotate_left(rot % corpus.len());
        let (a, b) = (fit_tfidf(&corpus, 5).unwrap(), fit_tfidf(&rotated, 5).unwrap());
        prop_assert_eq!(a.vocabulary(), b.vocabulary());
    }

    #[test]
    fn densities_bounded(tokens in prop::collection::vec(0usize..19, 1..40)) {
        let vocab: Vec<&str> = POS.iter().chain(&NEG).chain(&UNC).chain(&FILLER).chain(&NEGATORS).copied().collect();
        let toks: Vec<&str> = tokens.iter().map(|&i| vocab[i]).collect();
        let f = score_lm_sentiment(&doc("d", &toks), &lexicon(), 3, &Category::ALL, &LmTermBasis { terms: vec![] }).unwrap();
        prop_assert!(f.densities.iter().all(|&d| (0.0..=1.0).contains(&d)));
        prop_assert!(f.densities.iter().sum::<f64>() <= 6.0);
        let again = score_lm_sentiment(&doc("d", &toks), &lexicon(), 3, &Category::ALL, &LmTermBasis { terms: vec![] }).unwrap();
        prop_assert_eq!(f, again);
    }
}
