use std::collections::BTreeSet;
use std::path::Path;

use fedsignal_core::text::{Category, Lexicon, DEFAULT_NEGATORS};

use super::{csv_reader, read_to_string, IngestError};

const HEADER: &str = "word,category";

/// `word,category` rows plus an optional negator list (one word per line);
/// without one the built-in negators are used.
pub fn load_lexicon(path: &Path, negators: Option<&Path>) -> Result<Lexicon, IngestError> {
    let negs = match negators {
        Some(p) => parse_word_list(&read_to_string(p)?),
        None => DEFAULT_NEGATORS.iter().map(|s| s.to_string()).collect(),
    };
    parse_lexicon(&read_to_string(path)?, negs, path)
}

pub fn parse_lexicon(text: &str, negators: BTreeSet<String>, path: &Path) -> Result<Lexicon, IngestError> {
    let mut rdr = csv_reader(text, path, HEADER)?;
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::MalformedRow {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 || rec[0].is_empty() {
            return Err(IngestError::MalformedRow { path: path.into(), line });
        }
        let cat: Category = rec[1].parse().map_err(|source| IngestError::Lexicon { path: path.into(), source })?;
        entries.push((rec[0].to_ascii_lowercase(), cat));
    }
    Lexicon::new(entries, negators).map_err(|source| IngestError::Lexicon { path: path.into(), source })
}

/// One lowercase word per line; blank lines and `#` comments are skipped.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_ascii_lowercase)
        .collect()
}

pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>, IngestError> {
    Ok(parse_word_list(&read_to_string(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_categories() {
        let lex = parse_lexicon(
            "word,category\nGood,positive\nloss,negative\nmay,weak_modal\n",
            ["not".to_string()].into(),
            Path::new("lm.csv"),
        )
        .unwrap();
        assert!(lex.contains(Category::Positive, "good"));
        assert!(lex.contains(Category::WeakModal, "may"));
        assert!(lex.is_negator("not"));
    }

    #[test]
    fn unknown_category() {
        let err = parse_lexicon("word,category\nx,happy\n", ["not".into()].into(), Path::new("lm.csv")).unwrap_err();
        assert!(matches!(err, IngestError::Lexicon { .. }));
    }

    #[test]
    fn word_list_skips_comments() {
        let w = parse_word_list("# stop\nThe\n\n a \n");
        assert_eq!(w.into_iter().collect::<Vec<_>>(), ["a", "the"]);
    }
}
