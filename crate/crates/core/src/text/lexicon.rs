use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TextError;

/// Loughran–McDonald word categories, in the fixed column order used by the
/// sentiment block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Positive,
    Negative,
    Uncertainty,
    Litigious,
    StrongModal,
    WeakModal,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Positive,
        Category::Negative,
        Category::Uncertainty,
        Category::Litigious,
        Category::StrongModal,
        Category::WeakModal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Positive => "positive",
            Category::Negative => "negative",
            Category::Uncertainty => "uncertainty",
            Category::Litigious => "litigious",
            Category::StrongModal => "strong_modal",
            Category::WeakModal => "weak_modal",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = TextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        let norm = match norm.as_str() {
            "strongmodal" => "strong_modal",
            "weakmodal" => "weak_modal",
            "uncertain" => "uncertainty",
            other => other,
        };
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| TextError::UnknownCategory(s.into()))
    }
}

pub const DEFAULT_NEGATORS: [&str; 7] = ["no", "not", "never", "none", "neither", "nor", "without"];

/// Category word lists plus negators. A word may sit in several categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    categories: BTreeMap<Category, BTreeSet<String>>,
    negators: BTreeSet<String>,
}

impl Lexicon {
    pub fn new<I, N>(entries: I, negators: N) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = (String, Category)>,
        N: IntoIterator<Item = String>,
    {
        let mut categories: BTreeMap<Category, BTreeSet<String>> = BTreeMap::new();
        for (word, cat) in entries {
            categories.entry(cat).or_default().insert(word.to_ascii_lowercase());
        }
        let negators: BTreeSet<String> = negators.into_iter().map(|w| w.to_ascii_lowercase()).collect();
        if negators.is_empty() {
            return Err(TextError::NoNegators);
        }
        Ok(Self { categories, negators })
    }

    /// Keeps only the listed categories.
    pub fn restrict(mut self, keep: &[Category]) -> Self {
        self.categories.retain(|c, _| keep.contains(c));
        self
    }

    pub fn contains(&self, category: Category, word: &str) -> bool {
        self.categories.get(&category).is_some_and(|s| s.contains(word))
    }

    pub fn is_negator(&self, word: &str) -> bool {
        self.negators.contains(word)
    }

    pub fn negators(&self) -> &BTreeSet<String> {
        &self.negators
    }

    pub fn words(&self, category: Category) -> impl Iterator<Item = &str> + '_ {
        self.categories.get(&category).into_iter().flat_map(|s| s.iter().map(String::as_str))
    }

    /// Every lexicon word across categories, sorted and deduplicated.
    pub fn all_words(&self) -> BTreeSet<&str> {
        self.categories.values().flat_map(|s| s.iter().map(String::as_str)).collect()
    }

    pub fn is_polar(&self, word: &str) -> bool {
        self.contains(Category::Positive, word) || self.contains(Category::Negative, word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn category_aliases() {
        assert_eq!("StrongModal".parse::<Category>(), Ok(Category::StrongModal));
        assert_eq!("weak_modal".parse::<Category>(), Ok(Category::WeakModal));
        assert!("sarcasm".parse::<Category>().is_err());
    }

    #[test]
    fn negators_required() {
        let r = Lexicon::new(vec![(String::from("good"), Category::Positive)], vec![]);
        assert_eq!(r, Err(TextError::NoNegators));
    }

    #[test]
    fn words_may_share_categories() {
        let lex = Lexicon::new(
            vec![(String::from("Claim"), Category::Litigious), (String::from("claim"), Category::Negative)],
            vec![String::from("not")],
        )
        .unwrap();
        assert!(lex.contains(Category::Litigious, "claim"));
        assert!(lex.contains(Category::Negative, "claim"));
        assert_eq!(lex.all_words().len(), 1);
        let lex = lex.restrict(&[Category::Negative]);
        assert!(!lex.contains(Category::Litigious, "claim"));
    }
}
