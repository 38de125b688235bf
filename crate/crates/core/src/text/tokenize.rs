use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TextError;
use crate::types::{DocType, DocumentRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub doc_type: DocType,
    /// Lowercase `[a-z]` tokens in original order.
    pub tokens: Vec<String>,
}

impl TokenizedDocument {
    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

/// Lowercases, splits on every non-letter, drops one-letter tokens and
/// stopwords. No stemming; order is kept for negation scoping.
pub fn clean_and_tokenize(
    record: &DocumentRecord,
    stopwords: &BTreeSet<String>,
) -> Result<TokenizedDocument, TextError> {
    let tokens = tokenize(&record.text, stopwords);
    if tokens.is_empty() {
        return Err(TextError::EmptyAfterCleaning(record.doc_id.clone()));
    }
    Ok(TokenizedDocument { doc_id: record.doc_id.clone(), doc_type: record.doc_type, tokens })
}

pub(crate) fn tokenize(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if current.len() >= 2 && !stopwords.contains(current.as_str()) {
            tokens.push(core::mem::take(current));
        } else {
            current.clear();
        }
    };
    for c in text.chars() {
        if c.is_ascii_alphabetic() {
            current.push(c.to_ascii_lowercase());
        } else {
            flush(&mut current, &mut tokens);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}
