//! Whitespace tokenizer for text instances.

use alloc::string::String;
use alloc::vec::Vec;

use crate::item::Item;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerOptions {
    /// Lowercase every token.
    pub case_fold: bool,
}

impl Default for TokenizerOptions {
    fn default() -> Self {
        TokenizerOptions { case_fold: true }
    }
}

/// Splits on whitespace, strips leading and trailing punctuation from each
/// word and returns the distinct tokens in canonical order.
pub fn tokenize(text: &str, options: TokenizerOptions) -> Vec<Item> {
    let mut items: Vec<Item> = text
        .split_whitespace()
        .filter_map(|word| {
            let word = word.trim_matches(|c: char| !c.is_alphanumeric());
            if word.is_empty() {
                return None;
            }
            let token: String = if options.case_fold { word.to_lowercase() } else { word.into() };
            Item::token(token).ok()
        })
        .collect();
    items.sort();
    items.dedup();
    items
}
