//! Unicode normalization and word tokenization shared by the lexicon,
//! the Delete baseline and the edit analyses.

use std::ops::Range;

use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

/// NFC-normalize `text`.
pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Normalized matching form of a token: NFC, lowercased for cased scripts.
///
/// Lowercasing is a no-op on Arabic, Devanagari, Ethiopic and Han, so it
/// is applied unconditionally.
pub fn fold_token(token: &str) -> String {
    token.nfc().collect::<String>().to_lowercase()
}

/// A token with its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub span: Range<usize>,
}

/// Splits text into tokens. Implementations must return tokens in order
/// with non-overlapping byte ranges.
pub trait Tokenizer: Send + Sync {
    fn tokenize<'a>(&self, text: &'a str) -> Vec<Token<'a>>;

    fn token_strings(&self, text: &str) -> Vec<String> {
        self.tokenize(text).into_iter().map(|t| t.text.to_string()).collect()
    }
}

/// UAX-29 word-boundary tokenizer. Whitespace segments are dropped;
/// punctuation and symbols are kept as their own tokens. Han text comes
/// out one ideograph per token.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordTokenizer;

impl Tokenizer for WordTokenizer {
    fn tokenize<'a>(&self, text: &'a str) -> Vec<Token<'a>> {
        text.split_word_bound_indices()
            .filter(|(_, seg)| !seg.chars().all(char::is_whitespace))
            .map(|(start, seg)| Token {
                text: seg,
                span: start..start + seg.len(),
            })
            .collect()
    }
}
