//! Per-language toxic word and collocation lists.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::lang::LanguageTag;
use crate::text::{fold_token, nfc, Token, Tokenizer, WordTokenizer};

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty lexicon")]
    Empty,
    #[error("no lexicon loaded for {0}")]
    MissingLanguage(LanguageTag),
}

/// Half-open token range `[start, end)` covered by a lexicon match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// A normalized lexicon entry: its folded token sequence plus a printable
/// surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub surface: String,
    pub tokens: Vec<String>,
}

/// Entries for one language, deduplicated on their token sequence and kept
/// in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct LanguageLexicon {
    entries: Vec<LexiconEntry>,
    by_tokens: HashMap<Vec<String>, usize>,
    max_len: usize,
    raw_count: usize,
}

impl LanguageLexicon {
    /// Adds a raw line; returns false when it normalized to nothing or was
    /// already present.
    pub fn insert(&mut self, raw: &str) -> bool {
        let surface = normalize_surface(raw);
        if surface.is_empty() {
            return false;
        }
        self.raw_count += 1;
        let tokens: Vec<String> = WordTokenizer
            .tokenize(&surface)
            .iter()
            .map(|t| fold_token(t.text))
            .collect();
        if tokens.is_empty() || self.by_tokens.contains_key(&tokens) {
            return false;
        }
        self.max_len = self.max_len.max(tokens.len());
        self.by_tokens.insert(tokens.clone(), self.entries.len());
        self.entries.push(LexiconEntry { surface, tokens });
        true
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Distinct normalized entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Non-blank, non-comment lines seen before deduplication.
    pub fn raw_count(&self) -> usize {
        self.raw_count
    }

    /// Index of the entry whose token sequence equals `tokens`.
    pub fn lookup(&self, tokens: &[String]) -> Option<usize> {
        self.by_tokens.get(tokens).copied()
    }

    /// Greedy left-to-right, longest-match-first spans over folded tokens.
    /// Returns `(span, entry index)` pairs sorted by start.
    pub fn match_folded(&self, folded: &[String]) -> Vec<(Span, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < folded.len() {
            let longest = self.max_len.min(folded.len() - i);
            let hit = (1..=longest)
                .rev()
                .find_map(|len| self.by_tokens.get(&folded[i..i + len]).map(|&e| (len, e)));
            match hit {
                Some((len, entry)) => {
                    out.push((Span { start: i, end: i + len }, entry));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn match_tokens(&self, tokens: &[Token<'_>]) -> Vec<(Span, usize)> {
        let folded: Vec<String> = tokens.iter().map(|t| fold_token(t.text)).collect();
        self.match_folded(&folded)
    }
}

/// Trim, NFC, lowercase and collapse inner whitespace.
fn normalize_surface(raw: &str) -> String {
    nfc(raw)
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Lexicons for any subset of the supported languages.
#[derive(Debug, Clone, Default)]
pub struct LexiconStore {
    langs: HashMap<LanguageTag, LanguageLexicon>,
}

impl LexiconStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a single-language store from in-memory entries.
    pub fn from_entries<'a>(lang: LanguageTag, entries: impl IntoIterator<Item = &'a str>) -> Self {
        let mut lex = LanguageLexicon::default();
        for e in entries {
            lex.insert(e);
        }
        let mut store = Self::new();
        store.langs.insert(lang, lex);
        store
    }

    /// Merges another store's entries into this one.
    pub fn merge(&mut self, other: LexiconStore) {
        for (lang, lex) in other.langs {
            let slot = self.langs.entry(lang).or_default();
            if slot.is_empty() {
                *slot = lex;
            } else {
                let raw_before = slot.raw_count;
                for e in lex.entries {
                    slot.insert(&e.surface);
                }
                slot.raw_count = raw_before + lex.raw_count;
            }
        }
    }

    pub fn get(&self, lang: LanguageTag) -> Option<&LanguageLexicon> {
        self.langs.get(&lang)
    }

    pub fn require(&self, lang: LanguageTag) -> Result<&LanguageLexicon, LexiconError> {
        self.get(lang).ok_or(LexiconError::MissingLanguage(lang))
    }

    /// Distinct entry count per language.
    pub fn counts(&self) -> HashMap<LanguageTag, usize> {
        self.langs.iter().map(|(l, lex)| (*l, lex.len())).collect()
    }

    /// Token spans of `text` that match a lexicon entry. The text is
    /// NFC-normalized first, so spans index the tokens of `nfc(text)`.
    /// Languages without a loaded lexicon never match.
    pub fn match_spans(&self, text: &str, lang: LanguageTag) -> Vec<Span> {
        self.match_entries(text, lang).into_iter().map(|(s, _)| s).collect()
    }

    /// Like [`match_spans`](Self::match_spans), with the matched entry's
    /// index in [`LanguageLexicon::entries`].
    pub fn match_entries(&self, text: &str, lang: LanguageTag) -> Vec<(Span, usize)> {
        let Some(lex) = self.get(lang) else {
            return Vec::new();
        };
        let normalized = nfc(text);
        let tokens = WordTokenizer.tokenize(&normalized);
        lex.match_tokens(&tokens)
    }

    pub fn is_toxic(&self, text: &str, lang: LanguageTag) -> bool {
        !self.match_spans(text, lang).is_empty()
    }
}

/// Parses lexicon text: one entry per line, `#` comments and blank lines
/// skipped.
pub fn parse_lexicon(content: &str, lang: LanguageTag) -> Result<LexiconStore, LexiconError> {
    let lines = content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let store = LexiconStore::from_entries(lang, lines);
    if store.get(lang).is_none_or(LanguageLexicon::is_empty) {
        return Err(LexiconError::Empty);
    }
    Ok(store)
}

pub fn load_lexicon(path: impl AsRef<Path>, lang: LanguageTag) -> Result<LexiconStore, LexiconError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lexicon(&content, lang)
}
