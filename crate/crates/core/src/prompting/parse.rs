//! Tolerant parsing of structured model responses.
//!
//! A response is read as `Key: value` fields. A key counts only at the
//! start of the text or after a newline, `{`, `,` or `;` (spaces, `*`, `-`
//! and quotes in between are allowed, so markdown bullets and bold keys
//! work). A value runs to the next key. When a key repeats, the last
//! occurrence wins.

use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::features::{FeatureProfile, KeywordVocabulary, ToxicityLevel};

pub const KEYS: [&str; 10] = [
    "Sentence",
    "Toxicity Level",
    "Tone",
    "Language",
    "Implied Sentiment",
    "Context",
    "Negative Connotations",
    "Intent",
    "Fixed sentence",
    "Cluster",
];

#[derive(Debug, Clone, PartialEq)]
struct Field<'a> {
    key: &'static str,
    /// Byte offset where the key's decoration starts.
    start: usize,
    value_start: usize,
    raw_value: &'a str,
}

fn is_decoration(c: char) -> bool {
    matches!(c, ' ' | '\t' | '*' | '-' | '"' | '\'' | '#')
}

fn at_boundary(text: &str, pos: usize) -> Option<usize> {
    // walk back over decoration to the boundary character
    let mut start = pos;
    for (i, c) in text[..pos].char_indices().rev() {
        if is_decoration(c) {
            start = i;
            continue;
        }
        return matches!(c, '\n' | '\r' | '{' | ',' | ';').then_some(start);
    }
    Some(start)
}

/// Matches `key` case-insensitively at `pos`, followed by optional
/// decoration and a colon. Returns the byte offset after the colon.
fn key_at(text: &str, pos: usize, key: &str) -> Option<usize> {
    let candidate = text.get(pos..pos + key.len())?;
    if !candidate.eq_ignore_ascii_case(key) {
        return None;
    }
    let mut end = pos + key.len();
    for c in text[end..].chars() {
        match c {
            // bold markers may close after the colon: "**Key:**"
            ':' => return Some(end + 1 + text[end + 1..].len() - text[end + 1..].trim_start_matches('*').len()),
            '*' | '"' | '\'' | ' ' | '\t' => end += c.len_utf8(),
            _ => return None,
        }
    }
    None
}

fn fields(text: &str) -> Vec<Field<'_>> {
    let mut found: Vec<(usize, usize, &'static str)> = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        if text.is_char_boundary(pos) {
            if let Some(start) = at_boundary(text, pos) {
                // longest key first so "Toxicity Level" beats nothing shorter
                let hit = KEYS
                    .iter()
                    .filter_map(|k| key_at(text, pos, k).map(|v| (*k, v)))
                    .max_by_key(|(k, _)| k.len());
                if let Some((key, value_start)) = hit {
                    found.push((start, value_start, key));
                    pos = value_start;
                    continue;
                }
            }
        }
        pos += 1;
    }
    found
        .iter()
        .enumerate()
        .map(|(i, &(start, value_start, key))| {
            let end = found.get(i + 1).map(|f| f.0).unwrap_or(text.len());
            Field {
                key,
                start,
                value_start,
                raw_value: &text[value_start..end.max(value_start)],
            }
        })
        .collect()
}

/// Drops code fences, then one pair of enclosing braces and the trailing
/// separators around them.
fn unwrap_body(raw: &str) -> String {
    let body: Vec<&str> = raw.lines().filter(|l| !l.trim_start().starts_with("```")).collect();
    let body = body.join("\n");
    let trimmed = body.trim().trim_end_matches([',', ';']).trim();
    match trimmed.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        Some(inner) => inner.to_string(),
        None => trimmed.to_string(),
    }
}

fn clean_value(v: &str) -> String {
    let mut s = v.trim();
    loop {
        let t = s.trim_end_matches([',', ';']).trim_end();
        if t.len() == s.len() {
            break;
        }
        s = t;
    }
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('{', '}'), ('<', '>')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            s = s[open.len_utf8()..s.len() - close.len_utf8()].trim();
            break;
        }
    }
    s.to_string()
}

/// Cleaned value of the last occurrence of each requested key.
fn last_value(fields: &[Field<'_>], key: &str) -> Option<String> {
    fields.iter().rev().find(|f| f.key == key).map(|f| clean_value(f.raw_value))
}

fn parse_level(v: &str) -> Option<ToxicityLevel> {
    v.split(|c: char| !c.is_alphanumeric())
        .find_map(|w| w.parse::<ToxicityLevel>().ok())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedDetoxResponse {
    pub fixed_sentence: String,
    pub toxicity_level: Option<ToxicityLevel>,
    pub cluster: Option<usize>,
    pub raw: String,
}

/// Extracts the fixed sentence and, when present, the toxicity level and
/// cluster from a detoxification response.
pub fn parse_detox_response(raw: &str) -> Result<ParsedDetoxResponse, PromptError> {
    let body = unwrap_body(raw);
    let fs = fields(&body);
    let fixed = last_value(&fs, "Fixed sentence").ok_or_else(|| PromptError::MissingKey {
        key: "Fixed sentence",
        raw: raw.to_string(),
    })?;
    if fixed.is_empty() {
        return Err(PromptError::EmptyValue {
            key: "Fixed sentence",
            raw: raw.to_string(),
        });
    }
    let cluster = last_value(&fs, "Cluster").and_then(|v| {
        let digits: String = v.chars().skip_while(|c| !c.is_ascii_digit()).take_while(char::is_ascii_digit).collect();
        digits.parse().ok()
    });
    Ok(ParsedDetoxResponse {
        fixed_sentence: fixed,
        toxicity_level: last_value(&fs, "Toxicity Level").as_deref().and_then(parse_level),
        cluster,
        raw: raw.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedFeatures {
    /// Profile with an empty `sentence_id`; the caller assigns it.
    pub profile: FeatureProfile,
    /// Keywords outside the vocabulary, as `Field: word`.
    pub warnings: Vec<String>,
}

fn split_keywords(v: &str) -> Vec<String> {
    let mut parts = vec![v.to_string()];
    for sep in [" and ", " or ", " And ", " Or "] {
        parts = parts.iter().flat_map(|p| p.split(sep).map(str::to_string).collect::<Vec<_>>()).collect();
    }
    parts
        .iter()
        .flat_map(|p| p.split([',', ';', '/', '&', '\n', '|']))
        .map(|w| w.trim().trim_matches(|c: char| c == '.' || c == '"' || c == '\'' || c.is_whitespace()))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

fn is_none(v: &str) -> bool {
    matches!(v.trim().to_lowercase().as_str(), "" | "none" | "n/a" | "-")
}

/// Reads a descriptive-feature analysis. Keyword fields are split on
/// commas, semicolons, slashes and "and"/"or"; words outside `vocab` are
/// reported in `warnings` rather than dropped silently.
pub fn parse_feature_response(raw: &str, vocab: &KeywordVocabulary) -> Result<ParsedFeatures, PromptError> {
    let body = unwrap_body(raw);
    let fs = fields(&body);
    let required = |key: &'static str| {
        last_value(&fs, key).ok_or_else(|| PromptError::MissingKey {
            key,
            raw: raw.to_string(),
        })
    };
    let level_text = required("Toxicity Level")?;
    let toxicity_level = parse_level(&level_text).ok_or_else(|| PromptError::EmptyValue {
        key: "Toxicity Level",
        raw: raw.to_string(),
    })?;

    let mut warnings = Vec::new();
    let mut blocks = Vec::new();
    for key in ["Tone", "Language", "Implied Sentiment"] {
        let mut terms: Vec<String> = Vec::new();
        for w in split_keywords(&required(key)?) {
            match vocab.canonical(&w) {
                Some(t) if !terms.iter().any(|x| x == t) => terms.push(t.to_string()),
                Some(_) => {}
                None => warnings.push(format!("{key}: {w}")),
            }
        }
        blocks.push(terms);
    }
    if blocks.iter().all(Vec::is_empty) {
        return Err(PromptError::EmptyValue {
            key: "Tone/Language/Implied Sentiment",
            raw: raw.to_string(),
        });
    }
    let implied_sentiment = blocks.pop().unwrap_or_default();
    let language_type = blocks.pop().unwrap_or_default();
    let tone = blocks.pop().unwrap_or_default();

    let connotations = last_value(&fs, "Negative Connotations").unwrap_or_default();
    let negative_connotations = if is_none(&connotations) {
        Vec::new()
    } else {
        connotations
            .split([',', ';', '\n'])
            .map(|w| w.trim().to_string())
            .filter(|w| !is_none(w))
            .collect()
    };

    Ok(ParsedFeatures {
        profile: FeatureProfile {
            sentence_id: String::new(),
            sentence: last_value(&fs, "Sentence").unwrap_or_default(),
            toxicity_level,
            tone,
            language_type,
            implied_sentiment,
            context: last_value(&fs, "Context").unwrap_or_default(),
            negative_connotations,
            intent: last_value(&fs, "Intent").unwrap_or_default(),
        },
        warnings,
    })
}

/// True when `text` contains a response key followed by a colon, which
/// would make it ambiguous inside a structured response.
pub fn contains_key(text: &str) -> bool {
    let lower = text.to_lowercase();
    KEYS.iter().any(|k| {
        let k = k.to_lowercase();
        lower.match_indices(&k).any(|(i, _)| {
            lower[i + k.len()..]
                .trim_start_matches(['*', '"', '\'', ' ', '\t'])
                .starts_with(':')
        })
    })
}
