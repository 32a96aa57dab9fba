//! Non-trained baselines: Duplicate, Delete and Backtranslation.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::clients::{ClientError, Detoxifier, Translator};
use crate::corpus::{ParallelPair, SystemOutput};
use crate::lang::LanguageTag;
use crate::lexicon::LexiconStore;
use crate::text::{nfc, Tokenizer, WordTokenizer};

pub const FULLY_DELETED: &str = "fully_deleted";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineSystem {
    Duplicate,
    Delete,
    Backtranslation,
}

impl BaselineSystem {
    pub fn label(self) -> &'static str {
        match self {
            BaselineSystem::Duplicate => "duplicate",
            BaselineSystem::Delete => "delete",
            BaselineSystem::Backtranslation => "backtranslation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub system: BaselineSystem,
    pub lang: LanguageTag,
    pub pivot_lang: LanguageTag,
}

impl BaselineConfig {
    pub fn new(system: BaselineSystem, lang: LanguageTag) -> Self {
        BaselineConfig {
            system,
            lang,
            pivot_lang: LanguageTag::En,
        }
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.system == BaselineSystem::Backtranslation && self.pivot_lang == self.lang {
            return Err(BaselineError::SamePivot(self.lang));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("backtranslation needs a pivot language other than {0}")]
    SamePivot(LanguageTag),
    #[error("pair {pair_id}: stage {stage} failed: {cause}")]
    Stage {
        pair_id: String,
        stage: &'static str,
        cause: ClientError,
    },
}

/// The input, copied verbatim.
pub fn duplicate(pair: &ParallelPair) -> SystemOutput {
    SystemOutput::new(pair, BaselineSystem::Duplicate.label(), pair.toxic.clone())
}

/// Removes the byte ranges of lexicon matches once. Whitespace around each
/// removed stretch collapses to a single space, or to nothing at the edges
/// of the text; text without whitespace at the seam is joined directly.
fn delete_once(text: &str, lang: LanguageTag, lexicon: &LexiconStore) -> Option<String> {
    let tokens = WordTokenizer.tokenize(text);
    let spans = lexicon.get(lang)?.match_tokens(&tokens);
    if spans.is_empty() {
        return None;
    }
    let removed: Vec<Range<usize>> = spans
        .iter()
        .map(|(s, _)| tokens[s.start].span.start..tokens[s.end - 1].span.end)
        .collect();

    // kept stretches between removed ranges
    let mut kept = Vec::with_capacity(removed.len() + 1);
    let mut cursor = 0;
    for r in &removed {
        kept.push(&text[cursor..r.start]);
        cursor = r.end;
    }
    kept.push(&text[cursor..]);

    let mut out = String::with_capacity(text.len());
    for (i, piece) in kept.iter().enumerate() {
        let piece = if i > 0 { piece.trim_start() } else { piece };
        let piece = if i + 1 < kept.len() { piece.trim_end() } else { piece };
        if piece.is_empty() {
            continue;
        }
        if !out.is_empty() {
            let left_ws = kept[i - 1].ends_with(char::is_whitespace) || out.ends_with(char::is_whitespace);
            let right_ws = kept[i].starts_with(char::is_whitespace);
            if left_ws || right_ws {
                out.push(' ');
            }
        }
        out.push_str(piece);
    }
    Some(out.trim().to_string())
}

/// Delete applied to a raw string, repeated until no lexicon entry
/// matches, so the result is a fixed point.
pub fn delete_text(text: &str, lang: LanguageTag, lexicon: &LexiconStore) -> String {
    let mut current = nfc(text);
    while let Some(next) = delete_once(&current, lang, lexicon) {
        current = next;
    }
    current
}

/// Drops every lexicon match from the toxic side. A sentence made only of
/// lexicon entries becomes the empty string, flagged in `meta`.
pub fn delete(pair: &ParallelPair, lexicon: &LexiconStore) -> SystemOutput {
    let out = delete_text(&pair.toxic, pair.lang, lexicon);
    let fully = out.is_empty();
    let o = SystemOutput::new(pair, BaselineSystem::Delete.label(), out);
    if fully {
        o.with_meta(FULLY_DELETED, json!(true))
    } else {
        o
    }
}

/// Runs one client stage over all texts. On a batch failure each text is
/// retried alone so errors land on the samples that caused them.
fn stage<F>(texts: &[String], call: F) -> Vec<Result<String, ClientError>>
where
    F: Fn(&[String]) -> Result<Vec<String>, ClientError>,
{
    if texts.is_empty() {
        return Vec::new();
    }
    match call(texts) {
        Ok(out) => out.into_iter().map(Ok).collect(),
        Err(_) => texts
            .iter()
            .map(|t| call(std::slice::from_ref(t)).map(|mut v| v.remove(0)))
            .collect(),
    }
}

/// Translate to the pivot language, detoxify there, translate back.
///
/// Returns one result per pair, in input order. A failed stage fails only
/// its pair; no partially processed text is ever returned as an output.
/// Intermediate texts are kept in `meta` for audit.
pub fn backtranslate_detox(
    pairs: &[ParallelPair],
    cfg: &BaselineConfig,
    mt: &dyn Translator,
    detox: &dyn Detoxifier,
) -> Result<Vec<Result<SystemOutput, BaselineError>>, BaselineError> {
    cfg.validate()?;
    let pivot = cfg.pivot_lang;
    let mut results: Vec<Result<(String, String, String), BaselineError>> = Vec::with_capacity(pairs.len());

    let sources: Vec<String> = pairs.iter().map(|p| p.toxic.clone()).collect();
    let forward = stage(&sources, |t| mt.translate(t, cfg.lang, pivot));

    let fail = |i: usize, stage: &'static str, cause: ClientError| BaselineError::Stage {
        pair_id: pairs[i].id.clone(),
        stage,
        cause,
    };

    let mut alive: Vec<(usize, String)> = Vec::new();
    for (i, r) in forward.into_iter().enumerate() {
        match r {
            Ok(t) => {
                alive.push((i, t));
                results.push(Ok(Default::default()));
            }
            Err(e) => results.push(Err(fail(i, "translate_to_pivot", e))),
        }
    }

    let texts: Vec<String> = alive.iter().map(|(_, t)| t.clone()).collect();
    let detoxed = stage(&texts, |t| detox.detoxify(t));
    let mut alive2 = Vec::new();
    for ((i, pivot_text), r) in alive.into_iter().zip(detoxed) {
        match r {
            Ok(d) => alive2.push((i, pivot_text, d)),
            Err(e) => results[i] = Err(fail(i, "detox_en", e)),
        }
    }

    let texts: Vec<String> = alive2.iter().map(|(_, _, d)| d.clone()).collect();
    let back = stage(&texts, |t| mt.translate(t, pivot, cfg.lang));
    for ((i, pivot_text, d), r) in alive2.into_iter().zip(back) {
        results[i] = match r {
            Ok(b) => Ok((pivot_text, d, b)),
            Err(e) => Err(fail(i, "translate_from_pivot", e)),
        };
    }

    Ok(results
        .into_iter()
        .zip(pairs)
        .map(|(r, p)| {
            r.map(|(pivot_text, detoxed, back)| {
                SystemOutput::new(p, BaselineSystem::Backtranslation.label(), back)
                    .with_meta("pivot_lang", json!(pivot.code()))
                    .with_meta("pivot_text", json!(pivot_text))
                    .with_meta("pivot_detoxified", json!(detoxed))
            })
        })
        .collect())
}
