//! Corpus-level analyses: edit types, toxic keywords, lengths.

use std::collections::BTreeMap;

use serde::Serialize;

use super::FeatureError;
use crate::corpus::{Corpus, ParallelPair};
use crate::lang::LanguageTag;
use crate::lexicon::LexiconStore;
use crate::metrics::{align, levenshtein, EditKind};
use crate::text::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EditClass {
    Deleted,
    Rephrased,
    Inserted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EditBreakdown {
    pub lang: LanguageTag,
    pub deleted_pct: f64,
    pub rephrased_pct: f64,
    pub inserted_pct: f64,
    /// Pairs with at least one edit (the denominator).
    pub counted: usize,
    /// Pairs whose two sides tokenize identically.
    pub unchanged: usize,
}

/// Dominant operation of one toxic -> reference alignment, or `None` when
/// the sides are identical. Ties rank substitution, then deletion, then
/// insertion.
pub fn classify_edit(toxic: &[String], reference: &[String]) -> Option<EditClass> {
    let al = align(toxic, reference);
    let sub = al.count(EditKind::Substitute);
    let del = al.count(EditKind::Delete);
    let ins = al.count(EditKind::Insert);
    if sub + del + ins == 0 {
        return None;
    }
    Some(if sub >= del && sub >= ins {
        EditClass::Rephrased
    } else if del >= ins {
        EditClass::Deleted
    } else {
        EditClass::Inserted
    })
}

/// Share of pairs per dominant edit class, against each pair's first
/// reference. Unchanged pairs are left out of the denominator.
pub fn edit_breakdown(pairs: &[ParallelPair], tokenizer: &dyn Tokenizer) -> Result<EditBreakdown, FeatureError> {
    let first = pairs.first().ok_or(FeatureError::EmptyInput)?;
    let (mut del, mut reph, mut ins, mut unchanged) = (0usize, 0usize, 0usize, 0usize);
    for p in pairs {
        let a = tokenizer.token_strings(&p.toxic);
        let b = tokenizer.token_strings(p.first_reference());
        match classify_edit(&a, &b) {
            Some(EditClass::Deleted) => del += 1,
            Some(EditClass::Rephrased) => reph += 1,
            Some(EditClass::Inserted) => ins += 1,
            None => unchanged += 1,
        }
    }
    let counted = del + reph + ins;
    if counted == 0 {
        return Err(FeatureError::NoEdits);
    }
    let pct = |x: usize| 100.0 * x as f64 / counted as f64;
    Ok(EditBreakdown {
        lang: first.lang,
        deleted_pct: pct(del),
        rephrased_pct: pct(reph),
        inserted_pct: pct(ins),
        counted,
        unchanged,
    })
}

/// Lexicon entries ranked by the number of toxic sentences they occur in,
/// most frequent first, ties in lexicon order. At most `n` entries.
pub fn top_toxic_keywords(corpus: &Corpus, lexicon: &LexiconStore, n: usize) -> Vec<(String, usize)> {
    let Some(lex) = lexicon.get(corpus.lang) else {
        return Vec::new();
    };
    let mut counts = vec![0usize; lex.len()];
    for p in &corpus.pairs {
        let mut hit: Vec<usize> = lexicon.match_entries(&p.toxic, corpus.lang).into_iter().map(|(_, e)| e).collect();
        hit.sort_unstable();
        hit.dedup();
        for e in hit {
            counts[e] += 1;
        }
    }
    let mut ranked: Vec<usize> = (0..counts.len()).filter(|&e| counts[e] > 0).collect();
    ranked.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    ranked
        .into_iter()
        .take(n)
        .map(|e| (lex.entries()[e].surface.clone(), counts[e]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub min: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: usize,
    /// value -> number of observations
    pub histogram: BTreeMap<usize, usize>,
}

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[usize], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] as f64 + (sorted[hi] as f64 - sorted[lo] as f64) * frac
}

impl Distribution {
    pub fn from_values(values: &[usize]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let mut histogram = BTreeMap::new();
        for &v in &sorted {
            *histogram.entry(v).or_insert(0) += 1;
        }
        Some(Distribution {
            count: sorted.len(),
            mean: sorted.iter().sum::<usize>() as f64 / sorted.len() as f64,
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            histogram,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStats {
    pub lang: LanguageTag,
    pub toxic_tokens: Distribution,
    pub reference_tokens: Distribution,
    pub levenshtein: Distribution,
}

/// Token lengths of both sides and their token-level edit distance.
pub fn length_stats(corpus: &Corpus, tokenizer: &dyn Tokenizer) -> Result<LengthStats, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut tox = Vec::with_capacity(corpus.len());
    let mut refs = Vec::with_capacity(corpus.len());
    let mut dist = Vec::with_capacity(corpus.len());
    for p in &corpus.pairs {
        let a = tokenizer.token_strings(&p.toxic);
        let b = tokenizer.token_strings(p.first_reference());
        tox.push(a.len());
        refs.push(b.len());
        dist.push(levenshtein(&a, &b));
    }
    let d = |v: &[usize]| Distribution::from_values(v).expect("non-empty");
    Ok(LengthStats {
        lang: corpus.lang,
        toxic_tokens: d(&tox),
        reference_tokens: d(&refs),
        levenshtein: d(&dist),
    })
}
