//! Sentence-level character n-gram F-score, compatible with sacrebleu's
//! `CHRF` metric (character orders only, no word n-grams).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub max_char_order: usize,
    pub beta: f64,
    /// Remove all whitespace before extracting n-grams.
    pub strip_whitespace: bool,
    /// Stand-in for precision/recall of an order with no n-grams.
    pub epsilon: f64,
    /// Average smoothed per-order F-scores instead of using the effective
    /// order.
    #[serde(default)]
    pub eps_smoothing: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig {
            max_char_order: 6,
            beta: 1.0,
            strip_whitespace: true,
            epsilon: 1e-16,
            eps_smoothing: false,
        }
    }
}

impl ChrfConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.max_char_order == 0 {
            return Err(MetricError::InvalidConfig("max_char_order must be at least 1".into()));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(MetricError::InvalidConfig("beta must be positive".into()));
        }
        Ok(())
    }
}

/// `(hyp, ref, match)` n-gram counts for one order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrderStats {
    pub hyp: usize,
    pub reference: usize,
    pub matched: usize,
}

fn prepare(text: &str, cfg: &ChrfConfig) -> Vec<char> {
    if cfg.strip_whitespace {
        text.split_whitespace().flat_map(str::chars).collect()
    } else {
        text.chars().collect()
    }
}

fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Per-order statistics of `hypothesis` against a single reference.
pub fn chrf_stats(hypothesis: &str, reference: &str, cfg: &ChrfConfig) -> Vec<OrderStats> {
    let hyp = prepare(hypothesis, cfg);
    let reference = prepare(reference, cfg);
    (1..=cfg.max_char_order)
        .map(|n| {
            let h = ngram_counts(&hyp, n);
            let r = ngram_counts(&reference, n);
            let matched = h
                .iter()
                .map(|(gram, &c)| c.min(r.get(gram).copied().unwrap_or(0)))
                .sum();
            OrderStats {
                hyp: h.values().sum(),
                reference: r.values().sum(),
                matched,
            }
        })
        .collect()
}

/// F-score from per-order statistics.
///
/// By default precision and recall are averaged over the *effective* orders,
/// those where both sides have at least one n-gram, before combining them
/// into F-beta. With `eps_smoothing` the per-order F-scores are averaged
/// over all orders instead, with `epsilon` standing in for missing
/// precision or recall.
pub fn f_score(stats: &[OrderStats], cfg: &ChrfConfig) -> f64 {
    let eps = cfg.epsilon;
    let factor = cfg.beta * cfg.beta;
    let mut effective_order = 0usize;
    let mut avg_prec = 0.0;
    let mut avg_rec = 0.0;
    let mut smoothed = 0.0;
    for s in stats {
        // hypothesis n-grams only count when the reference has some
        let hyp = if s.reference > 0 { s.hyp } else { 0 };
        let prec = if hyp > 0 { s.matched as f64 / hyp as f64 } else { eps };
        let rec = if s.reference > 0 {
            s.matched as f64 / s.reference as f64
        } else {
            eps
        };
        let denom = factor * prec + rec;
        smoothed += if denom > 0.0 {
            (1.0 + factor) * prec * rec / denom
        } else {
            eps
        };
        if hyp > 0 && s.reference > 0 {
            avg_prec += prec;
            avg_rec += rec;
            effective_order += 1;
        }
    }
    if cfg.eps_smoothing {
        return (smoothed / stats.len() as f64).clamp(0.0, 1.0);
    }
    if effective_order == 0 {
        return 0.0;
    }
    avg_prec /= effective_order as f64;
    avg_rec /= effective_order as f64;
    if avg_prec + avg_rec == 0.0 {
        return 0.0;
    }
    let score = (1.0 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
    score.clamp(0.0, 1.0)
}

/// Sentence-level chrF in `[0, 1]`: the best score over all references.
pub fn chrf(hypothesis: &str, references: &[impl AsRef<str>], cfg: &ChrfConfig) -> Result<f64, MetricError> {
    cfg.validate()?;
    if references.is_empty() {
        return Err(MetricError::NoReferences);
    }
    Ok(references
        .iter()
        .map(|r| f_score(&chrf_stats(hypothesis, r.as_ref(), cfg), cfg))
        .fold(0.0, f64::max))
}

/// chrF with `beta = 1`.
pub fn chrf1(hypothesis: &str, references: &[impl AsRef<str>]) -> Result<f64, MetricError> {
    chrf(hypothesis, references, &ChrfConfig::default())
}
