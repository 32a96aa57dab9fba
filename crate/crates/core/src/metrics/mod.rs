//! Automatic evaluation: STA, SIM, ChrF1, the joint score J, and token-level
//! Levenshtein distance.

pub mod chrf;
pub mod levenshtein;
pub mod style;

use serde::{Deserialize, Serialize};

pub use chrf::{chrf, chrf1, ChrfConfig};
pub use levenshtein::{align, levenshtein, Alignment, EditKind, EditOp};
pub use style::{LexiconScorer, RemoteScorer, StaMode, StyleScorer};

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("no references given")]
    NoReferences,
    #[error("invalid chrF config: {0}")]
    InvalidConfig(String),
    #[error("embedding dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero embedding vector")]
    ZeroVector,
    #[error("non-finite embedding entry")]
    NonFinite,
    #[error("joint score needs at least one sample")]
    EmptyScores,
    #[error("style scorer failed for sample {sample}: {message}")]
    Scorer { sample: String, message: String },
}

/// Per-sample STA, SIM and ChrF1 with their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub sta: f64,
    pub sim: f64,
    pub chrf: f64,
    pub j: f64,
}

impl ScoreTriple {
    pub fn new(sta: f64, sim: f64, chrf: f64) -> Self {
        ScoreTriple {
            sta,
            sim,
            chrf,
            j: sta * sim * chrf,
        }
    }
}

/// Cosine similarity between two embeddings, with negative values clamped
/// to 0.
pub fn sim(source: &[f64], output: &[f64]) -> Result<f64, MetricError> {
    if source.len() != output.len() {
        return Err(MetricError::DimensionMismatch(source.len(), output.len()));
    }
    if source.iter().chain(output).any(|x| !x.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let dot: f64 = source.iter().zip(output).map(|(a, b)| a * b).sum();
    let na = source.iter().map(|x| x * x).sum::<f64>();
    let nb = output.iter().map(|x| x * x).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return Err(MetricError::ZeroVector);
    }
    // one square root of the product keeps sim(v, v) exactly 1
    Ok((dot / (na * nb).sqrt()).clamp(0.0, 1.0))
}

/// J = (1/n) * sum of sta * sim * chrf over samples.
pub fn joint_score(triples: &[ScoreTriple]) -> Result<f64, MetricError> {
    if triples.is_empty() {
        return Err(MetricError::EmptyScores);
    }
    let total: f64 = triples.iter().map(|t| t.sta * t.sim * t.chrf).sum();
    Ok(total / triples.len() as f64)
}

/// Arithmetic mean of one component, in sample order.
pub fn mean_of(triples: &[ScoreTriple], field: impl Fn(&ScoreTriple) -> f64) -> f64 {
    if triples.is_empty() {
        return 0.0;
    }
    triples.iter().map(field).sum::<f64>() / triples.len() as f64
}
