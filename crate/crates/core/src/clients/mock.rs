//! Deterministic in-process stand-ins for the remote services.

use std::collections::HashMap;
use std::sync::Mutex;

use super::{ChatModel, ClientError, Detoxifier, Embedder, ToxicityClassifier, Translator};
use crate::lang::LanguageTag;
use crate::prompting::LlmParams;

/// Same non-toxic probability for every text.
#[derive(Debug, Clone, Copy)]
pub struct ConstantClassifier(pub f64);

impl ToxicityClassifier for ConstantClassifier {
    fn score_batch(&self, texts: &[String], _: LanguageTag) -> Result<Vec<f64>, ClientError> {
        Ok(vec![self.0; texts.len()])
    }
}

/// Returns the stored scores verbatim, whatever the input.
#[derive(Debug, Clone)]
pub struct FixedScores(pub Vec<f64>);

impl ToxicityClassifier for FixedScores {
    fn score_batch(&self, _: &[String], _: LanguageTag) -> Result<Vec<f64>, ClientError> {
        Ok(self.0.clone())
    }
}

/// Returns the stored vectors verbatim, whatever the input.
#[derive(Debug, Clone)]
pub struct FixedVectors(pub Vec<Vec<f64>>);

impl Embedder for FixedVectors {
    fn embed_batch(&self, _: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        Ok(self.0.clone())
    }
}

/// One-hot embeddings: each distinct text gets its own basis vector, in
/// first-seen order. Equal texts have SIM 1, different texts SIM 0.
#[derive(Debug)]
pub struct BasisEmbedder {
    dim: usize,
    seen: Mutex<HashMap<String, usize>>,
}

impl BasisEmbedder {
    pub fn new(dim: usize) -> Self {
        BasisEmbedder {
            dim,
            seen: Mutex::new(HashMap::new()),
        }
    }
}

impl Embedder for BasisEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        let mut seen = self.seen.lock().unwrap_or_else(|e| e.into_inner());
        texts
            .iter()
            .map(|t| {
                let next = seen.len();
                let idx = *seen.entry(t.clone()).or_insert(next);
                if idx >= self.dim {
                    return Err(ClientError::Malformed(format!(
                        "basis embedder exhausted after {} distinct texts",
                        self.dim
                    )));
                }
                let mut v = vec![0.0; self.dim];
                v[idx] = 1.0;
                Ok(v)
            })
            .collect()
    }
}

/// Bag of hashed character trigrams. Texts sharing wording get high SIM,
/// which is enough to exercise the pipeline offline.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    pub dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder { dim: 256 }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Embedder for HashingEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        Ok(texts
            .iter()
            .map(|t| {
                let chars: Vec<char> = format!(" {} ", t.to_lowercase()).chars().collect();
                let mut v = vec![0.0; self.dim];
                for w in chars.windows(3) {
                    let s: String = w.iter().collect();
                    v[(fnv1a(s.as_bytes()) % self.dim as u64) as usize] += 1.0;
                }
                v
            })
            .collect())
    }
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate_batch(&self, texts: &[String], _: LanguageTag, _: LanguageTag) -> Result<Vec<String>, ClientError> {
        Ok(texts.to_vec())
    }
}

/// Replaces listed substrings, in list order. Unlisted text passes through.
#[derive(Debug, Clone, Default)]
pub struct MarkerTranslator {
    pairs: Vec<(String, String)>,
}

impl MarkerTranslator {
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        MarkerTranslator {
            pairs: pairs.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

impl Translator for MarkerTranslator {
    fn translate_batch(&self, texts: &[String], _: LanguageTag, _: LanguageTag) -> Result<Vec<String>, ClientError> {
        Ok(texts
            .iter()
            .map(|t| self.pairs.iter().fold(t.clone(), |acc, (from, to)| acc.replace(from, to)))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDetoxifier;

impl Detoxifier for IdentityDetoxifier {
    fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
        Ok(texts.to_vec())
    }
}

/// Drops whitespace-separated words found in its list, case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct WordDropDetoxifier {
    words: Vec<String>,
}

impl WordDropDetoxifier {
    pub fn new<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        WordDropDetoxifier {
            words: words.into_iter().map(str::to_lowercase).collect(),
        }
    }
}

impl Detoxifier for WordDropDetoxifier {
    fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
        Ok(texts
            .iter()
            .map(|t| {
                t.split_whitespace()
                    .filter(|w| !self.words.contains(&w.to_lowercase()))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect())
    }
}

/// Chat model backed by a closure over the prompt.
pub struct FnChat<F>(pub F);

impl<F> ChatModel for FnChat<F>
where
    F: Fn(&str) -> Result<String, ClientError> + Send + Sync,
{
    fn complete(&self, prompt: &str, _: &LlmParams) -> Result<String, ClientError> {
        (self.0)(prompt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashing_embedder_is_stable_and_graded() {
        let e = HashingEmbedder::default();
        let v = e
            .embed(&[
                "you are wrong".to_string(),
                "you are wrong".to_string(),
                "you are so wrong".to_string(),
                "banana".to_string(),
            ])
            .unwrap();
        let s = |a: usize, b: usize| crate::metrics::sim(&v[a], &v[b]).unwrap();
        assert!((s(0, 1) - 1.0).abs() < 1e-12);
        assert!(s(0, 2) > s(0, 3));
    }

    #[test]
    fn word_drop() {
        let d = WordDropDetoxifier::new(["damn"]);
        assert_eq!(d.detoxify(&["Damn this  car".to_string()]).unwrap(), vec!["this car".to_string()]);
    }

    #[test]
    fn basis_runs_out() {
        let e = BasisEmbedder::new(1);
        assert!(e.embed(&["a".to_string(), "b".to_string()]).is_err());
    }
}
