//! Style-transfer accuracy: probability that an output is non-toxic.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::clients::ToxicityClassifier;
use crate::lang::LanguageTag;
use crate::lexicon::LexiconStore;

/// Whether STA keeps the scorer's probability or thresholds it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum StaMode {
    #[default]
    Probability,
    Binarized { threshold: f64 },
}


impl StaMode {
    pub fn binarized() -> Self {
        StaMode::Binarized { threshold: 0.5 }
    }

    pub fn apply(self, p: f64) -> f64 {
        match self {
            StaMode::Probability => p,
            StaMode::Binarized { threshold } => {
                if p >= threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Anything that can score texts for non-toxicity.
pub trait StyleScorer: Send + Sync {
    fn non_toxic(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, String>;

    /// Short identity recorded in report metadata.
    fn describe(&self) -> String;
}

/// Offline fallback: 1.0 when no lexicon entry matches, else 0.0.
pub struct LexiconScorer {
    lexicon: LexiconStore,
}

impl LexiconScorer {
    pub fn new(lexicon: LexiconStore) -> Self {
        LexiconScorer { lexicon }
    }
}

impl StyleScorer for LexiconScorer {
    fn non_toxic(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, String> {
        Ok(texts
            .iter()
            .map(|t| if self.lexicon.is_toxic(t, lang) { 0.0 } else { 1.0 })
            .collect())
    }

    fn describe(&self) -> String {
        "lexicon-fallback".to_string()
    }
}

/// Adapter over a toxicity classifier client. The classifier's
/// probabilities are passed through unmodified.
pub struct RemoteScorer<C> {
    client: C,
    label: String,
}

impl<C: ToxicityClassifier> RemoteScorer<C> {
    pub fn new(client: C, label: impl Into<String>) -> Self {
        RemoteScorer {
            client,
            label: label.into(),
        }
    }
}

impl<C: ToxicityClassifier> StyleScorer for RemoteScorer<C> {
    fn non_toxic(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, String> {
        self.client.classify(texts, lang).map_err(|e| e.to_string())
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// STA for each `(sample_id, text)`, in input order. On a batch failure the
/// samples are rescored one by one so the error names the failing sample.
pub fn sta(
    samples: &[(String, String)],
    lang: LanguageTag,
    scorer: &dyn StyleScorer,
    mode: StaMode,
) -> Result<Vec<f64>, MetricError> {
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<String> = samples.iter().map(|(_, t)| t.clone()).collect();
    let scores = match scorer.non_toxic(&texts, lang) {
        Ok(s) => s,
        Err(_) => {
            let mut out = Vec::with_capacity(samples.len());
            for (id, text) in samples {
                let s = scorer
                    .non_toxic(std::slice::from_ref(text), lang)
                    .map_err(|message| MetricError::Scorer {
                        sample: id.clone(),
                        message,
                    })?;
                if s.len() != 1 {
                    return Err(MetricError::Scorer {
                        sample: id.clone(),
                        message: format!("expected 1 score, got {}", s.len()),
                    });
                }
                out.push(s[0]);
            }
            out
        }
    };
    if scores.len() != samples.len() {
        return Err(MetricError::Scorer {
            sample: samples[0].0.clone(),
            message: format!("expected {} scores, got {}", samples.len(), scores.len()),
        });
    }
    for ((id, _), &s) in samples.iter().zip(&scores) {
        if !(0.0..=1.0).contains(&s) {
            return Err(MetricError::Scorer {
                sample: id.clone(),
                message: format!("score {s} out of range"),
            });
        }
    }
    Ok(scores.into_iter().map(|p| mode.apply(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::mock::ConstantClassifier;

    fn samples(texts: &[&str]) -> Vec<(String, String)> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("s{i}"), t.to_string()))
            .collect()
    }

    #[test]
    fn lexicon_fallback_is_binary() {
        let scorer = LexiconScorer::new(LexiconStore::from_entries(LanguageTag::En, ["idiot"]));
        let got = sta(&samples(&["you idiot", "you genius"]), LanguageTag::En, &scorer, StaMode::Probability).unwrap();
        assert_eq!(got, vec![0.0, 1.0]);
    }

    #[test]
    fn remote_probability_passes_through() {
        let scorer = RemoteScorer::new(ConstantClassifier(0.83), "const");
        let got = sta(&samples(&["x"]), LanguageTag::En, &scorer, StaMode::Probability).unwrap();
        assert_eq!(got, vec![0.83]);
        let bin = sta(&samples(&["x"]), LanguageTag::En, &scorer, StaMode::binarized()).unwrap();
        assert_eq!(bin, vec![1.0]);
    }

    struct FailsOn(&'static str);

    impl StyleScorer for FailsOn {
        fn non_toxic(&self, texts: &[String], _: LanguageTag) -> Result<Vec<f64>, String> {
            if texts.iter().any(|t| t == self.0) {
                Err("boom".into())
            } else {
                Ok(vec![0.5; texts.len()])
            }
        }
        fn describe(&self) -> String {
            "fails".into()
        }
    }

    #[test]
    fn failure_names_the_sample() {
        let err = sta(&samples(&["ok", "bad", "ok"]), LanguageTag::En, &FailsOn("bad"), StaMode::Probability)
            .unwrap_err();
        match err {
            MetricError::Scorer { sample, message } => {
                assert_eq!(sample, "s1");
                assert_eq!(message, "boom");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
