//! Descriptive-feature records, their JSONL wire form and binary encoding.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::vocab::KeywordVocabulary;
use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ToxicityLevel {
    Low,
    Medium,
    High,
}

impl ToxicityLevel {
    pub const ALL: [ToxicityLevel; 3] = [ToxicityLevel::Low, ToxicityLevel::Medium, ToxicityLevel::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ToxicityLevel::Low => "Low",
            ToxicityLevel::Medium => "Medium",
            ToxicityLevel::High => "High",
        }
    }
}

impl fmt::Display for ToxicityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ToxicityLevel {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "low" => Ok(ToxicityLevel::Low),
            "medium" => Ok(ToxicityLevel::Medium),
            "high" => Ok(ToxicityLevel::High),
            _ => Err(FeatureError::BadToxicityLevel(s.trim().to_string())),
        }
    }
}

/// One analysed sentence. Field names on the wire mirror the analysis
/// structure of the descriptive prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureProfile {
    #[serde(rename = "id")]
    pub sentence_id: String,
    #[serde(rename = "Sentence", default)]
    pub sentence: String,
    #[serde(rename = "Toxicity Level")]
    pub toxicity_level: ToxicityLevel,
    #[serde(rename = "Tone")]
    pub tone: Vec<String>,
    #[serde(rename = "Language")]
    pub language_type: Vec<String>,
    #[serde(rename = "Implied Sentiment")]
    pub implied_sentiment: Vec<String>,
    #[serde(rename = "Context", default)]
    pub context: String,
    #[serde(rename = "Negative Connotations", default)]
    pub negative_connotations: Vec<String>,
    #[serde(rename = "Intent", default)]
    pub intent: String,
}

/// Which keyword block a field encodes into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Tone,
    Language,
    ImpliedSentiment,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Tone, Block::Language, Block::ImpliedSentiment];

    pub fn field_name(self) -> &'static str {
        match self {
            Block::Tone => "Tone",
            Block::Language => "Language",
            Block::ImpliedSentiment => "Implied Sentiment",
        }
    }

    fn ordinal(self) -> usize {
        self as usize
    }

    /// Offset of this block in an encoded vector.
    pub fn offset(self, vocab: &KeywordVocabulary) -> usize {
        3 + self.ordinal() * vocab.len()
    }
}

impl FeatureProfile {
    pub fn block(&self, block: Block) -> &[String] {
        match block {
            Block::Tone => &self.tone,
            Block::Language => &self.language_type,
            Block::ImpliedSentiment => &self.implied_sentiment,
        }
    }

    /// Vocabulary indices present in one block.
    pub fn block_indices(&self, block: Block, vocab: &KeywordVocabulary) -> Result<Vec<usize>, FeatureError> {
        self.block(block)
            .iter()
            .map(|w| {
                vocab.index_of(w).ok_or_else(|| FeatureError::OutOfVocabulary {
                    field: block.field_name(),
                    keyword: w.clone(),
                })
            })
            .collect()
    }
}

/// Binary feature vector for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedProfile {
    pub id: String,
    pub vector: Vec<f64>,
}

/// Toxicity one-hot, then multi-hot tone, language and sentiment blocks.
pub fn encode_profile(profile: &FeatureProfile, vocab: &KeywordVocabulary) -> Result<EncodedProfile, FeatureError> {
    let mut vector = vec![0.0; vocab.encoded_dim()];
    vector[profile.toxicity_level.index()] = 1.0;
    for block in Block::ALL {
        let idx = profile.block_indices(block, vocab)?;
        if idx.is_empty() {
            return Err(FeatureError::EmptyBlock(block.field_name()));
        }
        let off = block.offset(vocab);
        for i in idx {
            vector[off + i] = 1.0;
        }
    }
    Ok(EncodedProfile {
        id: profile.sentence_id.clone(),
        vector,
    })
}

/// Toxicity level read back from the one-hot block of an encoded vector.
pub fn decode_toxicity(vector: &[f64]) -> Option<ToxicityLevel> {
    let hot: Vec<usize> = (0..3.min(vector.len())).filter(|&i| vector[i] == 1.0).collect();
    match hot.as_slice() {
        [i] => Some(ToxicityLevel::ALL[*i]),
        _ => None,
    }
}

pub fn parse_profiles(content: &str) -> Result<Vec<FeatureProfile>, FeatureError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: FeatureProfile = serde_json::from_str(line).map_err(|e| FeatureError::Record {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(p.sentence_id.clone()) {
            return Err(FeatureError::Record {
                line: i + 1,
                message: format!("duplicate id {}", p.sentence_id),
            });
        }
        out.push(p);
    }
    Ok(out)
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<FeatureProfile>, FeatureError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| FeatureError::Io(format!("{}: {e}", path.display())))?;
    parse_profiles(&content)
}

pub fn profiles_to_jsonl(profiles: &[FeatureProfile]) -> String {
    let mut out = String::new();
    for p in profiles {
        out.push_str(&serde_json::to_string(p).expect("profile serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn profile(id: &str, level: ToxicityLevel, tone: &[&str], lang: &[&str], sent: &[&str]) -> FeatureProfile {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        FeatureProfile {
            sentence_id: id.into(),
            sentence: String::new(),
            toxicity_level: level,
            tone: v(tone),
            language_type: v(lang),
            implied_sentiment: v(sent),
            context: String::new(),
            negative_connotations: Vec::new(),
            intent: String::new(),
        }
    }

    #[test]
    fn four_ones_for_single_keywords() {
        let vocab = KeywordVocabulary::default();
        let p = profile("a", ToxicityLevel::High, &["Aggressive"], &["Vulgar"], &["Hostile"]);
        let e = encode_profile(&p, &vocab).unwrap();
        assert_eq!(e.vector.len(), 87);
        assert_eq!(e.vector.iter().sum::<f64>(), 4.0);
        assert_eq!(decode_toxicity(&e.vector), Some(ToxicityLevel::High));
    }

    #[test]
    fn level_swap_moves_two_positions() {
        let vocab = KeywordVocabulary::default();
        let lo = profile("a", ToxicityLevel::Low, &["Casual"], &["Informal"], &["Neutral"]);
        let hi = FeatureProfile {
            toxicity_level: ToxicityLevel::High,
            ..lo.clone()
        };
        let a = encode_profile(&lo, &vocab).unwrap().vector;
        let b = encode_profile(&hi, &vocab).unwrap().vector;
        assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 2);
    }

    #[test]
    fn multi_keyword_block() {
        let vocab = KeywordVocabulary::default();
        let p = profile("a", ToxicityLevel::Medium, &["Aggressive", "Frustrated"], &["Vulgar"], &["Angry"]);
        let e = encode_profile(&p, &vocab).unwrap();
        let off = Block::Tone.offset(&vocab);
        assert_eq!(e.vector[off..off + 28].iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn out_of_vocabulary_is_named() {
        let vocab = KeywordVocabulary::default();
        let p = profile("a", ToxicityLevel::Low, &["Surprised"], &["Informal"], &["Neutral"]);
        let err = encode_profile(&p, &vocab).unwrap_err();
        assert!(err.to_string().contains("Surprised"), "{err}");
        let empty = profile("a", ToxicityLevel::Low, &[], &["Informal"], &["Neutral"]);
        assert!(matches!(encode_profile(&empty, &vocab), Err(FeatureError::EmptyBlock("Tone"))));
    }

    #[test]
    fn wire_round_trip() {
        let p = profile("x1", ToxicityLevel::High, &["Aggressive"], &["Insulting", "Offensive"], &["Hostile"]);
        let text = profiles_to_jsonl(std::slice::from_ref(&p));
        assert!(text.contains("\"Toxicity Level\":\"High\""));
        assert!(text.contains("\"Implied Sentiment\":[\"Hostile\"]"));
        assert_eq!(parse_profiles(&text).unwrap(), vec![p]);
        let dup = format!("{text}{text}");
        assert!(parse_profiles(&dup).is_err());
    }

    #[test]
    fn level_parsing_is_case_insensitive() {
        assert_eq!("medium".parse::<ToxicityLevel>().unwrap(), ToxicityLevel::Medium);
        assert!("severe".parse::<ToxicityLevel>().is_err());
    }
}
