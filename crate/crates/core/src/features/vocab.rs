//! The closed keyword vocabulary used by the descriptive-feature analysis.

use serde::{Deserialize, Serialize};

/// Keyword list in prompt order. The prompt lists "Friendly" twice; the
/// second slot holds "Aggressive", which the analysed records use but the
/// list omits. Indices are stable across runs.
pub const KEYWORDS: [&str; 28] = [
    "Neutral",
    "Informative",
    "Casual",
    "Assertive",
    "Dismissive",
    "Condescending",
    "Friendly",
    "Commanding",
    "Instructive",
    "Derogatory",
    "Confrontational",
    "Insulting",
    "Vulgar",
    "Formal",
    "Informal",
    "Offensive",
    "Technical",
    "Playful",
    "Positive",
    "Frustration",
    "Analytical",
    "Professional",
    "Hostile",
    "Hatred",
    "Helpful",
    "Angry",
    "Aggressive",
    "Arrogant",
];

/// Spelling variants accepted on input, mapped to vocabulary terms.
const ALIASES: [(&str, &str); 1] = [("frustrated", "Frustration")];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordVocabulary {
    terms: Vec<String>,
}

impl Default for KeywordVocabulary {
    fn default() -> Self {
        KeywordVocabulary {
            terms: KEYWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl KeywordVocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    /// Case-insensitive lookup, aliases included.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        let w = word.trim().to_lowercase();
        let w = ALIASES
            .iter()
            .find(|(alias, _)| *alias == w)
            .map(|(_, term)| term.to_lowercase())
            .unwrap_or(w);
        self.terms.iter().position(|t| t.to_lowercase() == w)
    }

    /// Canonical spelling of `word`, if it is in the vocabulary.
    pub fn canonical(&self, word: &str) -> Option<&str> {
        self.index_of(word).map(|i| self.term(i))
    }

    /// Encoded dimension: toxicity one-hot plus three keyword blocks.
    pub fn encoded_dim(&self) -> usize {
        3 + 3 * self.len()
    }
}
