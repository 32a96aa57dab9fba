use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the nine languages covered by the parallel corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageTag {
    En,
    Es,
    De,
    Zh,
    Ar,
    Hi,
    Uk,
    Ru,
    Am,
}

impl LanguageTag {
    /// All languages in the column order used by the result tables.
    pub const ALL: [LanguageTag; 9] = [
        LanguageTag::En,
        LanguageTag::Es,
        LanguageTag::De,
        LanguageTag::Zh,
        LanguageTag::Ar,
        LanguageTag::Hi,
        LanguageTag::Uk,
        LanguageTag::Ru,
        LanguageTag::Am,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LanguageTag::En => "en",
            LanguageTag::Es => "es",
            LanguageTag::De => "de",
            LanguageTag::Zh => "zh",
            LanguageTag::Ar => "ar",
            LanguageTag::Hi => "hi",
            LanguageTag::Uk => "uk",
            LanguageTag::Ru => "ru",
            LanguageTag::Am => "am",
        }
    }

    /// Whether words are separated by spaces in running text.
    pub fn is_space_delimited(self) -> bool {
        !matches!(self, LanguageTag::Zh)
    }

    /// Whether the script distinguishes upper and lower case.
    pub fn has_case(self) -> bool {
        matches!(
            self,
            LanguageTag::En | LanguageTag::Es | LanguageTag::De | LanguageTag::Uk | LanguageTag::Ru
        )
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported language tag {0:?}")]
pub struct UnknownLanguage(pub String);

impl FromStr for LanguageTag {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageTag::ALL
            .iter()
            .copied()
            .find(|l| l.code() == s)
            .ok_or_else(|| UnknownLanguage(s.to_string()))
    }
}
