//! Prompt templates and rendering.
//!
//! Templates are plain-text assets under `templates/`. Placeholders are
//! `{name}` with names from a fixed list; any other braced text (such as
//! `{Specify here}` or the structure braces) is literal. Substitution is a
//! single left-to-right pass and inserted values are never rescanned, so
//! sentences containing braces or placeholder-like text need no escaping.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::corpus::Corpus;
use crate::features::{ClusterModel, ToxicityLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptFamily {
    Descriptive,
    FewShot,
    Cot,
    EditExplanation,
}

impl PromptFamily {
    pub const ALL: [PromptFamily; 4] = [
        PromptFamily::Descriptive,
        PromptFamily::FewShot,
        PromptFamily::Cot,
        PromptFamily::EditExplanation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptFamily::Descriptive => "descriptive",
            PromptFamily::FewShot => "few_shot",
            PromptFamily::Cot => "cot",
            PromptFamily::EditExplanation => "edit_explanation",
        }
    }

    fn asset(self) -> &'static str {
        match self {
            PromptFamily::Descriptive => include_str!("templates/descriptive.txt"),
            PromptFamily::FewShot => include_str!("templates/few_shot.txt"),
            PromptFamily::Cot => include_str!("templates/cot.txt"),
            PromptFamily::EditExplanation => include_str!("templates/edit_explanation.txt"),
        }
    }

    /// Template body without the asset file's final newline.
    pub fn body(self) -> &'static str {
        let a = self.asset();
        a.strip_suffix('\n').unwrap_or(a)
    }
}

pub const SENTENCE: &str = "sentence";
pub const CLUSTER: &str = "cluster";
pub const TOXIC_TEXT: &str = "toxic text";
pub const DETOXIFIED_TEXT: &str = "detoxified text";
pub const EXAMPLE_SENTENCE: &str = "example sentence";
pub const EXAMPLE_TOXICITY: &str = "example toxicity level";
pub const EXAMPLE_CLUSTER: &str = "example cluster";
pub const EXAMPLE_FIXED: &str = "example fixed sentence";

pub const PLACEHOLDERS: [&str; 8] = [
    SENTENCE,
    CLUSTER,
    TOXIC_TEXT,
    DETOXIFIED_TEXT,
    EXAMPLE_SENTENCE,
    EXAMPLE_TOXICITY,
    EXAMPLE_CLUSTER,
    EXAMPLE_FIXED,
];

/// Placeholder names occurring in `template`, in order.
pub fn placeholders(template: &str) -> Vec<&'static str> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match PLACEHOLDERS.iter().find(|p| after.starts_with(*p) && after[p.len()..].starts_with('}')) {
            Some(p) => {
                out.push(*p);
                rest = &after[p.len() + 1..];
            }
            None => rest = after,
        }
    }
    out
}

/// Fills every placeholder of `template` from `values` in one pass.
pub fn render(template: &str, values: &HashMap<&str, String>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match PLACEHOLDERS.iter().find(|p| after.starts_with(*p) && after[p.len()..].starts_with('}')) {
            Some(p) => {
                let v = values.get(p).ok_or(PromptError::Unbound(p))?;
                out.push_str(v);
                rest = &after[p.len() + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

fn non_empty<'a>(what: &'static str, text: &'a str) -> Result<&'a str, PromptError> {
    if text.trim().is_empty() {
        Err(PromptError::EmptyInput(what))
    } else {
        Ok(text)
    }
}

pub fn build_descriptive_prompt(sentence: &str) -> Result<String, PromptError> {
    let values = HashMap::from([(SENTENCE, non_empty("sentence", sentence)?.to_string())]);
    render(PromptFamily::Descriptive.body(), &values)
}

pub fn build_few_shot_prompt(sentence: &str) -> Result<String, PromptError> {
    let values = HashMap::from([(SENTENCE, non_empty("sentence", sentence)?.to_string())]);
    render(PromptFamily::FewShot.body(), &values)
}

/// The worked example appended to a chain-of-thought prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotExample {
    pub sentence: String,
    pub toxicity_level: ToxicityLevel,
    pub cluster: usize,
    pub fixed_sentence: String,
}

pub fn build_cot_prompt_with(sentence: &str, cluster: usize, example: &CotExample) -> Result<String, PromptError> {
    let values = HashMap::from([
        (SENTENCE, non_empty("sentence", sentence)?.to_string()),
        (CLUSTER, cluster.to_string()),
        (EXAMPLE_SENTENCE, example.sentence.clone()),
        (EXAMPLE_TOXICITY, example.toxicity_level.to_string()),
        (EXAMPLE_CLUSTER, example.cluster.to_string()),
        (EXAMPLE_FIXED, example.fixed_sentence.clone()),
    ]);
    render(PromptFamily::Cot.body(), &values)
}

/// The cluster's exemplar pair, resolved against `corpus`.
pub fn cot_example(cluster: usize, model: &ClusterModel, corpus: &Corpus) -> Result<CotExample, PromptError> {
    if cluster >= model.k {
        return Err(PromptError::UnknownCluster { cluster, k: model.k });
    }
    let ex = &model.exemplars[cluster];
    let pair = corpus.get(&ex.id).ok_or_else(|| PromptError::MissingExemplar(ex.id.clone()))?;
    let level = ex.toxicity_level.ok_or_else(|| PromptError::MissingExemplar(ex.id.clone()))?;
    Ok(CotExample {
        sentence: pair.toxic.clone(),
        toxicity_level: level,
        cluster,
        fixed_sentence: pair.first_reference().to_string(),
    })
}

/// Chain-of-thought prompt for `sentence` in `cluster`, with that
/// cluster's exemplar as the worked example.
pub fn build_cot_prompt(sentence: &str, cluster: usize, model: &ClusterModel, corpus: &Corpus) -> Result<String, PromptError> {
    let example = cot_example(cluster, model, corpus)?;
    build_cot_prompt_with(sentence, cluster, &example)
}

pub fn build_edit_explanation_prompt(toxic: &str, detoxified: &str) -> Result<String, PromptError> {
    let values = HashMap::from([
        (TOXIC_TEXT, non_empty("toxic text", toxic)?.to_string()),
        (DETOXIFIED_TEXT, non_empty("detoxified text", detoxified)?.to_string()),
    ]);
    render(PromptFamily::EditExplanation.body(), &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_family_has_expected_placeholders() {
        assert_eq!(placeholders(PromptFamily::Descriptive.body()), vec![SENTENCE]);
        assert_eq!(placeholders(PromptFamily::FewShot.body()), vec![SENTENCE]);
        assert_eq!(
            placeholders(PromptFamily::Cot.body()),
            vec![SENTENCE, CLUSTER, EXAMPLE_SENTENCE, EXAMPLE_TOXICITY, EXAMPLE_CLUSTER, EXAMPLE_FIXED]
        );
        assert_eq!(placeholders(PromptFamily::EditExplanation.body()), vec![TOXIC_TEXT, DETOXIFIED_TEXT]);
    }

    #[test]
    fn values_are_not_rescanned() {
        let p = build_descriptive_prompt("say {sentence} and {cluster}").unwrap();
        assert_eq!(p.matches("say {sentence} and {cluster}").count(), 1);
        assert!(p.contains("Toxicity Level: Specify here (Low/Medium/High)"));
    }

    #[test]
    fn literal_braces_survive() {
        let p = build_cot_prompt_with(
            "x",
            1,
            &CotExample {
                sentence: "a".into(),
                toxicity_level: ToxicityLevel::Low,
                cluster: 1,
                fixed_sentence: "b".into(),
            },
        )
        .unwrap();
        assert!(p.contains("Toxicity level: {Specify here},"));
        assert!(p.contains("    Cluster: 1,\n"));
    }

    #[test]
    fn missing_values_and_inputs() {
        assert!(matches!(render("{sentence}", &HashMap::new()), Err(PromptError::Unbound("sentence"))));
        assert!(matches!(build_few_shot_prompt("  "), Err(PromptError::EmptyInput(_))));
        assert!(build_edit_explanation_prompt("a", "").is_err());
    }

    #[test]
    fn edit_prompt_is_one_line() {
        assert_eq!(
            build_edit_explanation_prompt("You made a mistake you a**.", "You made a mistake.").unwrap(),
            "Answer shortly, how this text: You made a mistake you a**. was rephrased into this: You made a mistake."
        );
    }
}
