//! Prompt construction, response parsing and the LLM detoxification
//! pipelines (few-shot and cluster-conditioned chain of thought).

pub mod parse;
pub mod pipeline;
pub mod templates;

use serde::{Deserialize, Serialize};

pub use parse::{contains_key, parse_detox_response, parse_feature_response, ParsedDetoxResponse, ParsedFeatures};
pub use pipeline::{
    align_to_descriptions, run_detox, AuditRecord, CotContext, DetoxMode, DetoxRun, FlaggedSample, RetryPolicy,
    CLUSTER_DESCRIPTIONS,
};
pub use templates::{
    build_cot_prompt, build_cot_prompt_with, build_descriptive_prompt, build_edit_explanation_prompt,
    build_few_shot_prompt, cot_example, render, CotExample, PromptFamily,
};

/// Sampling parameters sent with every chat request. Defaults are the
/// provider defaults used for the reported runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmParams {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
}

impl Default for LlmParams {
    fn default() -> Self {
        LlmParams {
            model: "gpt-4".to_string(),
            endpoint: None,
            temperature: 1.0,
            top_p: 1.0,
            top_k: 0.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("placeholder {{{0}}} has no value")]
    Unbound(&'static str),
    #[error("cluster {cluster} out of range for k = {k}")]
    UnknownCluster { cluster: usize, k: usize },
    #[error("exemplar {0} not found in the exemplar corpus")]
    MissingExemplar(String),
    #[error("response has no `{key}` field")]
    MissingKey { key: &'static str, raw: String },
    #[error("response field `{key}` is empty")]
    EmptyValue { key: &'static str, raw: String },
}
