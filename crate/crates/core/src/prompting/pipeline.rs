//! LLM detoxification runs with retry, flagging and an audit trail.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::parse::{parse_detox_response, parse_feature_response};
use super::templates::{build_cot_prompt_with, build_descriptive_prompt, build_few_shot_prompt, cot_example, CotExample};
use super::LlmParams;
use crate::clients::{run_bounded, ChatModel, ClientError};
use crate::corpus::{Corpus, ParallelPair, SystemOutput};
use crate::features::{encode_profile, Block, ClusterModel, FeatureError, FeatureProfile, KeywordVocabulary};

/// Keywords naming each cluster in the chain-of-thought prompt, by index.
pub const CLUSTER_DESCRIPTIONS: [[&str; 3]; 3] = [
    ["Offensive", "Hostile", "Vulgar"],
    ["Condescending", "Derogatory", "Hostile"],
    ["Informal", "Casual", "Dismissive"],
];

/// Renumbers a fitted 3-cluster model so each cluster index matches the
/// prompt's description of that index as closely as possible. Fitted
/// cluster numbers are arbitrary, while the prompt text is fixed.
///
/// The score of putting fitted cluster `c` at index `d` is the summed
/// member frequency of description `d`'s keywords (in any block). The
/// best-scoring permutation wins; ties go to the first in lexicographic
/// order. Models with `k != 3` are returned unchanged.
pub fn align_to_descriptions(
    model: &ClusterModel,
    profiles: &[FeatureProfile],
    vocab: &KeywordVocabulary,
) -> Result<ClusterModel, FeatureError> {
    if model.k != CLUSTER_DESCRIPTIONS.len() {
        return Ok(model.clone());
    }
    let k = model.k;
    let mut score = vec![vec![0.0; k]; k];
    let mut sizes = vec![0usize; k];
    for p in profiles {
        let Some(&c) = model.assignments.get(&p.sentence_id) else {
            continue;
        };
        sizes[c] += 1;
        let mut present = vec![false; vocab.len()];
        for block in Block::ALL {
            for i in p.block_indices(block, vocab)? {
                present[i] = true;
            }
        }
        for (d, words) in CLUSTER_DESCRIPTIONS.iter().enumerate() {
            for w in words {
                if vocab.index_of(w).is_some_and(|i| present[i]) {
                    score[c][d] += 1.0;
                }
            }
        }
    }
    for c in 0..k {
        if sizes[c] > 0 {
            score[c].iter_mut().for_each(|s| *s /= sizes[c] as f64);
        }
    }
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = perms[0];
    let mut best_score = f64::NEG_INFINITY;
    for perm in perms {
        let s: f64 = (0..k).map(|c| score[c][perm[c]]).sum();
        if s > best_score {
            best = perm;
            best_score = s;
        }
    }
    model.permuted(&best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Extra attempts after an unparseable response.
    pub max_retries: usize,
    /// Appended to the prompt on retry.
    pub reminder: String,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 1,
            reminder: "Please respond in the exact structure given above.".to_string(),
        }
    }
}

impl RetryPolicy {
    pub fn retry_prompt(&self, prompt: &str) -> String {
        format!("{prompt}\n\n{}", self.reminder)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetoxMode {
    FewShot,
    Cot,
}

impl DetoxMode {
    pub fn default_system(self) -> &'static str {
        match self {
            DetoxMode::FewShot => "llm_few_shot",
            DetoxMode::Cot => "llm_cot",
        }
    }
}

/// One prompt/response exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub pair_id: String,
    pub stage: String,
    pub attempt: usize,
    pub prompt: String,
    pub response: Option<String>,
    pub error: Option<String>,
    pub params: LlmParams,
}

/// A sample with no output after all retries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSample {
    pub pair_id: String,
    pub stage: String,
    pub reason: String,
}

/// What a chain-of-thought run needs besides the chat model.
pub struct CotContext<'a> {
    pub model: &'a ClusterModel,
    /// Corpus holding the exemplar pairs (normally the train split).
    pub exemplars: &'a Corpus,
    pub vocab: &'a KeywordVocabulary,
    /// Profiles already extracted, by pair id. Pairs without one go
    /// through the descriptive prompt first.
    pub profiles: HashMap<String, FeatureProfile>,
}

#[derive(Debug, Clone, Default)]
pub struct DetoxRun {
    pub outputs: Vec<SystemOutput>,
    pub flagged: Vec<FlaggedSample>,
    pub audit: Vec<AuditRecord>,
    /// Profiles extracted during this run.
    pub profiles: Vec<FeatureProfile>,
}

impl DetoxRun {
    pub fn audit_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.audit {
            out.push_str(&serde_json::to_string(r).expect("audit record serializes"));
            out.push('\n');
        }
        out
    }
}

struct Sample {
    output: Option<SystemOutput>,
    flag: Option<FlaggedSample>,
    audit: Vec<AuditRecord>,
    profile: Option<FeatureProfile>,
}

struct Asker<'a> {
    chat: &'a dyn ChatModel,
    params: &'a LlmParams,
    policy: &'a RetryPolicy,
    pair_id: &'a str,
    audit: Vec<AuditRecord>,
}

impl Asker<'_> {
    /// Sends `prompt`, retrying with the reminder while `parse` fails.
    /// Returns the last parse error when every attempt fails.
    fn ask<T>(
        &mut self,
        stage: &str,
        prompt: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Result<T, String>, ClientError> {
        let mut last = String::new();
        for attempt in 0..=self.policy.max_retries {
            let p = if attempt == 0 {
                prompt.to_string()
            } else {
                self.policy.retry_prompt(prompt)
            };
            let mut record = AuditRecord {
                pair_id: self.pair_id.to_string(),
                stage: stage.to_string(),
                attempt: attempt + 1,
                prompt: p.clone(),
                response: None,
                error: None,
                params: self.params.clone(),
            };
            let response = match self.chat.chat(&p, self.params) {
                Ok(r) => r,
                Err(e) => {
                    record.error = Some(e.to_string());
                    self.audit.push(record);
                    return Err(e);
                }
            };
            record.response = Some(response.clone());
            let parsed = parse(&response);
            if let Err(e) = &parsed {
                record.error = Some(e.clone());
                last = e.clone();
            }
            self.audit.push(record);
            if let Ok(v) = parsed {
                return Ok(Ok(v));
            }
        }
        Ok(Err(last))
    }
}

fn detox_one(
    pair: &ParallelPair,
    mode: DetoxMode,
    system: &str,
    chat: &dyn ChatModel,
    params: &LlmParams,
    policy: &RetryPolicy,
    cot: Option<&CotContext<'_>>,
) -> Result<Sample, ClientError> {
    let mut asker = Asker {
        chat,
        params,
        policy,
        pair_id: &pair.id,
        audit: Vec::new(),
    };
    let flag = |stage: &str, reason: String, audit: Vec<AuditRecord>, profile: Option<FeatureProfile>| Sample {
        output: None,
        flag: Some(FlaggedSample {
            pair_id: pair.id.clone(),
            stage: stage.to_string(),
            reason,
        }),
        audit,
        profile,
    };
    let detox_parse = |r: &str| parse_detox_response(r).map_err(|e| e.to_string());

    match mode {
        DetoxMode::FewShot => {
            let prompt = match build_few_shot_prompt(&pair.toxic) {
                Ok(p) => p,
                Err(e) => return Ok(flag("few_shot", e.to_string(), asker.audit, None)),
            };
            match asker.ask("few_shot", &prompt, detox_parse)? {
                Ok(parsed) => Ok(Sample {
                    output: Some(SystemOutput::new(pair, system, parsed.fixed_sentence)),
                    flag: None,
                    audit: asker.audit,
                    profile: None,
                }),
                Err(reason) => Ok(flag("few_shot", reason, asker.audit, None)),
            }
        }
        DetoxMode::Cot => {
            let ctx = cot.expect("chain-of-thought mode needs a CotContext");
            let (profile, extracted) = match ctx.profiles.get(&pair.id) {
                Some(p) => (p.clone(), false),
                None => {
                    let prompt = match build_descriptive_prompt(&pair.toxic) {
                        Ok(p) => p,
                        Err(e) => return Ok(flag("descriptive", e.to_string(), asker.audit, None)),
                    };
                    // a profile is only useful if it can be encoded
                    let parse = |r: &str| {
                        let parsed = parse_feature_response(r, ctx.vocab).map_err(|e| e.to_string())?;
                        let mut profile = parsed.profile;
                        profile.sentence_id = pair.id.clone();
                        encode_profile(&profile, ctx.vocab).map_err(|e| e.to_string())?;
                        Ok(profile)
                    };
                    match asker.ask("descriptive", &prompt, parse)? {
                        Ok(p) => (p, true),
                        Err(reason) => return Ok(flag("descriptive", reason, asker.audit, None)),
                    }
                }
            };
            let keep = |p: FeatureProfile| extracted.then_some(p);
            let encoded = match encode_profile(&profile, ctx.vocab) {
                Ok(e) => e,
                Err(e) => return Ok(flag("encode", e.to_string(), asker.audit, keep(profile))),
            };
            let cluster = match ctx.model.assign(&encoded.vector) {
                Ok(c) => c,
                Err(e) => return Ok(flag("assign", e.to_string(), asker.audit, keep(profile))),
            };
            let example: CotExample = match cot_example(cluster, ctx.model, ctx.exemplars) {
                Ok(x) => x,
                Err(e) => return Ok(flag("cot", e.to_string(), asker.audit, keep(profile))),
            };
            let prompt = match build_cot_prompt_with(&pair.toxic, cluster, &example) {
                Ok(p) => p,
                Err(e) => return Ok(flag("cot", e.to_string(), asker.audit, keep(profile))),
            };
            match asker.ask("cot", &prompt, detox_parse)? {
                Ok(parsed) => Ok(Sample {
                    output: Some(
                        SystemOutput::new(pair, system, parsed.fixed_sentence)
                            .with_meta("cluster", json!(cluster))
                            .with_meta("toxicity_level", json!(profile.toxicity_level)),
                    ),
                    flag: None,
                    audit: asker.audit,
                    profile: keep(profile),
                }),
                Err(reason) => Ok(flag("cot", reason, asker.audit, keep(profile))),
            }
        }
    }
}

/// Detoxifies every pair with the chat model, `concurrency` samples at a
/// time, keeping input order. Unparseable responses are retried per
/// `policy` and then flagged; a service error aborts the run.
#[allow(clippy::too_many_arguments)]
pub fn run_detox(
    pairs: &[ParallelPair],
    mode: DetoxMode,
    system: &str,
    chat: &dyn ChatModel,
    params: &LlmParams,
    policy: &RetryPolicy,
    cot: Option<&CotContext<'_>>,
    concurrency: usize,
) -> Result<DetoxRun, ClientError> {
    if mode == DetoxMode::Cot && cot.is_none() {
        return Err(ClientError::InvalidEndpoint(
            "chain-of-thought mode needs a cluster model".into(),
        ));
    }
    let samples = run_bounded(pairs, concurrency, |_, pair| detox_one(pair, mode, system, chat, params, policy, cot));
    let mut run = DetoxRun::default();
    for s in samples {
        let s = s?;
        run.outputs.extend(s.output);
        run.flagged.extend(s.flag);
        run.audit.extend(s.audit);
        run.profiles.extend(s.profile);
    }
    Ok(run)
}
