//! Recorded service responses, for offline and reproducible runs.
//!
//! A replay file is JSONL, one response per line:
//!
//! ```text
//! {"service":"chat","input":"<prompt>","response":"<completion>"}
//! {"service":"sta","input":"<text>","lang":"en","response":0.93}
//! {"service":"emb","input":"<text>","response":[0.1,0.2]}
//! {"service":"mt","input":"<text>","source":"de","target":"en","response":"<text>"}
//! {"service":"detox","input":"<text>","response":"<text>"}
//! ```
//!
//! Lookups are keyed by a SHA-256 over the service name, its routing fields
//! and the input. A line may give that key directly as `"key"` in place of
//! `"input"`. Missing entries are an error, never a silent default.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{ChatModel, ClientError, Detoxifier, Embedder, ToxicityClassifier, Translator};
use crate::lang::LanguageTag;
use crate::prompting::LlmParams;

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("cannot access replay file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("replay line {line}: {message}")]
    Record { line: usize, message: String },
}

const SERVICES: [&str; 5] = ["chat", "sta", "emb", "mt", "detox"];

fn routing_fields(service: &str) -> &'static [&'static str] {
    match service {
        "sta" => &["lang"],
        "mt" => &["source", "target"],
        _ => &[],
    }
}

/// Content key for one request.
pub fn replay_key(service: &str, routing: &[&str], input: &str) -> String {
    let mut h = Sha256::new();
    h.update(service.as_bytes());
    for r in routing {
        h.update([0u8]);
        h.update(r.as_bytes());
    }
    h.update([0u8]);
    h.update(input.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Default)]
pub struct ReplayStore {
    entries: HashMap<String, Value>,
    /// Lines in insertion order, for saving.
    lines: Vec<Value>,
}

impl ReplayStore {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(content: &str) -> Result<Self, ReplayError> {
        let mut store = ReplayStore::default();
        for (i, raw) in content.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let err = |message: String| ReplayError::Record { line, message };
            let obj: Map<String, Value> = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            let service = obj
                .get("service")
                .and_then(Value::as_str)
                .filter(|s| SERVICES.contains(s))
                .ok_or_else(|| err("`service` must be one of chat, sta, emb, mt, detox".into()))?
                .to_string();
            let response = obj.get("response").cloned().ok_or_else(|| err("missing `response`".into()))?;
            let key = match (obj.get("key").and_then(Value::as_str), obj.get("input").and_then(Value::as_str)) {
                (Some(k), _) => k.to_string(),
                (None, Some(input)) => {
                    let mut routing = Vec::new();
                    for f in routing_fields(&service) {
                        routing.push(
                            obj.get(*f)
                                .and_then(Value::as_str)
                                .ok_or_else(|| err(format!("missing `{f}` for {service}")))?,
                        );
                    }
                    replay_key(&service, &routing, input)
                }
                (None, None) => return Err(err("need `input` or `key`".into())),
            };
            store.entries.insert(key, response);
            store.lines.push(Value::Object(obj));
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self, ReplayError> {
        let content = std::fs::read_to_string(path).map_err(|source| ReplayError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&l.to_string());
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ReplayError> {
        let io = |source| ReplayError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::fs::File::create(path).map_err(io)?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(io)
    }

    fn record(&mut self, service: &str, routing: &[(&str, &str)], input: &str, response: Value) {
        let values: Vec<&str> = routing.iter().map(|(_, v)| *v).collect();
        let key = replay_key(service, &values, input);
        let mut line = Map::new();
        line.insert("service".into(), json!(service));
        line.insert("input".into(), json!(input));
        for (k, v) in routing {
            line.insert((*k).into(), json!(v));
        }
        line.insert("response".into(), response.clone());
        self.entries.insert(key, response);
        self.lines.push(Value::Object(line));
    }

    pub fn record_chat(&mut self, prompt: &str, completion: &str) {
        self.record("chat", &[], prompt, json!(completion));
    }

    pub fn record_sta(&mut self, text: &str, lang: LanguageTag, score: f64) {
        self.record("sta", &[("lang", lang.code())], text, json!(score));
    }

    pub fn record_emb(&mut self, text: &str, vector: &[f64]) {
        self.record("emb", &[], text, json!(vector));
    }

    pub fn record_mt(&mut self, text: &str, source: LanguageTag, target: LanguageTag, translation: &str) {
        self.record(
            "mt",
            &[("source", source.code()), ("target", target.code())],
            text,
            json!(translation),
        );
    }

    pub fn record_detox(&mut self, text: &str, output: &str) {
        self.record("detox", &[], text, json!(output));
    }

    fn get(&self, service: &'static str, routing: &[&str], input: &str) -> Result<&Value, ClientError> {
        let key = replay_key(service, routing, input);
        self.entries.get(&key).ok_or(ClientError::NotRecorded { service, key })
    }

    fn get_str(&self, service: &'static str, routing: &[&str], input: &str) -> Result<String, ClientError> {
        self.get(service, routing, input)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed(format!("recorded {service} response is not a string")))
    }
}

impl ToxicityClassifier for ReplayStore {
    fn score_batch(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, ClientError> {
        texts
            .iter()
            .map(|t| {
                self.get("sta", &[lang.code()], t)?
                    .as_f64()
                    .ok_or_else(|| ClientError::Malformed("recorded sta response is not a number".into()))
            })
            .collect()
    }
}

impl Embedder for ReplayStore {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        texts
            .iter()
            .map(|t| {
                serde_json::from_value(self.get("emb", &[], t)?.clone())
                    .map_err(|e| ClientError::Malformed(format!("recorded emb response: {e}")))
            })
            .collect()
    }
}

impl Translator for ReplayStore {
    fn translate_batch(&self, texts: &[String], source: LanguageTag, target: LanguageTag) -> Result<Vec<String>, ClientError> {
        texts
            .iter()
            .map(|t| self.get_str("mt", &[source.code(), target.code()], t))
            .collect()
    }
}

impl Detoxifier for ReplayStore {
    fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
        texts.iter().map(|t| self.get_str("detox", &[], t)).collect()
    }
}

impl ChatModel for ReplayStore {
    fn complete(&self, prompt: &str, _: &LlmParams) -> Result<String, ClientError> {
        self.get_str("chat", &[], prompt)
    }
}

/// Wraps a live client and records every successful response into a shared
/// store, so a later run can replay it.
pub struct Recorder<C> {
    inner: C,
    store: Arc<Mutex<ReplayStore>>,
}

impl<C> Recorder<C> {
    pub fn new(inner: C, store: Arc<Mutex<ReplayStore>>) -> Self {
        Recorder { inner, store }
    }

    fn with_store(&self, f: impl FnOnce(&mut ReplayStore)) {
        f(&mut self.store.lock().unwrap_or_else(|e| e.into_inner()));
    }
}

impl<C: ToxicityClassifier> ToxicityClassifier for Recorder<C> {
    fn score_batch(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, ClientError> {
        let out = self.inner.classify(texts, lang)?;
        self.with_store(|s| texts.iter().zip(&out).for_each(|(t, &p)| s.record_sta(t, lang, p)));
        Ok(out)
    }
}

impl<C: Embedder> Embedder for Recorder<C> {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        let out = self.inner.embed(texts)?;
        self.with_store(|s| texts.iter().zip(&out).for_each(|(t, v)| s.record_emb(t, v)));
        Ok(out)
    }
}

impl<C: Translator> Translator for Recorder<C> {
    fn translate_batch(&self, texts: &[String], source: LanguageTag, target: LanguageTag) -> Result<Vec<String>, ClientError> {
        let out = self.inner.translate(texts, source, target)?;
        self.with_store(|s| texts.iter().zip(&out).for_each(|(t, o)| s.record_mt(t, source, target, o)));
        Ok(out)
    }
}

impl<C: Detoxifier> Detoxifier for Recorder<C> {
    fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
        let out = self.inner.detoxify(texts)?;
        self.with_store(|s| texts.iter().zip(&out).for_each(|(t, o)| s.record_detox(t, o)));
        Ok(out)
    }
}

impl<C: ChatModel> ChatModel for Recorder<C> {
    fn complete(&self, prompt: &str, params: &LlmParams) -> Result<String, ClientError> {
        let out = self.inner.chat(prompt, params)?;
        self.with_store(|s| s.record_chat(prompt, &out));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::mock::ConstantClassifier;
    use super::*;

    #[test]
    fn round_trip_through_jsonl() {
        let mut s = ReplayStore::default();
        s.record_sta("hi", LanguageTag::En, 0.25);
        s.record_emb("hi", &[1.0, 2.0]);
        s.record_mt("hallo", LanguageTag::De, LanguageTag::En, "hello");
        s.record_detox("damn it", "it");
        s.record_chat("prompt", "answer");
        let back = ReplayStore::parse(&s.to_jsonl()).unwrap();
        assert_eq!(back.len(), 5);
        assert_eq!(back.classify(&["hi".into()], LanguageTag::En).unwrap(), vec![0.25]);
        assert_eq!(back.embed(&["hi".into()]).unwrap(), vec![vec![1.0, 2.0]]);
        assert_eq!(
            back.translate(&["hallo".into()], LanguageTag::De, LanguageTag::En).unwrap(),
            vec!["hello".to_string()]
        );
        assert_eq!(back.detoxify(&["damn it".into()]).unwrap(), vec!["it".to_string()]);
        assert_eq!(back.chat("prompt", &LlmParams::default()).unwrap(), "answer");
    }

    #[test]
    fn routing_fields_are_part_of_the_key() {
        let mut s = ReplayStore::default();
        s.record_sta("hi", LanguageTag::En, 0.25);
        let err = s.classify(&["hi".into()], LanguageTag::De).unwrap_err();
        assert!(matches!(err, ClientError::NotRecorded { service: "sta", .. }));
    }

    #[test]
    fn explicit_key_lines() {
        let key = replay_key("chat", &[], "p");
        let s = ReplayStore::parse(&format!(r#"{{"service":"chat","key":"{key}","response":"r"}}"#)).unwrap();
        assert_eq!(s.chat("p", &LlmParams::default()).unwrap(), "r");
    }

    #[test]
    fn bad_lines_are_reported_with_line_numbers() {
        let err = ReplayStore::parse("\n{\"service\":\"nope\",\"input\":\"x\",\"response\":1}").unwrap_err();
        assert!(err.to_string().starts_with("replay line 2"), "{err}");
        assert!(ReplayStore::parse(r#"{"service":"mt","input":"x","response":"y"}"#).is_err());
    }

    #[test]
    fn recorder_captures_live_responses() {
        let store = Arc::new(Mutex::new(ReplayStore::default()));
        let rec = Recorder::new(ConstantClassifier(0.7), store.clone());
        rec.classify(&["a".into(), "b".into()], LanguageTag::Es).unwrap();
        let s = store.lock().unwrap();
        assert_eq!(s.classify(&["b".into()], LanguageTag::Es).unwrap(), vec![0.7]);
    }
}
