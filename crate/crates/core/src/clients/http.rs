//! JSON-over-HTTP clients.
//!
//! Every request is a POST of a JSON body to the endpoint's base URL. The
//! `X-Request-Id` header is the SHA-256 of the body, so retries of the same
//! request carry the same id and servers can deduplicate them.

use std::sync::Arc;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::dispatch::{run_bounded, Semaphore};
use super::{ChatModel, ClientError, Detoxifier, Embedder, ServiceEndpoint, ToxicityClassifier, Translator};
use crate::lang::LanguageTag;
use crate::prompting::LlmParams;

pub const REQUEST_ID_HEADER: &str = "X-Request-Id";

pub fn request_id(body: &[u8]) -> String {
    hex::encode(Sha256::digest(body))
}

/// Shared transport for one endpoint: agent, retry policy and the
/// in-flight limit.
#[derive(Clone)]
pub struct Transport {
    endpoint: ServiceEndpoint,
    agent: ureq::Agent,
    permits: Arc<Semaphore>,
}

impl std::fmt::Debug for Transport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transport").field("endpoint", &self.endpoint).finish()
    }
}

impl Transport {
    pub fn new(endpoint: ServiceEndpoint) -> Result<Self, ClientError> {
        endpoint.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(endpoint.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let permits = Arc::new(Semaphore::new(endpoint.max_concurrency));
        Ok(Transport {
            endpoint,
            agent,
            permits,
        })
    }

    pub fn endpoint(&self) -> &ServiceEndpoint {
        &self.endpoint
    }

    fn attempt(&self, body: &[u8], id: &str) -> Result<Value, ClientError> {
        let mut req = self
            .agent
            .post(&self.endpoint.base_url)
            .header("Content-Type", "application/json")
            .header(REQUEST_ID_HEADER, id);
        if let Some(token) = &self.endpoint.auth_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send(body).map_err(|e| ClientError::Transport {
            attempts: 1,
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(ClientError::Status { status, body });
        }
        resp.body_mut().read_json::<Value>().map_err(|e| match e {
            ureq::Error::Json(e) => ClientError::Malformed(e.to_string()),
            other => ClientError::Transport {
                attempts: 1,
                message: other.to_string(),
            },
        })
    }

    /// POSTs `body`, retrying transport errors, 429 and 5xx up to
    /// `max_retries` extra times.
    pub fn post_json(&self, body: &Value) -> Result<Value, ClientError> {
        let bytes = serde_json::to_vec(body).map_err(|e| ClientError::Malformed(e.to_string()))?;
        let id = request_id(&bytes);
        let _permit = self.permits.acquire();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&bytes, &id) {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retryable() && attempts <= self.endpoint.max_retries => {
                    std::thread::sleep(std::time::Duration::from_millis(50 * attempts as u64));
                }
                Err(ClientError::Transport { message, .. }) => {
                    return Err(ClientError::Transport { attempts, message })
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Splits `texts` into batches, posts them with bounded concurrency and
    /// concatenates the extracted items in input order.
    fn batched<T: Send>(
        &self,
        texts: &[String],
        body: impl Fn(&[String]) -> Value + Sync,
        extract: impl Fn(&Value) -> Result<Vec<T>, ClientError> + Sync,
    ) -> Result<Vec<T>, ClientError> {
        let chunks: Vec<&[String]> = texts.chunks(self.endpoint.batch_size).collect();
        let results = run_bounded(&chunks, self.endpoint.max_concurrency, |_, chunk| {
            let v = self.post_json(&body(chunk))?;
            let items = extract(&v)?;
            if items.len() != chunk.len() {
                return Err(ClientError::Misaligned {
                    expected: chunk.len(),
                    got: items.len(),
                });
            }
            Ok(items)
        });
        let mut out = Vec::with_capacity(texts.len());
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>, ClientError> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| ClientError::Malformed(format!("missing array `{key}`")))
}

fn floats(v: &Value) -> Result<Vec<f64>, ClientError> {
    v.as_array()
        .ok_or_else(|| ClientError::Malformed("expected an array of numbers".into()))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| ClientError::Malformed(format!("not a number: {x}"))))
        .collect()
}

fn strings(v: &Value, key: &str) -> Result<Vec<String>, ClientError> {
    field(v, key)?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| ClientError::Malformed(format!("not a string in `{key}`: {x}")))
        })
        .collect()
}

/// `{"texts": [..], "lang": ".."}` -> `{"scores": [..]}`
#[derive(Debug, Clone)]
pub struct HttpClassifier {
    transport: Transport,
}

impl HttpClassifier {
    pub fn new(endpoint: ServiceEndpoint) -> Result<Self, ClientError> {
        Ok(HttpClassifier {
            transport: Transport::new(endpoint)?,
        })
    }
}

impl ToxicityClassifier for HttpClassifier {
    fn score_batch(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, ClientError> {
        self.transport.batched(
            texts,
            |chunk| json!({ "texts": chunk, "lang": lang.code() }),
            |v| floats(&Value::Array(field(v, "scores")?.clone())),
        )
    }
}

/// `{"texts": [..]}` -> `{"vectors": [[..], ..]}`
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    transport: Transport,
}

impl HttpEmbedder {
    pub fn new(endpoint: ServiceEndpoint) -> Result<Self, ClientError> {
        Ok(HttpEmbedder {
            transport: Transport::new(endpoint)?,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        self.transport.batched(
            texts,
            |chunk| json!({ "texts": chunk }),
            |v| field(v, "vectors")?.iter().map(floats).collect(),
        )
    }
}

/// `{"texts": [..], "source": "..", "target": ".."}` -> `{"translations": [..]}`
#[derive(Debug, Clone)]
pub struct HttpTranslator {
    transport: Transport,
}

impl HttpTranslator {
    pub fn new(endpoint: ServiceEndpoint) -> Result<Self, ClientError> {
        Ok(HttpTranslator {
            transport: Transport::new(endpoint)?,
        })
    }
}

impl Translator for HttpTranslator {
    fn translate_batch(
        &self,
        texts: &[String],
        source: LanguageTag,
        target: LanguageTag,
    ) -> Result<Vec<String>, ClientError> {
        self.transport.batched(
            texts,
            |chunk| json!({ "texts": chunk, "source": source.code(), "target": target.code() }),
            |v| strings(v, "translations"),
        )
    }
}

/// `{"texts": [..]}` -> `{"detoxified": [..]}`
#[derive(Debug, Clone)]
pub struct HttpDetoxifier {
    transport: Transport,
}

impl HttpDetoxifier {
    pub fn new(endpoint: ServiceEndpoint) -> Result<Self, ClientError> {
        Ok(HttpDetoxifier {
            transport: Transport::new(endpoint)?,
        })
    }
}

impl Detoxifier for HttpDetoxifier {
    fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
        self.transport
            .batched(texts, |chunk| json!({ "texts": chunk }), |v| strings(v, "detoxified"))
    }
}

/// OpenAI-style chat completion with a single user message.
#[derive(Debug, Clone)]
pub struct HttpChat {
    transport: Transport,
}

impl HttpChat {
    pub fn new(endpoint: ServiceEndpoint) -> Result<Self, ClientError> {
        Ok(HttpChat {
            transport: Transport::new(endpoint)?,
        })
    }
}

pub fn chat_request_body(prompt: &str, params: &LlmParams) -> Value {
    json!({
        "model": params.model,
        "messages": [{ "role": "user", "content": prompt }],
        "temperature": params.temperature,
        "top_p": params.top_p,
        "top_k": params.top_k,
        "frequency_penalty": params.frequency_penalty,
        "presence_penalty": params.presence_penalty,
    })
}

impl ChatModel for HttpChat {
    fn complete(&self, prompt: &str, params: &LlmParams) -> Result<String, ClientError> {
        let v = self.transport.post_json(&chat_request_body(prompt, params))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("missing choices[0].message.content".into()))
    }
}
