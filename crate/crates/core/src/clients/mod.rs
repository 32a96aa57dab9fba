//! Clients for the external model services: toxicity classifier (STA),
//! sentence embedder (SIM), translator, English detoxifier and chat LLM.
//!
//! Each service is a trait with a raw `*_batch` method that implementations
//! provide and a validating method (`classify`, `embed`, ...) that callers
//! use. Validation covers batch alignment, score ranges and embedding
//! dimensions, so mocks and HTTP clients obey the same contract.

pub mod dispatch;
pub mod http;
pub mod mock;
pub mod replay;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;
use crate::prompting::LlmParams;

pub use dispatch::{run_bounded, Semaphore};
pub use http::{HttpChat, HttpClassifier, HttpDetoxifier, HttpEmbedder, HttpTranslator};
pub use replay::{Recorder, ReplayStore};

pub const ENV_STA_URL: &str = "DETOX_STA_URL";
pub const ENV_EMB_URL: &str = "DETOX_EMB_URL";
pub const ENV_MT_URL: &str = "DETOX_MT_URL";
pub const ENV_LLM_URL: &str = "DETOX_LLM_URL";
pub const ENV_LLM_TOKEN: &str = "DETOX_LLM_TOKEN";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClientError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: usize, message: String },
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("response has {got} item(s) for {expected} input(s)")]
    Misaligned { expected: usize, got: usize },
    #[error("score out of range: {0}")]
    ScoreOutOfRange(f64),
    #[error("inconsistent embedding dimensions: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("non-finite embedding entry")]
    NonFinite,
    #[error("empty completion")]
    EmptyCompletion,
    #[error("no recorded {service} response for key {key}")]
    NotRecorded { service: &'static str, key: String },
    #[error("invalid endpoint: {0}")]
    InvalidEndpoint(String),
}

impl ClientError {
    /// Transport-level failures worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            ClientError::Transport { .. } => true,
            ClientError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// Where and how to reach one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceEndpoint {
    pub base_url: String,
    pub timeout: Duration,
    pub max_concurrency: usize,
    pub max_retries: usize,
    /// Texts per request.
    pub batch_size: usize,
    #[serde(skip)]
    pub auth_token: Option<String>,
}

impl ServiceEndpoint {
    pub fn new(base_url: impl Into<String>) -> Result<Self, ClientError> {
        let base_url = base_url.into();
        if !(base_url.starts_with("http://") || base_url.starts_with("https://")) {
            return Err(ClientError::InvalidEndpoint(base_url));
        }
        Ok(ServiceEndpoint {
            base_url,
            timeout: Duration::from_secs(30),
            max_concurrency: 8,
            max_retries: 2,
            batch_size: 32,
            auth_token: None,
        })
    }

    pub fn from_env(var: &str) -> Option<Result<Self, ClientError>> {
        std::env::var(var).ok().filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_max_concurrency(mut self, n: usize) -> Self {
        self.max_concurrency = n;
        self
    }

    pub fn with_max_retries(mut self, n: usize) -> Self {
        self.max_retries = n;
        self
    }

    pub fn with_batch_size(mut self, n: usize) -> Self {
        self.batch_size = n;
        self
    }

    pub fn with_auth_token(mut self, token: Option<String>) -> Self {
        self.auth_token = token;
        self
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        if self.timeout.is_zero() {
            return Err(ClientError::InvalidEndpoint("timeout must be positive".into()));
        }
        if self.max_concurrency == 0 || self.batch_size == 0 {
            return Err(ClientError::InvalidEndpoint(
                "max_concurrency and batch_size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn ensure_non_empty<T>(batch: &[T]) -> Result<(), ClientError> {
    if batch.is_empty() {
        Err(ClientError::EmptyBatch)
    } else {
        Ok(())
    }
}

fn ensure_aligned(expected: usize, got: usize) -> Result<(), ClientError> {
    if expected == got {
        Ok(())
    } else {
        Err(ClientError::Misaligned { expected, got })
    }
}

/// Non-toxic probability per text.
pub trait ToxicityClassifier: Send + Sync {
    fn score_batch(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, ClientError>;

    fn classify(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, ClientError> {
        ensure_non_empty(texts)?;
        let scores = self.score_batch(texts, lang)?;
        ensure_aligned(texts.len(), scores.len())?;
        if let Some(&bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(ClientError::ScoreOutOfRange(bad));
        }
        Ok(scores)
    }
}

/// Sentence embeddings of a fixed dimension.
pub trait Embedder: Send + Sync {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError>;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        ensure_non_empty(texts)?;
        let vectors = self.embed_batch(texts)?;
        ensure_aligned(texts.len(), vectors.len())?;
        let dim = vectors[0].len();
        for v in &vectors {
            if v.len() != dim {
                return Err(ClientError::Dimension(dim, v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ClientError::NonFinite);
            }
        }
        Ok(vectors)
    }
}

pub trait Translator: Send + Sync {
    fn translate_batch(
        &self,
        texts: &[String],
        source: LanguageTag,
        target: LanguageTag,
    ) -> Result<Vec<String>, ClientError>;

    fn translate(&self, texts: &[String], source: LanguageTag, target: LanguageTag) -> Result<Vec<String>, ClientError> {
        ensure_non_empty(texts)?;
        let out = self.translate_batch(texts, source, target)?;
        ensure_aligned(texts.len(), out.len())?;
        Ok(out)
    }
}

/// A monolingual English detoxification model (the middle stage of the
/// backtranslation baseline).
pub trait Detoxifier: Send + Sync {
    fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError>;

    fn detoxify(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
        ensure_non_empty(texts)?;
        let out = self.detoxify_batch(texts)?;
        ensure_aligned(texts.len(), out.len())?;
        Ok(out)
    }
}

pub trait ChatModel: Send + Sync {
    fn complete(&self, prompt: &str, params: &LlmParams) -> Result<String, ClientError>;

    fn chat(&self, prompt: &str, params: &LlmParams) -> Result<String, ClientError> {
        let text = self.complete(prompt, params)?;
        if text.trim().is_empty() {
            return Err(ClientError::EmptyCompletion);
        }
        Ok(text)
    }
}

macro_rules! forward_impls {
    ($($ptr:ty),*) => {$(
        impl<T: ToxicityClassifier + ?Sized> ToxicityClassifier for $ptr {
            fn score_batch(&self, texts: &[String], lang: LanguageTag) -> Result<Vec<f64>, ClientError> {
                (**self).score_batch(texts, lang)
            }
        }
        impl<T: Embedder + ?Sized> Embedder for $ptr {
            fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
                (**self).embed_batch(texts)
            }
        }
        impl<T: Translator + ?Sized> Translator for $ptr {
            fn translate_batch(&self, texts: &[String], s: LanguageTag, t: LanguageTag) -> Result<Vec<String>, ClientError> {
                (**self).translate_batch(texts, s, t)
            }
        }
        impl<T: Detoxifier + ?Sized> Detoxifier for $ptr {
            fn detoxify_batch(&self, texts: &[String]) -> Result<Vec<String>, ClientError> {
                (**self).detoxify_batch(texts)
            }
        }
        impl<T: ChatModel + ?Sized> ChatModel for $ptr {
            fn complete(&self, prompt: &str, params: &LlmParams) -> Result<String, ClientError> {
                (**self).complete(prompt, params)
            }
        }
    )*};
}

forward_impls!(Arc<T>, Box<T>, &T);
