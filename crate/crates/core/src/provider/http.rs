use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{wire_text, Completion, Embedder, LanguageModel, ProviderError};
use crate::ledger::Usage;
use crate::prompt::RenderedPrompt;
use crate::rag::{EmbeddingVector, RetrievedChunk};
use crate::util::approx_tokens;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key. The key itself
    /// is never written anywhere.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub requests_per_minute: Option<u32>,
    /// Embedding dimension; required for embedding endpoints.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Passed through verbatim into the request body (temperature etc.).
    #[serde(default)]
    pub sampling: BTreeMap<String, Value>,
}

fn default_timeout() -> f64 {
    120.0
}

fn default_retries() -> u32 {
    3
}

fn default_backoff() -> u64 {
    500
}

impl ProviderConfig {
    pub fn new(endpoint: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_id: model_id.into(),
            api_key_env: None,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff(),
            requests_per_minute: None,
            dim: None,
            sampling: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        let bad = |m: &str| Err(ProviderError::Config(m.to_string()));
        if !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad("endpoint must be an http(s) URL");
        }
        if self.model_id.trim().is_empty() {
            return bad("model_id must be non-empty");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive");
        }
        if self.requests_per_minute == Some(0) {
            return bad("requests_per_minute must be positive");
        }
        if self.dim == Some(0) {
            return bad("dim must be positive");
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    fn resolve_key(&self) -> Result<Option<String>, ProviderError> {
        match &self.api_key_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| ProviderError::AuthFailure(format!("environment variable `{var}` is not set"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout(String),
    Connect(String),
    /// Not worth retrying (e.g. a replay miss).
    Fatal(String),
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

/// Blocking `reqwest` client.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let mut builder = self
            .client
            .post(&request.url)
            .timeout(request.timeout)
            .header("content-type", "application/json")
            .body(request.body.clone());
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout(e.to_string())
            } else {
                TransportError::Connect(e.to_string())
            }
        };
        let response = builder.send().map_err(classify)?;
        let status = response.status().as_u16();
        let body = response.text().map_err(classify)?;
        Ok(HttpResponse { status, body })
    }
}

/// Spaces outbound requests to at most `per_minute` per minute.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(per_minute: Option<u32>) -> Self {
        let interval = per_minute.map_or(Duration::ZERO, |n| Duration::from_secs(60) / n.max(1));
        Self {
            interval,
            next: Mutex::new(None),
        }
    }

    /// Reserve the next slot and sleep until it arrives.
    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let wait = {
            let mut next = self.next.lock().expect("rate limiter lock poisoned");
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

/// Shared request/retry machinery for the HTTP backends.
struct Client {
    config: ProviderConfig,
    transport: Arc<dyn Transport>,
    limiter: Arc<RateLimiter>,
    api_key: Option<String>,
}

impl Client {
    fn new(config: ProviderConfig, transport: Arc<dyn Transport>, limiter: Arc<RateLimiter>) -> Result<Self, ProviderError> {
        config.validate()?;
        let api_key = config.resolve_key()?;
        Ok(Self {
            config,
            transport,
            limiter,
            api_key,
        })
    }

    /// POST `body`, retrying transport failures, 429 and 5xx with
    /// exponential backoff. Other statuses are returned or mapped at once.
    fn post(&self, body: &Value) -> Result<Value, ProviderError> {
        let mut headers = Vec::new();
        if let Some(key) = &self.api_key {
            headers.push(("authorization".to_string(), format!("Bearer {key}")));
        }
        let request = HttpRequest {
            url: self.config.endpoint.clone(),
            headers,
            body: body.to_string(),
            timeout: self.config.timeout(),
        };
        let max_attempts = self.config.max_retries + 1;
        let mut last_timeout = false;
        let mut last_message = String::new();
        for attempt in 1..=max_attempts {
            if attempt > 1 {
                let factor = 1u64 << (attempt - 2).min(16);
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms.saturating_mul(factor)));
            }
            self.limiter.acquire();
            match self.transport.send(&request) {
                Ok(resp) if (200..300).contains(&resp.status) => {
                    return serde_json::from_str(&resp.body).map_err(|e| ProviderError::Malformed(e.to_string()));
                }
                Ok(resp) if resp.status == 401 || resp.status == 403 => {
                    return Err(ProviderError::AuthFailure(format!("status {}", resp.status)));
                }
                Ok(resp) if resp.status == 429 || resp.status >= 500 => {
                    last_timeout = false;
                    last_message = format!("status {}", resp.status);
                }
                Ok(resp) => {
                    return Err(ProviderError::Rejected {
                        status: resp.status,
                        message: truncate(&resp.body, 500),
                    });
                }
                Err(TransportError::Timeout(m)) => {
                    last_timeout = true;
                    last_message = m;
                }
                Err(TransportError::Connect(m)) => {
                    last_timeout = false;
                    last_message = m;
                }
                Err(TransportError::Fatal(m)) => return Err(ProviderError::Cassette(m)),
            }
            tracing::warn!(attempt, max_attempts, reason = %last_message, "provider request failed");
        }
        if last_timeout {
            Err(ProviderError::Timeout { attempts: max_attempts })
        } else {
            Err(ProviderError::Unavailable {
                attempts: max_attempts,
                message: last_message,
            })
        }
    }
}

fn truncate(s: &str, max: usize) -> String {
    s.chars().take(max).collect()
}

fn usage_from(value: &Value, input_text: &str, output_text: &str) -> Usage {
    let usage = value.get("usage");
    let field = |name: &str| usage.and_then(|u| u.get(name)).and_then(Value::as_u64);
    match (field("prompt_tokens"), field("completion_tokens")) {
        (Some(i), Some(o)) => Usage {
            input_tokens: i,
            output_tokens: o,
            approximate: false,
        },
        (Some(i), None) if output_text.is_empty() => Usage {
            input_tokens: i,
            output_tokens: 0,
            approximate: false,
        },
        _ => Usage {
            input_tokens: approx_tokens(input_text),
            output_tokens: approx_tokens(output_text),
            approximate: true,
        },
    }
}

/// Chat-completion backend: one user message carrying context and prompt.
pub struct HttpChatModel {
    client: Client,
}

impl HttpChatModel {
    pub fn new(config: ProviderConfig, transport: Arc<dyn Transport>, limiter: Arc<RateLimiter>) -> Result<Self, ProviderError> {
        Ok(Self {
            client: Client::new(config, transport, limiter)?,
        })
    }
}

impl LanguageModel for HttpChatModel {
    fn model_id(&self) -> &str {
        &self.client.config.model_id
    }

    fn complete(&self, prompt: &RenderedPrompt, context: &[RetrievedChunk]) -> Result<Completion, ProviderError> {
        if prompt.text.is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let content = wire_text(prompt, context);
        let mut body = json!({
            "model": self.client.config.model_id,
            "messages": [{"role": "user", "content": content}],
        });
        for (k, v) in &self.client.config.sampling {
            body[k] = v.clone();
        }
        let value = self.client.post(&body)?;
        let text = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| ProviderError::Malformed("missing choices[0].message.content".into()))?
            .to_string();
        let usage = usage_from(&value, &content, &text);
        Ok(Completion {
            text,
            usage,
            model_id: self.client.config.model_id.clone(),
        })
    }
}

/// Embedding backend (`{"model", "input"}` → `data[0].embedding`).
pub struct HttpEmbedder {
    client: Client,
    dim: usize,
}

impl HttpEmbedder {
    pub fn new(config: ProviderConfig, transport: Arc<dyn Transport>, limiter: Arc<RateLimiter>) -> Result<Self, ProviderError> {
        let dim = config
            .dim
            .ok_or_else(|| ProviderError::Config("embedding provider needs `dim`".into()))?;
        Ok(Self {
            client: Client::new(config, transport, limiter)?,
            dim,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn model_id(&self) -> &str {
        &self.client.config.model_id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        self.embed_with_usage(text).map(|(v, _)| v)
    }

    fn embed_with_usage(&self, text: &str) -> Result<(EmbeddingVector, Usage), ProviderError> {
        if text.is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let body = json!({"model": self.client.config.model_id, "input": text});
        let value = self.client.post(&body)?;
        let raw = value
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::Malformed("missing data[0].embedding".into()))?;
        let values = raw
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| ProviderError::Malformed("non-numeric embedding".into())))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != self.dim {
            return Err(ProviderError::Malformed(format!(
                "expected {} dimensions, got {}",
                self.dim,
                values.len()
            )));
        }
        let vector = EmbeddingVector::new(values).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        Ok((vector, usage_from(&value, text, "")))
    }
}
