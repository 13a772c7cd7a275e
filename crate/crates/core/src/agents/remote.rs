//! Chat-completion client for any OpenAI-compatible endpoint.
//!
//! Wire contract: `POST {base_url}/chat/completions` with
//! `{model, messages: [{role, content}], temperature}`; the reply must carry
//! `choices[0].message.content` as a string. Transport failures, HTTP 429 and
//! 5xx responses are retried with exponential backoff. Other 4xx statuses and
//! malformed bodies fail immediately.

use std::sync::{Condvar, Mutex, OnceLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::{Agent, AgentError, AgentKind, ChatMessage, Completion, TokenUsage};

fn default_max_retries() -> u32 {
    3
}
fn default_timeout_secs() -> u64 {
    60
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_max_backoff_ms() -> u64 {
    10_000
}
fn default_concurrency() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token; unset means no auth header.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Overrides the role default when set.
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    #[serde(default = "default_max_backoff_ms")]
    pub max_backoff_ms: u64,
    /// In-flight request cap for this backend.
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: None,
            temperature: None,
            max_retries: default_max_retries(),
            timeout_secs: default_timeout_secs(),
            initial_backoff_ms: default_backoff_ms(),
            max_backoff_ms: default_max_backoff_ms(),
            max_concurrency: default_concurrency(),
        }
    }
}

struct Limiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

impl Limiter {
    fn acquire(&self) -> LimiterGuard<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.cap {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        LimiterGuard(self)
    }
}

struct LimiterGuard<'a>(&'a Limiter);

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

pub struct RemoteChatAgent {
    id: String,
    config: RemoteConfig,
    temperature: f64,
    // Built lazily: a blocking client must not be created on an async runtime thread.
    client: OnceLock<Result<reqwest::blocking::Client, String>>,
    limiter: Limiter,
}

impl RemoteChatAgent {
    pub fn new(id: impl Into<String>, config: RemoteConfig, default_temperature: f64) -> Result<Self, AgentError> {
        if config.base_url.trim().is_empty() {
            return Err(AgentError::Config("remote backend requires base_url".into()));
        }
        if config.model.trim().is_empty() {
            return Err(AgentError::Config("remote backend requires model".into()));
        }
        let temperature = config.temperature.unwrap_or(default_temperature);
        let cap = config.max_concurrency.max(1);
        Ok(RemoteChatAgent {
            id: id.into(),
            config,
            temperature,
            client: OnceLock::new(),
            limiter: Limiter {
                in_flight: Mutex::new(0),
                freed: Condvar::new(),
                cap,
            },
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    fn client(&self) -> Result<&reqwest::blocking::Client, AgentError> {
        self.client
            .get_or_init(|| {
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(self.config.timeout_secs))
                    .build()
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| AgentError::Config(format!("failed to build http client: {e}")))
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let ms = self
            .config
            .initial_backoff_ms
            .saturating_mul(1u64 << attempt.min(20))
            .min(self.config.max_backoff_ms);
        Duration::from_millis(ms)
    }

    fn attempt(&self, messages: &[ChatMessage]) -> Result<Completion, Attempt> {
        let client = self.client().map_err(Attempt::Fatal)?;
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = WireRequest {
            model: &self.config.model,
            messages,
            temperature: self.temperature,
        };
        let mut req = client.post(&url).json(&body);
        if let Some(var) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(var) {
                if !key.is_empty() {
                    req = req.bearer_auth(key);
                }
            }
        }
        let res = req
            .send()
            .map_err(|e| Attempt::Retry(AgentError::Transport(e.to_string())))?;
        let status = res.status();
        let text = res
            .text()
            .map_err(|e| Attempt::Retry(AgentError::Transport(e.to_string())))?;
        if !status.is_success() {
            let err = AgentError::Status {
                status: status.as_u16(),
                body: text,
            };
            return if status.as_u16() == 429 || status.is_server_error() {
                Err(Attempt::Retry(err))
            } else {
                Err(Attempt::Fatal(err))
            };
        }
        parse_response(&text).map_err(Attempt::Fatal)
    }
}

enum Attempt {
    Retry(AgentError),
    Fatal(AgentError),
}

/// Extracts `choices[0].message.content` and optional usage from a response body.
pub fn parse_response(body: &str) -> Result<Completion, AgentError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| AgentError::Protocol(format!("response is not json: {e}")))?;
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .ok_or_else(|| AgentError::Protocol("missing choices[0].message.content".into()))?
        .to_string();
    let usage = value
        .get("usage")
        .and_then(|u| serde_json::from_value::<WireUsage>(u.clone()).ok())
        .map(|u| TokenUsage {
            prompt_tokens: u.prompt_tokens,
            completion_tokens: u.completion_tokens,
        });
    Ok(Completion { text, usage })
}

impl Agent for RemoteChatAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::RemoteChat
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<Completion, AgentError> {
        let _slot = self.limiter.acquire();
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff(attempt - 1));
            }
            match self.attempt(messages) {
                Ok(c) => {
                    debug!(agent = %self.id, attempt, "chat completion ok");
                    return Ok(c);
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    warn!(agent = %self.id, attempt, error = %e, "transient backend failure");
                    last = e.to_string();
                }
            }
        }
        Err(AgentError::Exhausted {
            attempts: self.config.max_retries + 1,
            last,
        })
    }
}
