//! Chat-completion HTTP transport.
//!
//! Speaks the widely supported `POST {endpoint}` JSON protocol with a
//! `messages` array and `choices[0].message.content` in the reply. Any
//! provider with such an endpoint (directly or through an adapter) works.

use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AgentBackend, AgentCall, AgentError, ChatMessage};

pub const ENV_API_KEY: &str = "PACKBENCH_API_KEY";
pub const ENV_ENDPOINT: &str = "PACKBENCH_ENDPOINT";
pub const ENV_MODEL: &str = "PACKBENCH_MODEL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "max_tokens", skip_serializing_if = "Option::is_none")]
    pub max_output_tokens: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub usage: Usage,
    pub finish_reason: Option<String>,
}

impl ChatResponse {
    fn from_wire(body: &str) -> Result<Self, AgentError> {
        let v: Value = serde_json::from_str(body)
            .map_err(|e| AgentError::Protocol(format!("response is not JSON: {e}")))?;
        let choice = v
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| AgentError::Protocol("response has no choices".into()))?;
        let content = choice
            .pointer("/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| AgentError::Protocol("choice has no message content".into()))?
            .to_string();
        let finish_reason = choice
            .get("finish_reason")
            .and_then(Value::as_str)
            .map(str::to_string);
        let usage = v
            .get("usage")
            .and_then(|u| serde_json::from_value::<Usage>(u.clone()).ok())
            .unwrap_or_default();
        Ok(Self {
            content,
            usage,
            finish_reason,
        })
    }
}

fn default_temperature() -> f64 {
    1.0
}
fn default_timeout_s() -> f64 {
    600.0
}
fn default_max_attempts() -> u32 {
    5
}
fn default_backoff_base_s() -> f64 {
    1.0
}
fn default_backoff_factor() -> f64 {
    2.0
}

/// Endpoint, credentials and retry policy for the HTTP transport.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    /// Full URL of the chat-completion endpoint.
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    /// Never serialized; read from the environment when absent.
    #[serde(skip)]
    pub api_key: Option<String>,
    #[serde(default)]
    pub headers: Vec<(String, String)>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: f64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_base_s")]
    pub backoff_base_s: f64,
    #[serde(default = "default_backoff_factor")]
    pub backoff_factor: f64,
}

impl std::fmt::Debug for TransportConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportConfig")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("temperature", &self.temperature)
            .field("max_attempts", &self.max_attempts)
            .finish_non_exhaustive()
    }
}

impl TransportConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
            headers: Vec::new(),
            temperature: default_temperature(),
            max_output_tokens: None,
            timeout_s: default_timeout_s(),
            max_attempts: default_max_attempts(),
            backoff_base_s: default_backoff_base_s(),
            backoff_factor: default_backoff_factor(),
        }
    }

    /// Reads endpoint, model and API key from the environment.
    pub fn from_env() -> Result<Self, AgentError> {
        Self::new(String::new(), String::new(), None).with_env_fallback().checked()
    }

    /// Fills empty fields from the environment; explicit values win.
    pub fn with_env_fallback(mut self) -> Self {
        if self.endpoint.is_empty() {
            self.endpoint = std::env::var(ENV_ENDPOINT).unwrap_or_default();
        }
        if self.model.is_empty() {
            self.model = std::env::var(ENV_MODEL).unwrap_or_default();
        }
        if self.api_key.is_none() {
            self.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        }
        self
    }

    fn checked(self) -> Result<Self, AgentError> {
        if self.endpoint.is_empty() {
            return Err(AgentError::Config(format!("no endpoint configured (set {ENV_ENDPOINT})")));
        }
        if self.model.is_empty() {
            return Err(AgentError::Config(format!("no model configured (set {ENV_MODEL})")));
        }
        if self.api_key.is_none() {
            return Err(AgentError::Config(format!("no credentials configured (set {ENV_API_KEY})")));
        }
        if self.max_attempts == 0 {
            return Err(AgentError::Config("max_attempts must be at least 1".into()));
        }
        Ok(self)
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let secs = self.backoff_base_s * self.backoff_factor.powi(retry as i32 - 1);
        Duration::from_secs_f64(secs.max(0.0))
    }

    fn redact(&self, text: &str) -> String {
        match &self.api_key {
            Some(key) if !key.is_empty() => text.replace(key.as_str(), "<redacted>"),
            _ => text.to_string(),
        }
    }
}

/// Process-wide cap on in-flight requests plus a minimum spacing between request starts.
#[derive(Debug)]
pub struct RequestGate {
    max_in_flight: usize,
    min_interval: Duration,
    state: Mutex<GateState>,
    released: Condvar,
}

#[derive(Debug, Default)]
struct GateState {
    in_flight: usize,
    last_start: Option<Instant>,
}

pub struct GatePermit<'a> {
    gate: &'a RequestGate,
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        let mut st = self.gate.state.lock().unwrap_or_else(|e| e.into_inner());
        st.in_flight -= 1;
        self.gate.released.notify_one();
    }
}

static GLOBAL_GATE: Lazy<Arc<RequestGate>> = Lazy::new(|| Arc::new(RequestGate::new(4, Duration::ZERO)));

impl RequestGate {
    pub fn new(max_in_flight: usize, min_interval: Duration) -> Self {
        Self {
            max_in_flight: max_in_flight.max(1),
            min_interval,
            state: Mutex::new(GateState::default()),
            released: Condvar::new(),
        }
    }

    /// Shared gate used by every client that is not given its own.
    pub fn global() -> Arc<RequestGate> {
        Arc::clone(&GLOBAL_GATE)
    }

    pub fn acquire(&self) -> GatePermit<'_> {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if st.in_flight < self.max_in_flight {
                let wait = st
                    .last_start
                    .map(|t| self.min_interval.saturating_sub(t.elapsed()))
                    .unwrap_or_default();
                if wait.is_zero() {
                    break;
                }
                st = self
                    .released
                    .wait_timeout(st, wait)
                    .unwrap_or_else(|e| e.into_inner())
                    .0;
            } else {
                st = self.released.wait(st).unwrap_or_else(|e| e.into_inner());
            }
        }
        st.in_flight += 1;
        st.last_start = Some(Instant::now());
        GatePermit { gate: self }
    }
}

/// Outcome of one HTTP attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptLog {
    pub attempt: u32,
    pub status: Option<u16>,
    pub error: Option<String>,
}

enum AttemptError {
    Retryable(String),
    Auth(u16, String),
    Fatal(String),
}

pub struct LlmClient {
    agent: ureq::Agent,
    config: TransportConfig,
    gate: Arc<RequestGate>,
    attempts: Vec<AttemptLog>,
}

impl LlmClient {
    pub fn new(config: TransportConfig) -> Result<Self, AgentError> {
        Self::with_gate(config, RequestGate::global())
    }

    pub fn with_gate(config: TransportConfig, gate: Arc<RequestGate>) -> Result<Self, AgentError> {
        let config = config.checked()?;
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s)))
            .build()
            .into();
        Ok(Self {
            agent,
            config,
            gate,
            attempts: Vec::new(),
        })
    }

    pub fn config(&self) -> &TransportConfig {
        &self.config
    }

    /// Every attempt made by this client, in order.
    pub fn attempt_log(&self) -> &[AttemptLog] {
        &self.attempts
    }

    pub fn request(&self, messages: Vec<ChatMessage>, seed: Option<u64>) -> ChatRequest {
        ChatRequest {
            model: self.config.model.clone(),
            messages,
            temperature: self.config.temperature,
            seed,
            max_output_tokens: self.config.max_output_tokens,
        }
    }

    fn attempt(&self, request: &ChatRequest) -> (Option<u16>, Result<ChatResponse, AttemptError>) {
        let _permit = self.gate.acquire();
        let mut builder = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.config.api_key {
            builder = builder.header("Authorization", &format!("Bearer {key}"));
        }
        for (name, value) in &self.config.headers {
            builder = builder.header(name.as_str(), value.as_str());
        }
        let mut response = match builder.send_json(request) {
            Ok(r) => r,
            Err(e) => return (None, Err(AttemptError::Retryable(self.config.redact(&e.to_string())))),
        };
        let status = response.status().as_u16();
        let body = match response.body_mut().read_to_string() {
            Ok(b) => b,
            Err(e) => return (Some(status), Err(AttemptError::Retryable(e.to_string()))),
        };
        let body = self.config.redact(&body);
        let outcome = match status {
            200..=299 => ChatResponse::from_wire(&body).map_err(|e| AttemptError::Fatal(e.to_string())),
            401 | 403 => Err(AttemptError::Auth(status, body)),
            429 | 500..=599 => Err(AttemptError::Retryable(format!("HTTP {status}: {body}"))),
            _ => Err(AttemptError::Fatal(format!("HTTP {status}: {body}"))),
        };
        (Some(status), outcome)
    }

    /// Sends a request, retrying rate limits, server errors and transport
    /// failures with exponential backoff.
    pub fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, AgentError> {
        if let Ok(body) = serde_json::to_string(request) {
            log::debug!("chat request to {}: {}", self.config.endpoint, self.config.redact(&body));
        }
        let mut last_error = String::new();
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                thread::sleep(self.config.backoff(attempt - 1));
            }
            let (status, outcome) = self.attempt(request);
            let error = outcome.as_ref().err().map(|e| match e {
                AttemptError::Retryable(m) | AttemptError::Fatal(m) | AttemptError::Auth(_, m) => m.clone(),
            });
            log::info!("chat attempt {attempt}: status {status:?}");
            self.attempts.push(AttemptLog {
                attempt,
                status,
                error,
            });
            match outcome {
                Ok(resp) => {
                    log::debug!("chat response: {}", resp.content);
                    return Ok(resp);
                }
                Err(AttemptError::Auth(status, message)) => return Err(AgentError::Auth { status, message }),
                Err(AttemptError::Fatal(message)) => {
                    return Err(AgentError::Transport {
                        attempts: attempt,
                        message,
                    })
                }
                Err(AttemptError::Retryable(message)) => {
                    log::warn!("chat attempt {attempt} failed: {message}");
                    last_error = message;
                }
            }
        }
        Err(AgentError::Transport {
            attempts: self.config.max_attempts,
            message: last_error,
        })
    }
}

/// Agent backend that forwards the rendered prompt to a chat-completion endpoint.
pub struct LlmBackend {
    client: LlmClient,
    seed: u64,
}

impl LlmBackend {
    pub fn new(client: LlmClient, seed: u64) -> Self {
        log::info!(
            "llm backend {} with seed {seed}; providers that ignore seeds are not reproducible",
            client.config().model
        );
        Self { client, seed }
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }
}

impl AgentBackend for LlmBackend {
    fn name(&self) -> String {
        format!("llm:{}", self.client.config().model)
    }

    fn respond(&mut self, call: &AgentCall<'_>) -> Result<String, AgentError> {
        let request = self.client.request(call.messages.to_vec(), Some(self.seed));
        Ok(self.client.complete(&request)?.content)
    }
}
