use std::fmt;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tracing::debug;

use crate::config::ClientConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmErrorKind {
    Timeout,
    Http,
    Auth,
    Malformed,
}

impl fmt::Display for LlmErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LlmErrorKind::Timeout => "timeout",
            LlmErrorKind::Http => "http",
            LlmErrorKind::Auth => "auth",
            LlmErrorKind::Malformed => "malformed",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("{kind} error: {message}")]
pub struct LlmClientError {
    pub kind: LlmErrorKind,
    pub message: String,
}

impl LlmClientError {
    pub fn new(kind: LlmErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

/// Something that turns a prompt into a completion.
pub trait ChatModel: Send + Sync {
    fn complete(&self, prompt: &str, timeout: Duration) -> Result<String, LlmClientError>;
}

/// Blocking client for an OpenAI-style `/chat/completions` endpoint.
pub struct HttpChatModel {
    config: ClientConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl HttpChatModel {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: ClientConfig) -> Result<Self, LlmClientError> {
        let api_key = std::env::var(&config.api_key_env_var).map_err(|_| {
            LlmClientError::new(LlmErrorKind::Auth, format!("environment variable {} is not set", config.api_key_env_var))
        })?;
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: ClientConfig, api_key: impl Into<String>) -> Result<Self, LlmClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(None)
            .build()
            .map_err(|e| LlmClientError::new(LlmErrorKind::Http, e.to_string()))?;
        Ok(Self { config, api_key: api_key.into(), http })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }
}

impl ChatModel for HttpChatModel {
    fn complete(&self, prompt: &str, timeout: Duration) -> Result<String, LlmClientError> {
        if timeout.is_zero() {
            return Err(LlmClientError::new(LlmErrorKind::Timeout, "per-game time budget exhausted"));
        }
        let c = &self.config;
        let body = json!({
            "model": c.model_name,
            "messages": [{ "role": "user", "content": prompt }],
            "temperature": c.temperature,
            "top_p": c.top_p,
            "frequency_penalty": c.frequency_penalty,
            "presence_penalty": c.presence_penalty,
        });
        debug!(endpoint = %self.endpoint(), model = %c.model_name, prompt_chars = prompt.len(), "chat request");
        let transport = |e: reqwest::Error| {
            if e.is_timeout() {
                LlmClientError::new(LlmErrorKind::Timeout, format!("no response within {timeout:?}"))
            } else {
                LlmClientError::new(LlmErrorKind::Http, e.to_string())
            }
        };
        let response = self
            .http
            .post(self.endpoint())
            .bearer_auth(&self.api_key)
            .timeout(timeout)
            .json(&body)
            .send()
            .map_err(transport)?;
        let status = response.status();
        let text = response.text().map_err(transport)?;
        debug!(%status, response_chars = text.len(), "chat response");
        if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
            return Err(LlmClientError::new(LlmErrorKind::Auth, format!("server answered {status}")));
        }
        if !status.is_success() {
            return Err(LlmClientError::new(LlmErrorKind::Http, format!("server answered {status}: {}", snippet(&text))));
        }
        let parsed: CompletionResponse = serde_json::from_str(&text)
            .map_err(|e| LlmClientError::new(LlmErrorKind::Malformed, format!("{e}: {}", snippet(&text))))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmClientError::new(LlmErrorKind::Malformed, "response has no message content"))
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(200).collect()
}

/// Replays canned responses in order, repeating the last one, and remembers
/// every prompt it was given.
pub struct ScriptedModel {
    responses: Vec<Result<String, LlmClientError>>,
    state: Mutex<(usize, Vec<String>)>,
}

impl ScriptedModel {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self::with_results(responses.into_iter().map(|s| Ok(s.into())))
    }

    pub fn with_results(responses: impl IntoIterator<Item = Result<String, LlmClientError>>) -> Self {
        let responses: Vec<_> = responses.into_iter().collect();
        assert!(!responses.is_empty(), "a scripted model needs at least one response");
        Self { responses, state: Mutex::new((0, Vec::new())) }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.state.lock().expect("scripted model lock").1.clone()
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&self, prompt: &str, _: Duration) -> Result<String, LlmClientError> {
        let mut state = self.state.lock().expect("scripted model lock");
        let ix = state.0.min(self.responses.len() - 1);
        state.0 += 1;
        state.1.push(prompt.to_string());
        self.responses[ix].clone()
    }
}
