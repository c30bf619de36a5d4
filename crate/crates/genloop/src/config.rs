use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_API_KEY_VAR: &str = "WORLDFORGE_API_KEY";
pub const BASE_URL_VAR: &str = "WORLDFORGE_BASE_URL";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config")]
    Format(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Chat-completion client settings, stored as camelCase JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ClientConfig {
    pub base_url: String,
    pub model_name: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "one")]
    pub top_p: f64,
    #[serde(default)]
    pub frequency_penalty: f64,
    #[serde(default)]
    pub presence_penalty: f64,
    #[serde(default = "default_key_var")]
    pub api_key_env_var: String,
    /// Wall-clock budget for one game across all of its rounds.
    #[serde(default = "default_timeout")]
    pub per_game_timeout_secs: f64,
    #[serde(default = "default_rounds")]
    pub max_rounds: u32,
    /// Upper bound on concurrent requests when several specs run at once.
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn one() -> f64 {
    1.0
}
fn default_key_var() -> String {
    DEFAULT_API_KEY_VAR.to_string()
}
fn default_timeout() -> f64 {
    1800.0
}
fn default_rounds() -> u32 {
    3
}
fn default_in_flight() -> usize {
    4
}

impl ClientConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_name: model_name.into(),
            temperature: 0.0,
            top_p: one(),
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            api_key_env_var: default_key_var(),
            per_game_timeout_secs: default_timeout(),
            max_rounds: default_rounds(),
            max_in_flight: default_in_flight(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.check()?;
        Ok(config)
    }

    /// Reads a config file, then applies the base-URL environment override.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut config = Self::from_json(&text)?;
        if let Ok(url) = std::env::var(BASE_URL_VAR) {
            if !url.is_empty() {
                config.base_url = url;
            }
        }
        Ok(config)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.temperature >= 0.0) {
            return bad("temperature must be >= 0");
        }
        if !(self.per_game_timeout_secs > 0.0) || !self.per_game_timeout_secs.is_finite() {
            return bad("perGameTimeoutSecs must be a positive number");
        }
        if self.max_in_flight == 0 {
            return bad("maxInFlight must be at least 1");
        }
        if self.model_name.is_empty() {
            return bad("modelName must not be empty");
        }
        Ok(())
    }

    pub fn per_game_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.per_game_timeout_secs)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ClientConfig::from_json(r#"{"baseUrl":"http://x","modelName":"m"}"#).unwrap();
        assert_eq!(c, ClientConfig::new("http://x", "m"));
        assert_eq!(c.temperature, 0.0);
        assert_eq!(c.top_p, 1.0);
        assert_eq!(c.per_game_timeout(), Duration::from_secs(1800));
        assert_eq!(c.max_rounds, 3);
        assert_eq!(c.api_key_env_var, "WORLDFORGE_API_KEY");
    }

    #[test]
    fn invariants_are_checked() {
        assert!(ClientConfig::from_json(r#"{"baseUrl":"u","modelName":"m","temperature":-0.1}"#).is_err());
        assert!(ClientConfig::from_json(r#"{"baseUrl":"u","modelName":"m","perGameTimeoutSecs":0}"#).is_err());
        assert!(ClientConfig::from_json(r#"{"baseUrl":"u","modelName":"m","maxRounds":-1}"#).is_err());
        assert!(ClientConfig::from_json(r#"{"baseUrl":"u","modelName":"m","extra":1}"#).is_err());
    }

    #[test]
    fn round_trips() {
        let c = ClientConfig::new("http://x", "m");
        assert_eq!(ClientConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
