//! JSON-over-HTTP backend adapter speaking the common chat-completion and
//! completion request shapes.

use super::{BackendConfig, BackendError, TextBackend, WireShape};
use serde_json::{json, Value};
use std::time::Duration;

pub struct HttpBackend {
    config: BackendConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        config.validate().map_err(BackendError::Permanent)?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(Self { config, agent })
    }

    /// Read the bearer token from the configured environment variable.
    /// The value lives only on the request wire; it is never logged or
    /// stored in records.
    fn auth_token(&self) -> Result<Option<String>, BackendError> {
        match &self.config.auth_token_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.is_empty() => Ok(Some(v)),
                _ => Err(BackendError::Auth(format!(
                    "environment variable {var} is unset or empty"
                ))),
            },
        }
    }

    fn request_body(&self, prompt: &str) -> Value {
        match self.config.wire_shape {
            WireShape::ChatCompletions => json!({
                "model": self.config.model_id,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": self.config.temperature,
                "max_tokens": self.config.max_tokens,
            }),
            WireShape::Completions => json!({
                "model": self.config.model_id,
                "prompt": prompt,
                "temperature": self.config.temperature,
                "max_tokens": self.config.max_tokens,
            }),
        }
    }

    fn extract_text(&self, body: &Value) -> Option<String> {
        let text = match self.config.wire_shape {
            WireShape::ChatCompletions => body
                .pointer("/choices/0/message/content")?,
            WireShape::Completions => body.pointer("/choices/0/text")?,
        };
        text.as_str().map(str::to_string)
    }
}

impl TextBackend for HttpBackend {
    fn generate_text(&self, prompt: &str) -> Result<String, BackendError> {
        let token = self.auth_token()?;
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(token) = token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(self.request_body(prompt))
            .map_err(|e| match &e {
                ureq::Error::Timeout(_) => BackendError::Transient(format!("timeout: {e}")),
                ureq::Error::Io(_) | ureq::Error::ConnectionFailed => {
                    BackendError::Transient(format!("transport: {e}"))
                }
                _ => BackendError::Permanent(e.to_string()),
            })?;
        let status = response.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => {
                return Err(BackendError::Auth(format!("backend rejected credentials ({status})")))
            }
            429 | 500..=599 => {
                return Err(BackendError::Transient(format!("http status {status}")))
            }
            _ => return Err(BackendError::Permanent(format!("http status {status}"))),
        }
        let body: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Permanent(format!("unparseable response body: {e}")))?;
        self.extract_text(&body).ok_or_else(|| {
            BackendError::Permanent(format!(
                "response missing completion text for shape {:?}",
                self.config.wire_shape
            ))
        })
    }

    fn model_id(&self) -> &str {
        &self.config.model_id
    }

    fn params_snapshot(&self) -> Value {
        json!({
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "endpoint": self.config.endpoint,
            "wire_shape": self.config.wire_shape,
        })
    }
}
