//! Uniform client for text-generation backends: a backend trait, retrying
//! single-shot generation, a deterministic in-process mock, and a
//! concurrent, rate-limited, checkpointed batch runner.

mod batch;
mod http;
mod mock;

pub use batch::{run_batch, BatchOptions};
pub use http::HttpBackend;
pub use mock::{MockBackend, MockOutcome};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Errors a backend call can surface. Transient errors are retried;
/// the rest terminate the request immediately.
#[derive(Debug, Error, Clone)]
pub enum BackendError {
    /// HTTP 429/5xx, timeouts, connection resets.
    #[error("transient backend error: {0}")]
    Transient(String),
    /// Anything that will not improve with a retry.
    #[error("permanent backend error: {0}")]
    Permanent(String),
    /// Missing or rejected credentials.
    #[error("auth error: {0}")]
    Auth(String),
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("checkpoint corrupt at {path} line {line}: {detail}")]
    CheckpointCorrupt { path: String, line: usize, detail: String },
    #[error("checkpoint entry {index} does not match the prompt at that position; refusing to resume")]
    CheckpointMismatch { index: usize },
    #[error("parallelism must be at least 1")]
    InvalidParallelism,
    #[error("rate limit must be positive, got {0}")]
    InvalidRateLimit(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A text-generation backend. One call, one prompt, one completion.
pub trait TextBackend: Send + Sync {
    fn generate_text(&self, prompt: &str) -> Result<String, BackendError>;
    fn model_id(&self) -> &str;
    /// Sampling parameters recorded into provenance; never credentials.
    fn params_snapshot(&self) -> serde_json::Value {
        serde_json::json!({})
    }
}

/// Connection settings for an HTTP backend. The auth token itself is read
/// from the environment variable named here at request time and is never
/// stored or serialized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model_id: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub auth_token_env: Option<String>,
    #[serde(default)]
    pub wire_shape: WireShape,
}

fn default_temperature() -> f64 {
    // Not validated against any published decoding setup; override in config.
    1.0
}
fn default_max_tokens() -> u32 {
    1024
}
fn default_timeout_secs() -> u64 {
    60
}

/// Request/response shape spoken by the HTTP adapter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireShape {
    /// `{"model","messages":[{"role","content"}],...}` with the completion
    /// at `choices[0].message.content`.
    #[default]
    ChatCompletions,
    /// `{"model","prompt",...}` with the completion at `choices[0].text`.
    Completions,
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.temperature < 0.0 {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".into());
        }
        Ok(())
    }
}

/// Retry behaviour for a single request. Backoff grows exponentially with
/// bounded jitter; the schedule is nondecreasing across attempts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
    #[serde(default = "default_initial_backoff_ms")]
    pub initial_backoff_ms: u64,
    #[serde(default = "default_max_backoff_ms")]
    pub max_backoff_ms: u64,
}

fn default_initial_backoff_ms() -> u64 {
    250
}
fn default_max_backoff_ms() -> u64 {
    20_000
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, initial_backoff_ms: 250, max_backoff_ms: 20_000 }
    }
}

impl RetryPolicy {
    /// Millisecond-scale backoff for tests.
    pub fn fast(max_retries: u32) -> Self {
        Self { max_retries, initial_backoff_ms: 1, max_backoff_ms: 8 }
    }

    /// Backoff before retry number `attempt` (1-based), given a jitter
    /// fraction in [0,1). Doubling dominates the jitter term, so for any
    /// jitter sequence the schedule never decreases between attempts.
    pub fn backoff(&self, attempt: u32, jitter: f64) -> Duration {
        let base = (self.initial_backoff_ms as f64) * 2f64.powi(attempt.saturating_sub(1) as i32);
        let with_jitter = base * (1.0 + jitter.clamp(0.0, 1.0 - f64::EPSILON));
        Duration::from_millis(with_jitter.min(self.max_backoff_ms as f64) as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationStatus {
    Success,
    Failed,
}

/// One completed generation attempt chain, with full provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub request_id: String,
    pub prompt: String,
    pub status: GenerationStatus,
    /// Present exactly when `status == Success`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub backend: String,
    pub params: serde_json::Value,
    pub latency_ms: u64,
    pub attempt_count: u32,
    pub created_at: DateTime<Utc>,
}

impl GenerationRecord {
    pub fn is_success(&self) -> bool {
        self.status == GenerationStatus::Success
    }
}

/// Issue one prompt against a backend, retrying transient failures with
/// exponential backoff. Permanent and auth failures, and exhausted
/// retries, yield a failed record rather than an `Err`.
pub fn generate(
    backend: &dyn TextBackend,
    policy: &RetryPolicy,
    request_id: &str,
    prompt: &str,
) -> GenerationRecord {
    let started = Instant::now();
    let created_at = Utc::now();
    let mut attempt = 0u32;
    let outcome = loop {
        attempt += 1;
        match backend.generate_text(prompt) {
            Ok(text) => break Ok(text),
            Err(BackendError::Transient(detail)) => {
                if attempt > policy.max_retries {
                    break Err(format!("retries exhausted after {attempt} attempts: {detail}"));
                }
                let jitter = jitter_fraction(request_id, attempt);
                std::thread::sleep(policy.backoff(attempt, jitter));
            }
            Err(err) => break Err(err.to_string()),
        }
    };
    let latency_ms = started.elapsed().as_millis() as u64;
    match outcome {
        Ok(text) => GenerationRecord {
            request_id: request_id.to_string(),
            prompt: prompt.to_string(),
            status: GenerationStatus::Success,
            response_text: Some(text),
            error: None,
            backend: backend.model_id().to_string(),
            params: backend.params_snapshot(),
            latency_ms,
            attempt_count: attempt,
            created_at,
        },
        Err(detail) => GenerationRecord {
            request_id: request_id.to_string(),
            prompt: prompt.to_string(),
            status: GenerationStatus::Failed,
            response_text: None,
            error: Some(detail),
            backend: backend.model_id().to_string(),
            params: backend.params_snapshot(),
            latency_ms,
            attempt_count: attempt,
            created_at,
        },
    }
}

/// Deterministic jitter in [0,1) from the request id and attempt number.
/// Timing noise, not an artifact: still seeded so reruns behave alike.
fn jitter_fraction(request_id: &str, attempt: u32) -> f64 {
    let h = crate::seed::derive_seed(attempt as u64, request_id);
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_mock_single_attempt() {
        let backend = MockBackend::with_fn("mock-echo", |p| p.chars().rev().collect());
        let rec = generate(&backend, &RetryPolicy::fast(3), "r1", "abc");
        assert!(rec.is_success());
        assert_eq!(rec.response_text.as_deref(), Some("cba"));
        assert_eq!(rec.attempt_count, 1);
        assert_eq!(backend.call_count(), 1);
    }

    #[test]
    fn fail_twice_then_succeed() {
        let backend = MockBackend::echo("mock").fail_first(2);
        let rec = generate(&backend, &RetryPolicy::fast(3), "r1", "hello");
        assert!(rec.is_success());
        assert_eq!(rec.attempt_count, 3);
        assert_eq!(backend.call_count(), 3);
    }

    #[test]
    fn retries_exhausted_yields_failed_record() {
        let backend = MockBackend::echo("mock").fail_always();
        let rec = generate(&backend, &RetryPolicy::fast(2), "r1", "hello");
        assert_eq!(rec.status, GenerationStatus::Failed);
        assert!(rec.response_text.is_none());
        assert_eq!(rec.attempt_count, 3); // initial try + 2 retries
        assert!(rec.error.as_deref().unwrap().contains("retries exhausted"));
    }

    #[test]
    fn permanent_failure_not_retried() {
        let backend = MockBackend::echo("mock")
            .with_outcomes(vec![MockOutcome::PermanentError("bad request".into())]);
        let rec = generate(&backend, &RetryPolicy::fast(5), "r1", "hello");
        assert_eq!(rec.status, GenerationStatus::Failed);
        assert_eq!(rec.attempt_count, 1);
    }

    #[test]
    fn backoff_schedule_nondecreasing_for_any_jitter() {
        let policy = RetryPolicy { max_retries: 10, initial_backoff_ms: 100, max_backoff_ms: 5_000 };
        for trial in 0..200 {
            let mut prev = Duration::ZERO;
            for attempt in 1..=10 {
                let jitter =
                    jitter_fraction(&format!("trial-{trial}"), attempt);
                let d = policy.backoff(attempt, jitter);
                assert!(d >= prev, "backoff decreased: {prev:?} -> {d:?}");
                prev = d;
            }
        }
    }

    #[test]
    fn response_presence_matches_status() {
        let ok = generate(&MockBackend::echo("m"), &RetryPolicy::fast(0), "a", "x");
        assert_eq!(ok.response_text.is_some(), ok.is_success());
        let bad = generate(&MockBackend::echo("m").fail_always(), &RetryPolicy::fast(0), "a", "x");
        assert_eq!(bad.response_text.is_some(), bad.is_success());
    }
}
