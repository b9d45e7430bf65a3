//! Deterministic in-process backend for tests and desk-scale pipeline runs:
//! scripted responses, injectable failures and latencies, and a call log.

use super::{BackendError, TextBackend};
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

/// What a scripted call should do, consumed in call order.
#[derive(Debug, Clone)]
pub enum MockOutcome {
    /// Answer normally (script table / response fn applies).
    Respond,
    TransientError(String),
    PermanentError(String),
    /// Panic inside the call, emulating a crash mid-batch.
    Panic,
}

type ResponseFn = dyn Fn(&str) -> String + Send + Sync;

pub struct MockBackend {
    model_id: String,
    table: HashMap<String, String>,
    response_fn: Option<Box<ResponseFn>>,
    default_response: Option<String>,
    /// Per-call outcomes; calls beyond the list respond normally.
    outcomes: Mutex<Vec<MockOutcome>>,
    fail_always: bool,
    latency: Option<Duration>,
    calls: Mutex<Vec<String>>,
    n_calls: AtomicUsize,
}

impl MockBackend {
    /// Responds to every prompt with the prompt itself.
    pub fn echo(model_id: &str) -> Self {
        Self::new(model_id)
    }

    /// Responds with `f(prompt)`.
    pub fn with_fn(model_id: &str, f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        let mut b = Self::new(model_id);
        b.response_fn = Some(Box::new(f));
        b
    }

    /// Responds from a prompt→response table; unscripted prompts get the
    /// default response if one is set, otherwise a permanent error.
    pub fn scripted(model_id: &str, entries: &[(&str, &str)]) -> Self {
        let mut b = Self::new(model_id);
        b.table =
            entries.iter().map(|(p, r)| (p.to_string(), r.to_string())).collect();
        b.response_fn = None;
        b
    }

    fn new(model_id: &str) -> Self {
        Self {
            model_id: model_id.to_string(),
            table: HashMap::new(),
            response_fn: None,
            default_response: None,
            outcomes: Mutex::new(Vec::new()),
            fail_always: false,
            latency: None,
            calls: Mutex::new(Vec::new()),
            n_calls: AtomicUsize::new(0),
        }
    }

    pub fn default_response(mut self, response: &str) -> Self {
        self.default_response = Some(response.to_string());
        self
    }

    /// First `n` calls fail with a transient error.
    pub fn fail_first(self, n: usize) -> Self {
        self.with_outcomes(vec![MockOutcome::TransientError("injected".into()); n])
    }

    pub fn fail_always(mut self) -> Self {
        self.fail_always = true;
        self
    }

    /// Explicit outcome per call index.
    pub fn with_outcomes(self, outcomes: Vec<MockOutcome>) -> Self {
        *self.outcomes.lock().unwrap() = outcomes;
        self
    }

    /// Panic on the `n`-th call, 1-based.
    pub fn panic_on_call(self, n: usize) -> Self {
        let mut outcomes = vec![MockOutcome::Respond; n - 1];
        outcomes.push(MockOutcome::Panic);
        self.with_outcomes(outcomes)
    }

    pub fn latency(mut self, latency: Duration) -> Self {
        self.latency = Some(latency);
        self
    }

    pub fn call_count(&self) -> usize {
        self.n_calls.load(Ordering::SeqCst)
    }

    pub fn calls(&self) -> Vec<String> {
        self.calls.lock().unwrap().clone()
    }

    fn respond(&self, prompt: &str) -> Result<String, BackendError> {
        if let Some(hit) = self.table.get(prompt) {
            return Ok(hit.clone());
        }
        if let Some(f) = &self.response_fn {
            return Ok(f(prompt));
        }
        if !self.table.is_empty() {
            return match &self.default_response {
                Some(d) => Ok(d.clone()),
                None => Err(BackendError::Permanent(format!(
                    "no scripted response for prompt {prompt:?}"
                ))),
            };
        }
        Ok(prompt.to_string())
    }
}

impl TextBackend for MockBackend {
    fn generate_text(&self, prompt: &str) -> Result<String, BackendError> {
        let call_index = self.n_calls.fetch_add(1, Ordering::SeqCst);
        self.calls.lock().unwrap().push(prompt.to_string());
        if let Some(latency) = self.latency {
            std::thread::sleep(latency);
        }
        if self.fail_always {
            return Err(BackendError::Transient("injected permanent outage".into()));
        }
        let outcome = {
            let outcomes = self.outcomes.lock().unwrap();
            outcomes.get(call_index).cloned().unwrap_or(MockOutcome::Respond)
        };
        match outcome {
            MockOutcome::Respond => self.respond(prompt),
            MockOutcome::TransientError(detail) => Err(BackendError::Transient(detail)),
            MockOutcome::PermanentError(detail) => Err(BackendError::Permanent(detail)),
            MockOutcome::Panic => panic!("mock backend crash injected at call {}", call_index + 1),
        }
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_lookup_and_default() {
        let b = MockBackend::scripted("m", &[("p1", "r1")]);
        assert_eq!(b.generate_text("p1").unwrap(), "r1");
        assert!(matches!(b.generate_text("p2"), Err(BackendError::Permanent(_))));

        let b = MockBackend::scripted("m", &[("p1", "r1")]).default_response("dflt");
        assert_eq!(b.generate_text("p2").unwrap(), "dflt");
    }

    #[test]
    fn call_log_tracks_every_call() {
        let b = MockBackend::echo("m");
        for i in 0..5 {
            let _ = b.generate_text(&format!("p{i}"));
        }
        assert_eq!(b.call_count(), 5);
        assert_eq!(b.calls(), vec!["p0", "p1", "p2", "p3", "p4"]);
    }
}
