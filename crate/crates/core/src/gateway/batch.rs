//! Concurrent batch runner: bounded parallelism, shared token-bucket rate
//! limiting, and a JSON-lines checkpoint ledger so an interrupted batch
//! resumes without re-issuing completed requests.

use super::{generate, GatewayError, GenerationRecord, RetryPolicy, TextBackend};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub parallelism: usize,
    /// Requests per second across all workers.
    pub rate_limit: f64,
    /// Ledger of completed requests, appended as each request finishes.
    pub checkpoint_path: Option<PathBuf>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self { parallelism: 4, rate_limit: 10.0, checkpoint_path: None }
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointLine {
    index: usize,
    prompt_sha256: String,
    record: GenerationRecord,
}

/// Process all prompts, preserving input order in the output. Partial
/// failures become failed records; they do not abort the batch. With a
/// checkpoint path set, completed requests (success or failure) are
/// skipped on resume.
pub fn run_batch(
    backend: &dyn TextBackend,
    policy: &RetryPolicy,
    prompts: &[String],
    options: &BatchOptions,
) -> Result<Vec<GenerationRecord>, GatewayError> {
    if options.parallelism == 0 {
        return Err(GatewayError::InvalidParallelism);
    }
    if !(options.rate_limit > 0.0) {
        return Err(GatewayError::InvalidRateLimit(options.rate_limit));
    }

    let mut slots: Vec<Option<GenerationRecord>> = vec![None; prompts.len()];
    if let Some(path) = &options.checkpoint_path {
        for (index, record) in load_checkpoint(path, prompts)? {
            slots[index] = Some(record);
        }
    }

    let checkpoint = match &options.checkpoint_path {
        Some(path) => Some(Mutex::new(BufWriter::new(
            OpenOptions::new().create(true).append(true).open(path)?,
        ))),
        None => None,
    };
    let slots = Mutex::new(slots);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let limiter = TokenBucket::new(options.rate_limit);

    std::thread::scope(|scope| {
        let workers: Vec<_> = (0..options.parallelism)
            .map(|_| {
                scope.spawn(|| {
                    loop {
                        if abort.load(Ordering::SeqCst) {
                            return;
                        }
                        let index = next.fetch_add(1, Ordering::SeqCst);
                        if index >= prompts.len() {
                            return;
                        }
                        if slots.lock().unwrap()[index].is_some() {
                            continue; // restored from checkpoint
                        }
                        limiter.acquire();
                        let request_id = request_id(index);
                        let result = catch_unwind(AssertUnwindSafe(|| {
                            generate(backend, policy, &request_id, &prompts[index])
                        }));
                        match result {
                            Ok(record) => {
                                if let Some(cp) = &checkpoint {
                                    append_checkpoint(cp, index, &prompts[index], &record);
                                }
                                slots.lock().unwrap()[index] = Some(record);
                            }
                            Err(panic) => {
                                abort.store(true, Ordering::SeqCst);
                                resume_unwind(panic);
                            }
                        }
                    }
                })
            })
            .collect();
        for worker in workers {
            if let Err(panic) = worker.join() {
                resume_unwind(panic);
            }
        }
    });

    let records = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every index processed or restored"))
        .collect();
    Ok(records)
}

pub(crate) fn request_id(index: usize) -> String {
    format!("req-{index:06}")
}

fn prompt_hash(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn append_checkpoint(
    checkpoint: &Mutex<BufWriter<File>>,
    index: usize,
    prompt: &str,
    record: &GenerationRecord,
) {
    let line = CheckpointLine {
        index,
        prompt_sha256: prompt_hash(prompt),
        record: record.clone(),
    };
    let mut writer = checkpoint.lock().unwrap();
    // Serialization of our own type cannot fail; io errors only surface here.
    if let Err(err) = serde_json::to_writer(&mut *writer, &line)
        .map_err(std::io::Error::from)
        .and_then(|()| writer.write_all(b"\n"))
        .and_then(|()| writer.flush())
    {
        log::warn!("checkpoint append failed: {err}");
    }
}

fn load_checkpoint(
    path: &Path,
    prompts: &[String],
) -> Result<Vec<(usize, GenerationRecord)>, GatewayError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let reader = BufReader::new(File::open(path)?);
    let mut restored = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CheckpointLine =
            serde_json::from_str(&line).map_err(|e| GatewayError::CheckpointCorrupt {
                path: path.display().to_string(),
                line: line_no + 1,
                detail: e.to_string(),
            })?;
        if parsed.index >= prompts.len()
            || prompt_hash(&prompts[parsed.index]) != parsed.prompt_sha256
        {
            return Err(GatewayError::CheckpointMismatch { index: parsed.index });
        }
        restored.push((parsed.index, parsed.record));
    }
    Ok(restored)
}

/// Shared token bucket with capacity one: enforces minimum spacing of
/// `1/rate` seconds between grants across all workers.
struct TokenBucket {
    state: Mutex<BucketState>,
    rate: f64,
}

struct BucketState {
    tokens: f64,
    last_refill: Instant,
}

impl TokenBucket {
    fn new(rate: f64) -> Self {
        Self {
            state: Mutex::new(BucketState { tokens: 1.0, last_refill: Instant::now() }),
            rate,
        }
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap();
                let now = Instant::now();
                let elapsed = now.duration_since(state.last_refill).as_secs_f64();
                state.tokens = (state.tokens + elapsed * self.rate).min(1.0);
                state.last_refill = now;
                if state.tokens >= 1.0 {
                    state.tokens -= 1.0;
                    None
                } else {
                    Some(Duration::from_secs_f64((1.0 - state.tokens) / self.rate))
                }
            };
            match wait {
                None => return,
                Some(duration) => std::thread::sleep(duration),
            }
        }
    }
}
