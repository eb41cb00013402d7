//! Candidate generation against an external completion model, sweeping a
//! list of sampling temperatures.

mod http;
mod mock;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::promptkit::Prompt;
use crate::seeding::keyed_rng;

pub use http::HttpBackend;
pub use mock::{mock_backend, MockBackend};

/// Attempts per request before giving up on an unavailable backend.
pub const MAX_ATTEMPTS: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("malformed backend response: {0}")]
    Malformed(String),
    #[error("backend rejected request: {0}")]
    Rejected(String),
    #[error("no script for problem `{0}`")]
    UnknownProblem(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("backend unavailable after {attempts} attempts: {last}")]
    BackendUnavailable { attempts: u32, last: String },
    #[error("malformed backend response: {0}")]
    BackendMalformedResponse(String),
    #[error("backend rejected request: {0}")]
    BackendRejected(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
}

/// One completion request. `first_index` is the sample index of the first
/// completion asked for, so partial batches can be resumed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest<'a> {
    pub problem_id: &'a str,
    pub prompt: &'a str,
    pub n: usize,
    pub temperature: f64,
    pub max_new_tokens: usize,
    pub stop: &'a [String],
    pub seed: u64,
    pub first_index: usize,
}

/// Anything that turns a prompt into completions.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub n_samples: usize,
    pub temperatures: Vec<f64>,
    pub max_new_tokens: usize,
    pub stop_sequences: Vec<String>,
    pub seed: u64,
    /// Concurrent requests in flight.
    pub max_in_flight: usize,
    /// First retry delay; doubles on every further attempt.
    pub retry_base_delay_ms: u64,
}

/// Temperatures 0.1, 0.2, ..., 1.0.
pub fn default_temperatures() -> Vec<f64> {
    (1..=10).map(|i| f64::from(i) / 10.0).collect()
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            n_samples: 200,
            temperatures: default_temperatures(),
            max_new_tokens: 300,
            stop_sequences: vec!["\ndef ".into(), "\nclass ".into(), "\nif __name__".into(), "\nprint(".into()],
            seed: 0,
            max_in_flight: 4,
            retry_base_delay_ms: 500,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_samples == 0 {
            return Err(GenError::InvalidConfig("n_samples must be at least 1".into()));
        }
        if self.temperatures.is_empty() {
            return Err(GenError::InvalidConfig("no temperatures".into()));
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(**t > 0.0 && **t <= 2.0)) {
            return Err(GenError::InvalidConfig(format!("temperature {t} outside (0, 2]")));
        }
        if self.temperatures.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GenError::InvalidConfig("temperatures must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub problem_id: String,
    pub temperature: f64,
    pub sample_index: usize,
    pub code: String,
}

fn with_retries(
    backend: &dyn CompletionBackend,
    request: &CompletionRequest<'_>,
    base_delay: Duration,
) -> Result<Vec<String>, GenError> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match backend.complete(request) {
            Ok(v) => return Ok(v),
            Err(BackendError::Unavailable(msg)) if attempt < MAX_ATTEMPTS => {
                let delay = base_delay * 2u32.pow(attempt - 1);
                log::warn!("backend unavailable (attempt {attempt}/{MAX_ATTEMPTS}): {msg}; retrying in {delay:?}");
                std::thread::sleep(delay);
            }
            Err(BackendError::Unavailable(last)) => {
                return Err(GenError::BackendUnavailable { attempts: attempt, last })
            }
            Err(BackendError::Malformed(m)) => return Err(GenError::BackendMalformedResponse(m)),
            Err(BackendError::Rejected(m)) => return Err(GenError::BackendRejected(m)),
            Err(BackendError::UnknownProblem(p)) => return Err(GenError::UnknownProblem(p)),
        }
    }
}

/// All `n_samples` completions for one temperature, asking again for the
/// remainder when the backend returns fewer than requested.
fn generate_one_temperature(
    prompt: &Prompt,
    cfg: &GenerationConfig,
    backend: &dyn CompletionBackend,
    temp_index: usize,
) -> Result<Vec<String>, GenError> {
    let temperature = cfg.temperatures[temp_index];
    let mut codes: Vec<String> = Vec::with_capacity(cfg.n_samples);
    while codes.len() < cfg.n_samples {
        let first_index = codes.len();
        let seed: u64 = keyed_rng(
            cfg.seed,
            &[&prompt.problem_id, &temp_index.to_string(), &first_index.to_string()],
        )
        .random();
        let request = CompletionRequest {
            problem_id: &prompt.problem_id,
            prompt: &prompt.text,
            n: cfg.n_samples - first_index,
            temperature,
            max_new_tokens: cfg.max_new_tokens,
            stop: &cfg.stop_sequences,
            seed,
            first_index,
        };
        let batch = with_retries(backend, &request, Duration::from_millis(cfg.retry_base_delay_ms))?;
        if batch.is_empty() {
            return Err(GenError::BackendMalformedResponse("empty completion list".into()));
        }
        codes.extend(batch.into_iter().take(cfg.n_samples - first_index));
    }
    Ok(codes)
}

/// Generate `|temperatures| * n_samples` candidates, ordered by temperature
/// and then by sample index, whatever order the requests complete in.
pub fn generate(
    prompt: &Prompt,
    cfg: &GenerationConfig,
    backend: &dyn CompletionBackend,
) -> Result<Vec<Candidate>, GenError> {
    cfg.validate()?;
    let temps = cfg.temperatures.len();
    type Slot = Mutex<Option<Result<Vec<String>, GenError>>>;
    let slots: Vec<Slot> = (0..temps).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.max_in_flight.clamp(1, temps);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= temps {
                    break;
                }
                let result = generate_one_temperature(prompt, cfg, backend, i);
                let failed = result.is_err();
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(result);
                if failed {
                    // stop handing out work
                    next.store(temps, Ordering::Relaxed);
                }
            });
        }
    });

    let mut out = Vec::with_capacity(temps * cfg.n_samples);
    for (i, slot) in slots.into_iter().enumerate() {
        let codes = match slot.into_inner().unwrap_or_else(|e| e.into_inner()) {
            Some(r) => r?,
            None => continue,
        };
        out.extend(codes.into_iter().enumerate().map(|(sample_index, code)| Candidate {
            problem_id: prompt.problem_id.clone(),
            temperature: cfg.temperatures[i],
            sample_index,
            code,
        }));
    }
    if out.len() != temps * cfg.n_samples {
        return Err(GenError::BackendMalformedResponse("generation stopped early".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::promptkit::PromptSetting;
    use std::collections::HashMap;
    use std::sync::atomic::AtomicU32;

    fn prompt(id: &str) -> Prompt {
        Prompt {
            problem_id: id.into(),
            setting: PromptSetting::NoApi,
            included_api_ids: vec![],
            text: "def f():\n".into(),
        }
    }

    fn cfg(n: usize, temps: &[f64]) -> GenerationConfig {
        GenerationConfig {
            n_samples: n,
            temperatures: temps.to_vec(),
            retry_base_delay_ms: 1,
            ..Default::default()
        }
    }

    fn script(entries: &[(&str, &[&str])]) -> MockBackend {
        mock_backend(
            entries
                .iter()
                .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
                .collect::<HashMap<_, _>>(),
        )
    }

    #[test]
    fn echo_mock() {
        let backend = script(&[("p1", &["return 1"])]);
        let c = generate(&prompt("p1"), &cfg(3, &[0.2]), &backend).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|c| c.code == "return 1" && c.temperature == 0.2));
    }

    #[test]
    fn temperature_major_order() {
        let backend = script(&[("p1", &["a", "b"])]);
        let c = generate(&prompt("p1"), &cfg(2, &[0.1, 0.2]), &backend).unwrap();
        let order: Vec<(f64, usize)> = c.iter().map(|c| (c.temperature, c.sample_index)).collect();
        assert_eq!(order, vec![(0.1, 0), (0.1, 1), (0.2, 0), (0.2, 1)]);
    }

    #[test]
    fn count_identity_and_determinism_over_full_sweep() {
        let backend = script(&[("p1", &["a", "b", "c"])]);
        let config = GenerationConfig { n_samples: 7, max_in_flight: 3, ..cfg(7, &default_temperatures()) };
        let a = generate(&prompt("p1"), &config, &backend).unwrap();
        assert_eq!(a.len(), 70);
        assert_eq!(generate(&prompt("p1"), &config, &backend).unwrap(), a);
    }

    struct Down(AtomicU32);
    impl CompletionBackend for Down {
        fn complete(&self, _: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Err(BackendError::Unavailable("connection refused".into()))
        }
    }

    #[test]
    fn unavailable_after_five_attempts() {
        let backend = Down(AtomicU32::new(0));
        let err = generate(&prompt("p1"), &cfg(2, &[0.5]), &backend).unwrap_err();
        assert!(matches!(err, GenError::BackendUnavailable { attempts: 5, .. }));
        assert_eq!(backend.0.load(Ordering::SeqCst), 5);
    }

    struct Flaky(AtomicU32);
    impl CompletionBackend for Flaky {
        fn complete(&self, r: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
            if self.0.fetch_add(1, Ordering::SeqCst) < 2 {
                return Err(BackendError::Unavailable("503".into()));
            }
            // one completion per call, to exercise resumption
            Ok(vec![format!("s{}", r.first_index)])
        }
    }

    #[test]
    fn retries_then_resumes_partial_batches() {
        let c = generate(&prompt("p1"), &cfg(3, &[1.0]), &Flaky(AtomicU32::new(0))).unwrap();
        let codes: Vec<_> = c.iter().map(|c| c.code.as_str()).collect();
        assert_eq!(codes, ["s0", "s1", "s2"]);
    }

    #[test]
    fn invalid_configs() {
        let b = script(&[("p1", &["a"])]);
        for bad in [cfg(0, &[0.1]), cfg(1, &[]), cfg(1, &[0.0]), cfg(1, &[2.5]), cfg(1, &[0.2, 0.1])] {
            assert!(matches!(generate(&prompt("p1"), &bad, &b), Err(GenError::InvalidConfig(_))));
        }
    }

    #[test]
    fn default_sweep() {
        let t = default_temperatures();
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], 0.1);
        assert_eq!(t[9], 1.0);
        assert_eq!(GenerationConfig::default().n_samples, 200);
    }
}
