use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, CompletionBackend, CompletionRequest};

#[derive(Serialize)]
struct CompleteBody<'a> {
    prompt: &'a str,
    n: usize,
    temperature: f64,
    max_new_tokens: usize,
    stop: &'a [String],
    seed: u64,
}

#[derive(Deserialize)]
struct CompleteResponse {
    completions: Vec<String>,
}

/// Client for a completion service speaking `POST {endpoint}/complete`.
pub struct HttpBackend {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            api_key,
            client,
        })
    }

    /// Configure from `GEN_ENDPOINT`, `GEN_API_KEY` and `GEN_TIMEOUT_SECS`
    /// (default 120). Returns `None` when no endpoint is set.
    pub fn from_env() -> Option<Result<Self, BackendError>> {
        let endpoint = std::env::var("GEN_ENDPOINT").ok().filter(|e| !e.is_empty())?;
        let api_key = std::env::var("GEN_API_KEY").ok().filter(|k| !k.is_empty());
        let timeout = std::env::var("GEN_TIMEOUT_SECS")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|s| *s > 0.0)
            .unwrap_or(120.0);
        Some(Self::new(endpoint, api_key, Duration::from_secs_f64(timeout)))
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
        let mut builder = self.client.post(format!("{}/complete", self.endpoint)).json(&CompleteBody {
            prompt: request.prompt,
            n: request.n,
            temperature: request.temperature,
            max_new_tokens: request.max_new_tokens,
            stop: request.stop,
            seed: request.seed,
        });
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder.send().map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(BackendError::Unavailable(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Rejected(format!("status {status}")));
        }
        let body: CompleteResponse = resp.json().map_err(|e| BackendError::Malformed(e.to_string()))?;
        Ok(body.completions)
    }
}
