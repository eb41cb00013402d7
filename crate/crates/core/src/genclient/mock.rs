use std::collections::HashMap;

use super::{BackendError, CompletionBackend, CompletionRequest};

/// Scripted backend: returns each problem's scripted completions in a
/// cycle, starting from the request's sample index.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    script: HashMap<String, Vec<String>>,
}

pub fn mock_backend(script: HashMap<String, Vec<String>>) -> MockBackend {
    MockBackend { script }
}

impl CompletionBackend for MockBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
        let codes = self
            .script
            .get(request.problem_id)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| BackendError::UnknownProblem(request.problem_id.to_string()))?;
        Ok((0..request.n)
            .map(|j| codes[(request.first_index + j) % codes.len()].clone())
            .collect())
    }
}
