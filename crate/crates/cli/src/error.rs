use std::fmt;

use serde::Serialize;

use privapi_core::apiretriever::RetrieverError;
use privapi_core::benchforge::BenchError;
use privapi_core::corpusforge::CorpusError;
use privapi_core::docstore::DocStoreError;
use privapi_core::evalharness::EvalError;
use privapi_core::genclient::GenError;
use privapi_core::promptkit::PromptError;

/// Bad input (exit 1) versus a failure while doing the work (exit 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Validation,
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    #[serde(rename = "error")]
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Validation, message: message.to_string() }
    }

    pub fn runtime(message: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Runtime, message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Runtime => 2,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{{\"error\":\"runtime\",\"message\":{:?}}}", self.message))
    }

    /// Prefix the message with what was being done.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Self::runtime(e)
        } else {
            Self::validation(e)
        }
    }
}

impl From<DocStoreError> for CliError {
    fn from(e: DocStoreError) -> Self {
        match e {
            DocStoreError::Io(_) => Self::runtime(e),
            _ => Self::validation(e),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(_) => Self::runtime(e),
            _ => Self::validation(e),
        }
    }
}

impl From<RetrieverError> for CliError {
    fn from(e: RetrieverError) -> Self {
        match e {
            RetrieverError::Provider(_) | RetrieverError::Malformed(_) | RetrieverError::Io(_) => Self::runtime(e),
            _ => Self::validation(e),
        }
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        Self::validation(e)
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::InvalidConfig(_) | GenError::UnknownProblem(_) => Self::validation(e),
            _ => Self::runtime(e),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::RunnerUnavailable(_) | EvalError::Io(_) => Self::runtime(e),
            _ => Self::validation(e),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        Self::validation(e)
    }
}
