use std::path::{Path, PathBuf};

/// Default data root when neither `--home` nor `PRIVAPI_HOME` is set.
pub const DEFAULT_HOME: &str = "privapi-data";

/// Layout of the data root shared by all commands and the service.
#[derive(Debug, Clone)]
pub struct DataHome {
    root: PathBuf,
}

impl DataHome {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Canonical document dump written by `ingest`.
    pub fn docs(&self) -> PathBuf {
        self.root.join("docs.jsonl")
    }

    pub fn index(&self) -> PathBuf {
        self.root.join("index.apix")
    }

    /// Append-only log of human API selections.
    pub fn selections(&self) -> PathBuf {
        self.root.join("selections.jsonl")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }
}
