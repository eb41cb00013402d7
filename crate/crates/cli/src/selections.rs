use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One user's chosen APIs for one problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub problem_id: String,
    pub user_id: String,
    pub api_ids: Vec<String>,
}

type ByProblem = BTreeMap<String, BTreeMap<String, Selection>>;

/// Selections kept in memory and appended to a JSON Lines file; a later
/// line for the same (problem, user) replaces the earlier one.
#[derive(Debug)]
pub struct SelectionStore {
    path: PathBuf,
    inner: Mutex<ByProblem>,
}

impl SelectionStore {
    /// Load the log at `path`; a missing file is an empty store.
    pub fn open(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = ByProblem::new();
        match std::fs::File::open(&path) {
            Ok(f) => {
                for (i, line) in BufReader::new(f).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let sel: Selection = serde_json::from_str(&line).map_err(|e| {
                        CliError::validation(format!("{}:{}: {e}", path.display(), i + 1))
                    })?;
                    map.entry(sel.problem_id.clone()).or_default().insert(sel.user_id.clone(), sel);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        Ok(Self { path, inner: Mutex::new(map) })
    }

    pub fn record(&self, selection: Selection) -> CliResult<()> {
        let mut map = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut line = serde_json::to_string(&selection)?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.flush()?;
        map.entry(selection.problem_id.clone()).or_default().insert(selection.user_id.clone(), selection);
        Ok(())
    }

    pub fn get(&self, problem_id: &str, user_id: &str) -> Option<Selection> {
        let map = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        map.get(problem_id).and_then(|m| m.get(user_id)).cloned()
    }

    /// Every user's current selection for a problem, ordered by user id.
    pub fn for_problem(&self, problem_id: &str) -> Vec<BTreeSet<String>> {
        let map = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        map.get(problem_id)
            .map(|m| m.values().map(|s| s.api_ids.iter().cloned().collect()).collect())
            .unwrap_or_default()
    }
}
