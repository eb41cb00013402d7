//! Loading and wiring shared by the commands and the service.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Serialize;

use privapi_core::apiretriever::{query, ApiIndex, BaselineEmbedder, Embedder, HttpEmbedder, Ranking};
use privapi_core::docstore::{ingest_doc_dump, DocStore};
use privapi_core::evalharness::{read_benchmark, EvalReport, LocalPythonRunner, Problem, ProtocolRunner, SandboxRunner};
use privapi_core::genclient::{mock_backend, CompletionBackend, HttpBackend};
use privapi_core::promptkit::PromptSetting;

use crate::error::{CliError, CliResult};

/// Timeout for external embedding requests.
const EMBED_TIMEOUT: Duration = Duration::from_secs(60);

fn open(path: &Path, what: &str) -> CliResult<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::validation(format!("{what} not found at {}", path.display())),
        _ => CliError::runtime(format!("{}: {e}", path.display())),
    })
}

pub fn load_store(path: &Path) -> CliResult<DocStore> {
    let f = open(path, "document store")?;
    ingest_doc_dump(BufReader::new(f)).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn load_benchmark(path: &Path) -> CliResult<Vec<Problem>> {
    let f = open(path, "benchmark")?;
    let problems = read_benchmark(BufReader::new(f)).map_err(|e| CliError::from(e).context(path.display()))?;
    if problems.is_empty() {
        return Err(CliError::validation(format!("benchmark {} has no problems", path.display())));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = problems.iter().find(|p| !seen.insert(p.problem_id.as_str())) {
        return Err(CliError::validation(format!("duplicate problem_id `{}`", dup.problem_id)));
    }
    Ok(problems)
}

pub fn find_problem<'a>(problems: &'a [Problem], id: &str) -> CliResult<&'a Problem> {
    problems
        .iter()
        .find(|p| p.problem_id == id)
        .ok_or_else(|| CliError::validation(format!("unknown problem `{id}`")))
}

pub fn load_index(path: &Path) -> CliResult<ApiIndex> {
    let f = open(path, "index")?;
    ApiIndex::read_from(BufReader::new(f)).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn make_embedder(embed_url: Option<&str>, dimension: usize) -> CliResult<Box<dyn Embedder>> {
    Ok(match embed_url {
        Some(url) => Box::new(HttpEmbedder::new(url, dimension, EMBED_TIMEOUT)?),
        None => Box::new(BaselineEmbedder::new(dimension)),
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let f = open(path, "input")?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::validation(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(out: &mut dyn Write, items: &[T]) -> CliResult<()> {
    for item in items {
        serde_json::to_writer(&mut *out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?))
}

/// Store, index and a matching embedder, loaded together.
pub struct Retrieval {
    pub store: DocStore,
    pub index: ApiIndex,
    pub embedder: Box<dyn Embedder>,
}

impl Retrieval {
    pub fn load(docs: &Path, index: &Path, embed_url: Option<&str>) -> CliResult<Self> {
        let store = load_store(docs)?;
        let index = load_index(index)?;
        let embedder = make_embedder(embed_url, index.dimension())?;
        if embedder.fingerprint() != index.fingerprint() {
            return Err(CliError::validation(format!(
                "index was built with `{}` but the configured embedder is `{}`",
                index.fingerprint(),
                embedder.fingerprint()
            )));
        }
        Ok(Self { store, index, embedder })
    }

    /// Top `k` APIs for a problem, queried with its context.
    pub fn rank(&self, problem: &Problem, k: usize) -> CliResult<Ranking> {
        Ok(query(&self.index, &problem.context, k, self.embedder.as_ref())?.for_problem(&problem.problem_id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingKind {
    NoApi,
    Perfect,
    TopN,
    Human,
}

impl SettingKind {
    pub fn needs_ranking(self) -> bool {
        matches!(self, Self::TopN | Self::Human)
    }
}

/// Build the prompt setting for one problem.
pub fn setting_for(
    kind: SettingKind,
    top_n: usize,
    problem: &Problem,
    ranking: Option<&Ranking>,
    votes: Option<&BTreeSet<String>>,
) -> CliResult<PromptSetting> {
    let ranking = || {
        ranking.ok_or_else(|| CliError::validation(format!("no ranking for `{}`", problem.problem_id)))
    };
    Ok(match kind {
        SettingKind::NoApi => PromptSetting::NoApi,
        SettingKind::Perfect => PromptSetting::perfect(problem.golden_api_ids.iter().cloned()),
        SettingKind::TopN => PromptSetting::top_n(top_n, ranking()?),
        SettingKind::Human => {
            let votes = votes
                .filter(|v| !v.is_empty())
                .ok_or_else(|| CliError::validation(format!("no voted APIs for `{}`", problem.problem_id)))?;
            PromptSetting::human(votes, ranking()?)
        }
    })
}

/// Scripted backend from a `{problem_id: [completion, ...]}` JSON file, or
/// the HTTP backend configured through the environment.
pub fn make_backend(mock_script: Option<&Path>) -> CliResult<Box<dyn CompletionBackend>> {
    if let Some(path) = mock_script {
        let script: HashMap<String, Vec<String>> =
            serde_json::from_reader(BufReader::new(open(path, "mock script")?))
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok(Box::new(mock_backend(script)));
    }
    match HttpBackend::from_env() {
        Some(Ok(b)) => Ok(Box::new(b)),
        Some(Err(e)) => Err(CliError::runtime(e)),
        None => Err(CliError::validation("no completion backend: set GEN_ENDPOINT or pass --mock-script")),
    }
}

/// A protocol runner when a command line is given, otherwise a local
/// interpreter.
pub fn make_runner(
    runner_cmd: Option<&str>,
    python: &Path,
    python_path: &[PathBuf],
) -> CliResult<Box<dyn SandboxRunner>> {
    if let Some(line) = runner_cmd {
        let runner = ProtocolRunner::from_command_line(line)
            .ok_or_else(|| CliError::validation("empty --runner-cmd"))?;
        return Ok(Box::new(runner));
    }
    // programs run from a scratch directory, so relative entries would not resolve
    let python_path = python_path.iter().map(std::path::absolute).collect::<std::io::Result<Vec<_>>>()?;
    let runner = LocalPythonRunner { interpreter: python.to_path_buf(), python_path };
    if !runner.available() {
        return Err(CliError::runtime(format!("cannot start python interpreter `{}`", python.display())));
    }
    Ok(Box::new(runner))
}

pub fn report_json(report: &EvalReport) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// File-name-safe stem for a report.
pub fn report_stem(benchmark: &str, setting: &str) -> String {
    let clean = |s: &str| {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c.to_ascii_lowercase() } else { '-' })
            .collect::<String>()
    };
    format!("{}_{}", clean(benchmark), clean(setting))
}

/// Parse `a:b:c` into three ratio weights.
pub fn parse_ratio(text: &str) -> Result<[u32; 3], String> {
    let parts: Vec<u32> = text
        .split(':')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[u32; 3]>::try_from(parts).map_err(|_| format!("expected three values like 6:3:1, got `{text}`"))
}
