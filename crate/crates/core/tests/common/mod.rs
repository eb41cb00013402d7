#![allow(dead_code)]

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use privapi_core::apiretriever::{build_index, default_index_text, query, BaselineEmbedder};
use privapi_core::corpusforge::{build_corpus, load_corpus, read_sidecar, CorpusConfig, CorpusOutput};
use privapi_core::docstore::{ingest_doc_dump, DocStore};
use privapi_core::evalharness::{
    build_report, read_benchmark, render_table, run_problem, EvalReport, LocalPythonRunner, Problem,
    RunOptions, SandboxRunner, StubRunner,
};
use privapi_core::genclient::{generate, mock_backend, GenerationConfig};
use privapi_core::promptkit::{assemble_prompt, PromptSetting, DEFAULT_BUDGET_CHARS};

pub const MICRO_K: &[usize] = &[1, 2, 4];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("reading {rel}: {e}"))
}

/// Set `UPDATE_GOLDEN=1` to rewrite golden files instead of comparing.
pub fn updating_golden() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

pub fn check_golden(rel: &str, actual: &str) -> bool {
    let path = fixture(rel);
    if updating_golden() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return true;
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) => expected == actual,
        Err(_) => false,
    }
}

pub fn fixture_store() -> DocStore {
    let f = File::open(fixture("docs.jsonl")).unwrap();
    ingest_doc_dump(BufReader::new(f)).unwrap()
}

pub fn micro_problems() -> Vec<Problem> {
    let f = File::open(fixture("micro_benchmark.jsonl")).unwrap();
    read_benchmark(BufReader::new(f)).unwrap()
}

pub fn fixture_corpus(noise_rate: f64) -> CorpusOutput {
    let root = fixture("corpus");
    let sidecar = read_sidecar(BufReader::new(File::open(root.join("quality.jsonl")).unwrap())).unwrap();
    let files = load_corpus(&root, &sidecar).unwrap();
    let cfg = CorpusConfig { noise_rate, seed: 7, ..Default::default() };
    build_corpus(&files, &fixture_store(), &cfg).unwrap()
}

/// Python runner with the fixture library on the path, or a stub that
/// accepts exactly the canonical solutions and the scripted completions
/// known to be correct when no interpreter is installed.
pub fn micro_runner(problems: &[Problem]) -> (Box<dyn SandboxRunner>, &'static str) {
    let local = LocalPythonRunner { python_path: vec![fixture("pylib")], ..Default::default() };
    if local.available() {
        return (Box::new(local), "python");
    }
    let script = mock_script();
    let mut passing: Vec<String> = problems.iter().map(|p| p.program_for(&p.canonical_solution)).collect();
    for p in problems {
        for code in &script[&p.problem_id] {
            if code == &p.canonical_solution {
                passing.push(p.program_for(code));
            }
        }
    }
    (Box::new(StubRunner::new(passing)), "stub")
}

pub fn mock_script() -> HashMap<String, Vec<String>> {
    serde_json::from_str(&read_fixture("micro_mock_script.json")).unwrap()
}

/// The full retrieve → prompt → generate → execute → report loop on the
/// micro benchmark with a scripted backend.
pub fn micro_pipeline(runner: &dyn SandboxRunner) -> (EvalReport, String) {
    let store = fixture_store();
    let problems = micro_problems();
    let embedder = BaselineEmbedder::default();
    let index = build_index(&store, &embedder, &default_index_text).unwrap();
    let backend = mock_backend(mock_script());
    let cfg = GenerationConfig {
        n_samples: 4,
        temperatures: vec![0.2],
        retry_base_delay_ms: 1,
        ..Default::default()
    };
    let opts = RunOptions { timeout_secs: 10.0, ..Default::default() };

    let mut results = Vec::new();
    let mut label = String::new();
    for p in &problems {
        let ranking = query(&index, &p.context, 5, &embedder).unwrap().for_problem(&p.problem_id);
        let setting = PromptSetting::top_n(5, &ranking);
        label = setting.name();
        let prompt = assemble_prompt(&p.problem_id, &p.context, &setting, &store, DEFAULT_BUDGET_CHARS).unwrap();
        let candidates = generate(&prompt, &cfg, &backend).unwrap();
        results.extend(run_problem(p, &candidates, runner, &opts).unwrap());
    }
    let report = build_report("MicroEval", &label, &problems, &results, MICRO_K).unwrap();
    let table = render_table(std::slice::from_ref(&report), MICRO_K);
    (report, table)
}
