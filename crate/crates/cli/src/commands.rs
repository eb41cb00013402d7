use std::collections::{BTreeMap, HashMap};
use std::io::{BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use privapi_core::apiretriever::{aggregate_votes, build_index, default_index_text, Ranking, DEFAULT_DIMENSION};
use privapi_core::benchforge::{convert_benchmark, convert_text, validate_manifest, KeywordMap};
use privapi_core::corpusforge::{
    build_corpus, load_corpus, read_sidecar, render_cross_merged, weighted_sample, CorpusConfig,
    DEFAULT_NEG_RATIO, DEFAULT_NOISE_RATE,
};
use privapi_core::evalharness::{build_report, render_table, run_problem, Problem, RunOptions};
use privapi_core::genclient::{default_temperatures, generate, Candidate, CompletionBackend, GenerationConfig};
use privapi_core::promptkit::{assemble_prompt, Prompt, DEFAULT_BUDGET_CHARS};

use crate::error::{CliError, CliResult};
use crate::home::{DataHome, DEFAULT_HOME};
use crate::pipeline::{self, Retrieval, SettingKind};
use crate::selections::SelectionStore;
use crate::server::{self, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "privapi", version, about = "Retrieval-augmented code generation against private libraries")]
pub struct Cli {
    /// Data root holding the document store, index, selections and reports.
    #[arg(long, global = true, env = "PRIVAPI_HOME", default_value = DEFAULT_HOME)]
    pub home: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an API documentation dump into the document store.
    Ingest(IngestArgs),
    /// Embed every API and write the retrieval index.
    Index(IndexArgs),
    /// Rank APIs for a query or for every problem of a benchmark.
    Retrieve(RetrieveArgs),
    /// Print the prompt for one problem.
    Prompt(PromptArgs),
    /// Sample candidate completions for every problem of a benchmark.
    Generate(GenerateArgs),
    /// Execute candidates against the tests and report pass@k.
    Eval(EvalArgs),
    /// Rename public-library tokens into private ones.
    Convert(ConvertArgs),
    /// Build retrieval examples and cross-merged pretraining files from code.
    Corpus(CorpusArgs),
    /// Check problem count and difficulty ratio of a benchmark.
    ValidateManifest(ManifestArgs),
    /// Run the HTTP service for human API selection.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// JSON Lines documentation dump.
    pub dump: PathBuf,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    pub dimension: usize,
    /// External embedding service; the built-in hashing embedder otherwise.
    #[arg(long, env = "PRIVAPI_EMBED_URL")]
    pub embed_url: Option<String>,
}

#[derive(Debug, Args)]
pub struct RetrievalOpts {
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long, env = "PRIVAPI_EMBED_URL")]
    pub embed_url: Option<String>,
}

impl RetrievalOpts {
    fn load(&self, home: &DataHome) -> CliResult<Retrieval> {
        Retrieval::load(
            &self.docs.clone().unwrap_or_else(|| home.docs()),
            &self.index.clone().unwrap_or_else(|| home.index()),
            self.embed_url.as_deref(),
        )
    }
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub retrieval: RetrievalOpts,
    /// Free-text query.
    #[arg(long, conflicts_with = "benchmark", required_unless_present = "benchmark")]
    pub query: Option<String>,
    /// Rank for every problem of this benchmark (queried with its context).
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    /// Write rankings here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SettingOpts {
    #[arg(long, value_enum, default_value = "top-n")]
    pub setting: SettingKind,
    /// Number of retrieved APIs for the top-n setting.
    #[arg(long, default_value_t = 5)]
    pub top_n: usize,
    /// Precomputed rankings (from `retrieve --benchmark`).
    #[arg(long)]
    pub rankings: Option<PathBuf>,
    /// Prompt size limit in characters.
    #[arg(long, default_value_t = DEFAULT_BUDGET_CHARS)]
    pub budget: usize,
    #[command(flatten)]
    pub retrieval: RetrievalOpts,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    #[arg(long)]
    pub benchmark: PathBuf,
    #[arg(long)]
    pub problem: String,
    #[command(flatten)]
    pub setting: SettingOpts,
}

#[derive(Debug, Args)]
pub struct GenOpts {
    #[arg(long, default_value_t = 200)]
    pub n_samples: usize,
    /// Comma-separated sampling temperatures.
    #[arg(long, value_delimiter = ',', default_values_t = default_temperatures())]
    pub temperatures: Vec<f64>,
    #[arg(long, default_value_t = 300)]
    pub max_new_tokens: usize,
    #[arg(long = "stop")]
    pub stop_sequences: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub max_in_flight: usize,
    /// Scripted completions `{problem_id: [code, ...]}` instead of a live backend.
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
}

impl GenOpts {
    fn config(&self) -> GenerationConfig {
        GenerationConfig {
            n_samples: self.n_samples,
            temperatures: self.temperatures.clone(),
            max_new_tokens: self.max_new_tokens,
            stop_sequences: self.stop_sequences.clone(),
            seed: self.seed,
            max_in_flight: self.max_in_flight,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub benchmark: PathBuf,
    #[command(flatten)]
    pub setting: SettingOpts,
    #[command(flatten)]
    pub gen: GenOpts,
    /// Candidates JSON Lines output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunnerOpts {
    /// Sandbox runner command speaking the JSON stdin/stdout protocol.
    #[arg(long, env = "PRIVAPI_RUNNER_CMD")]
    pub runner_cmd: Option<String>,
    /// Interpreter for the built-in local runner.
    #[arg(long, default_value = "python3")]
    pub python: PathBuf,
    /// Extra module directories for the local runner (e.g. alias shims).
    #[arg(long)]
    pub python_path: Vec<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub timeout_secs: f64,
    #[arg(long, default_value_t = 2048)]
    pub memory_mb: u64,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
}

impl RunnerOpts {
    fn options(&self) -> CliResult<RunOptions> {
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(CliError::validation("--timeout-secs must be positive"));
        }
        Ok(RunOptions { timeout_secs: self.timeout_secs, memory_limit_mb: self.memory_mb, workers: self.workers })
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub benchmark: PathBuf,
    /// Candidates from `generate`; when omitted they are generated here.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[command(flatten)]
    pub setting: SettingOpts,
    #[command(flatten)]
    pub gen: GenOpts,
    #[command(flatten)]
    pub runner: RunnerOpts,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 10, 100])]
    pub k: Vec<usize>,
    /// Where to write the report files; `<home>/reports` by default.
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Bundled map name (pandas_monkey, numpy_beatnum) or a TSV file.
    #[arg(long)]
    pub map: String,
    /// Convert a single snippet and print it.
    #[arg(long, conflicts_with = "benchmark", required_unless_present = "benchmark")]
    pub text: Option<String>,
    #[arg(long, requires = "out")]
    pub benchmark: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object mapping public golden api_ids to private ones; by default
    /// the library prefix is swapped.
    #[arg(long)]
    pub id_map: Option<PathBuf>,
    /// Also write a Python alias module for the private library here.
    #[arg(long)]
    pub shim_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Directory of Python source files.
    #[arg(long)]
    pub root: PathBuf,
    /// JSON Lines quality signals keyed by relative path.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_NEG_RATIO)]
    pub neg_ratio: usize,
    #[arg(long, default_value_t = DEFAULT_NOISE_RATE)]
    pub noise_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also draw this many files, weighted by quality, into `sample.txt`.
    #[arg(long)]
    pub sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    #[arg(long)]
    pub benchmark: PathBuf,
    #[arg(long)]
    pub expected: usize,
    /// Share of 1-API : 2-API : 3+-API problems.
    #[arg(long, default_value = "6:3:1", value_parser = pipeline::parse_ratio)]
    pub ratio: [u32; 3],
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long)]
    pub benchmark: PathBuf,
    #[command(flatten)]
    pub retrieval: RetrievalOpts,
    #[arg(long, default_value_t = 0.2)]
    pub temperature: f64,
    #[arg(long, default_value_t = 300)]
    pub max_new_tokens: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET_CHARS)]
    pub budget: usize,
    #[command(flatten)]
    pub runner: RunnerOpts,
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Run one parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let home = DataHome::new(&cli.home);
    match cli.command {
        Command::Ingest(a) => ingest(&home, a, out),
        Command::Index(a) => index(&home, a, out),
        Command::Retrieve(a) => retrieve(&home, a, out),
        Command::Prompt(a) => prompt(&home, a, out),
        Command::Generate(a) => generate_cmd(&home, a, out),
        Command::Eval(a) => eval(&home, a, out),
        Command::Convert(a) => convert(a, out),
        Command::Corpus(a) => corpus(&home, a, out),
        Command::ValidateManifest(a) => validate(a, out),
        Command::Serve(a) => serve(&home, a),
    }
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    records: usize,
    libraries: Vec<&'a str>,
    store: String,
}

fn ingest(home: &DataHome, a: IngestArgs, out: &mut dyn Write) -> CliResult<()> {
    let store = pipeline::load_store(&a.dump)?;
    let path = home.docs();
    let mut w = pipeline::create_file(&path)?;
    store.write_dump(&mut w)?;
    w.flush()?;
    log::info!("ingested {} records into {}", store.len(), path.display());
    print_json(out, &IngestSummary { records: store.len(), libraries: store.libraries(), store: path.display().to_string() })
}

fn index(home: &DataHome, a: IndexArgs, out: &mut dyn Write) -> CliResult<()> {
    let store = pipeline::load_store(&a.docs.unwrap_or_else(|| home.docs()))?;
    let embedder = pipeline::make_embedder(a.embed_url.as_deref(), a.dimension)?;
    let idx = build_index(&store, embedder.as_ref(), &default_index_text)?;
    let path = a.out.unwrap_or_else(|| home.index());
    let mut w = pipeline::create_file(&path)?;
    idx.write_to(&mut w)?;
    w.flush()?;
    print_json(
        out,
        &serde_json::json!({
            "entries": idx.len(),
            "dimension": idx.dimension(),
            "fingerprint": idx.fingerprint(),
            "index": path.display().to_string(),
        }),
    )
}

fn retrieve(home: &DataHome, a: RetrieveArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.k == 0 {
        return Err(CliError::validation("k must be at least 1"));
    }
    let r = a.retrieval.load(home)?;
    if let Some(text) = &a.query {
        let ranking = privapi_core::apiretriever::query(&r.index, text, a.k, r.embedder.as_ref())?;
        return print_json(out, &ranking);
    }
    let problems = pipeline::load_benchmark(a.benchmark.as_deref().unwrap_or(Path::new("")))?;
    let rankings = problems.iter().map(|p| r.rank(p, a.k)).collect::<CliResult<Vec<_>>>()?;
    match &a.out {
        Some(path) => {
            let mut w = pipeline::create_file(path)?;
            pipeline::write_jsonl(&mut w, &rankings)?;
            w.flush()?;
            Ok(())
        }
        None => pipeline::write_jsonl(out, &rankings),
    }
}

/// Everything needed to turn problems into prompts under one setting.
struct Prompter {
    retrieval: Retrieval,
    kind: SettingKind,
    top_n: usize,
    budget: usize,
    rankings: HashMap<String, Ranking>,
    selections: Option<SelectionStore>,
}

impl Prompter {
    fn new(home: &DataHome, opts: &SettingOpts) -> CliResult<Self> {
        if opts.setting == SettingKind::TopN && opts.top_n == 0 {
            return Err(CliError::validation("--top-n must be at least 1"));
        }
        let retrieval = opts.retrieval.load(home)?;
        let rankings = match &opts.rankings {
            Some(path) => pipeline::read_jsonl::<Ranking>(path)?
                .into_iter()
                .filter_map(|r| r.problem_id.clone().map(|id| (id, r)))
                .collect(),
            None => HashMap::new(),
        };
        let selections =
            if opts.setting == SettingKind::Human { Some(SelectionStore::open(home.selections())?) } else { None };
        Ok(Self { retrieval, kind: opts.setting, top_n: opts.top_n, budget: opts.budget, rankings, selections })
    }

    fn prompt(&self, problem: &Problem) -> CliResult<Prompt> {
        let computed;
        let ranking = if !self.kind.needs_ranking() {
            None
        } else if let Some(r) = self.rankings.get(&problem.problem_id) {
            Some(r)
        } else {
            let depth = self.top_n.max(server::MAX_CANDIDATES).min(self.retrieval.index.len());
            computed = self.retrieval.rank(problem, depth)?;
            Some(&computed)
        };
        let votes = self
            .selections
            .as_ref()
            .map(|s| aggregate_votes(&s.for_problem(&problem.problem_id), None));
        let setting = pipeline::setting_for(self.kind, self.top_n, problem, ranking, votes.as_ref())?;
        Ok(assemble_prompt(&problem.problem_id, &problem.context, &setting, &self.retrieval.store, self.budget)?)
    }
}

fn prompt(home: &DataHome, a: PromptArgs, out: &mut dyn Write) -> CliResult<()> {
    let problems = pipeline::load_benchmark(&a.benchmark)?;
    let problem = pipeline::find_problem(&problems, &a.problem)?;
    let p = Prompter::new(home, &a.setting)?.prompt(problem)?;
    out.write_all(p.text.as_bytes())?;
    Ok(())
}

/// Prompt and sample every problem; returns candidates grouped per problem
/// in benchmark order, plus the setting label.
fn generate_all(
    home: &DataHome,
    problems: &[Problem],
    setting: &SettingOpts,
    gen: &GenOpts,
) -> CliResult<(Vec<Vec<Candidate>>, String)> {
    let cfg = gen.config();
    cfg.validate()?;
    let backend: Box<dyn CompletionBackend> = pipeline::make_backend(gen.mock_script.as_deref())?;
    let prompter = Prompter::new(home, setting)?;
    let mut label = String::new();
    let mut all = Vec::with_capacity(problems.len());
    for problem in problems {
        let prompt = prompter.prompt(problem)?;
        label = prompt.setting.name();
        log::info!("generating {} x {:?} for {}", cfg.n_samples, cfg.temperatures, problem.problem_id);
        all.push(generate(&prompt, &cfg, backend.as_ref()).map_err(|e| CliError::from(e).context(&problem.problem_id))?);
    }
    Ok((all, label))
}

fn generate_cmd(home: &DataHome, a: GenerateArgs, out: &mut dyn Write) -> CliResult<()> {
    let problems = pipeline::load_benchmark(&a.benchmark)?;
    let (candidates, _) = generate_all(home, &problems, &a.setting, &a.gen)?;
    let flat: Vec<Candidate> = candidates.into_iter().flatten().collect();
    match &a.out {
        Some(path) => {
            let mut w = pipeline::create_file(path)?;
            pipeline::write_jsonl(&mut w, &flat)?;
            w.flush()?;
            Ok(())
        }
        None => pipeline::write_jsonl(out, &flat),
    }
}

fn setting_label(kind: SettingKind, top_n: usize) -> String {
    match kind {
        SettingKind::NoApi => "No API".into(),
        SettingKind::Perfect => "Perfect".into(),
        SettingKind::TopN => format!("Top-{top_n}"),
        SettingKind::Human => "Human".into(),
    }
}

fn eval(home: &DataHome, a: EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let problems = pipeline::load_benchmark(&a.benchmark)?;
    if a.k.is_empty() || a.k.contains(&0) {
        return Err(CliError::validation("k values must be at least 1"));
    }
    let opts = a.runner.options()?;
    let (grouped, label) = match &a.candidates {
        Some(path) => {
            let mut by_problem: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
            for c in pipeline::read_jsonl::<Candidate>(path)? {
                by_problem.entry(c.problem_id.clone()).or_default().push(c);
            }
            if let Some(extra) = by_problem.keys().find(|id| !problems.iter().any(|p| &&p.problem_id == id)) {
                return Err(CliError::validation(format!("candidates for unknown problem `{extra}`")));
            }
            let grouped = problems
                .iter()
                .map(|p| {
                    by_problem
                        .remove(&p.problem_id)
                        .ok_or_else(|| CliError::validation(format!("no candidates for `{}`", p.problem_id)))
                })
                .collect::<CliResult<Vec<_>>>()?;
            (grouped, setting_label(a.setting.setting, a.setting.top_n))
        }
        None => {
            if let Some(k) = a.k.iter().find(|k| **k > a.gen.n_samples) {
                return Err(CliError::validation(format!("k={k} exceeds --n-samples {}", a.gen.n_samples)));
            }
            generate_all(home, &problems, &a.setting, &a.gen)?
        }
    };

    let runner = pipeline::make_runner(a.runner.runner_cmd.as_deref(), &a.runner.python, &a.runner.python_path)?;
    let mut results = Vec::new();
    for (problem, candidates) in problems.iter().zip(&grouped) {
        log::info!("running {} candidates for {}", candidates.len(), problem.problem_id);
        results.extend(run_problem(problem, candidates, runner.as_ref(), &opts)?);
    }
    let benchmark = &problems[0].benchmark;
    let report = build_report(benchmark, &label, &problems, &results, &a.k)?;
    let table = render_table(std::slice::from_ref(&report), &a.k);

    let dir = a.report_dir.unwrap_or_else(|| home.reports());
    let stem = pipeline::report_stem(benchmark, &label);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join(format!("{stem}.json")), pipeline::report_json(&report)?)?;
    std::fs::write(dir.join(format!("{stem}.txt")), &table)?;
    out.write_all(table.as_bytes())?;
    Ok(())
}

fn load_map(name: &str) -> CliResult<KeywordMap> {
    if let Some(map) = KeywordMap::bundled(name) {
        return Ok(map);
    }
    let text = std::fs::read_to_string(name)
        .map_err(|e| CliError::validation(format!("`{name}` is neither a bundled map nor a readable file: {e}")))?;
    Ok(KeywordMap::from_tsv(&text, None)?)
}

fn convert(a: ConvertArgs, out: &mut dyn Write) -> CliResult<()> {
    let map = load_map(&a.map)?;
    if let Some(dir) = &a.shim_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.py", map.private_library)), map.alias_shim_source())?;
    }
    if let Some(text) = &a.text {
        let (converted, _) = convert_text(text, &map);
        writeln!(out, "{converted}")?;
        return Ok(());
    }
    let bench_path = a.benchmark.as_deref().unwrap_or(Path::new(""));
    let problems = pipeline::load_benchmark(bench_path)?;
    let ids: HashMap<String, String> = match &a.id_map {
        Some(path) => serde_json::from_reader(BufReader::new(
            std::fs::File::open(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?,
        ))?,
        None => {
            let prefix = format!("{}.", map.public_library);
            problems
                .iter()
                .flat_map(|p| &p.golden_api_ids)
                .map(|id| {
                    let private = match id.strip_prefix(&prefix) {
                        Some(rest) => format!("{}.{rest}", map.private_library),
                        None => id.clone(),
                    };
                    (id.clone(), private)
                })
                .collect()
        }
    };
    let (converted, report) = convert_benchmark(&problems, &map, &ids)?;
    let out_path = a.out.as_deref().unwrap_or(Path::new(""));
    let mut w = pipeline::create_file(out_path)?;
    pipeline::write_jsonl(&mut w, &converted)?;
    w.flush()?;
    print_json(out, &report)
}

fn corpus(home: &DataHome, a: CorpusArgs, out: &mut dyn Write) -> CliResult<()> {
    let store = pipeline::load_store(&a.docs.clone().unwrap_or_else(|| home.docs()))?;
    let sidecar = match &a.sidecar {
        Some(path) => read_sidecar(BufReader::new(
            std::fs::File::open(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?,
        ))?,
        None => HashMap::new(),
    };
    let files = load_corpus(&a.root, &sidecar)?;
    let cfg = CorpusConfig { neg_ratio: a.neg_ratio, noise_rate: a.noise_rate, seed: a.seed };
    let built = build_corpus(&files, &store, &cfg)?;

    std::fs::create_dir_all(&a.out)?;
    let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> CliResult<()>| -> CliResult<()> {
        let mut w = pipeline::create_file(&a.out.join(name))?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    };
    write("blocks.jsonl", &|w| pipeline::write_jsonl(w, &built.blocks))?;
    write("examples.jsonl", &|w| pipeline::write_jsonl(w, &built.examples))?;
    write("pretrain.jsonl", &|w| pipeline::write_jsonl(w, &built.documents))?;
    for doc in &built.documents {
        write(&format!("cross_merged/{}", doc.file_id), &|w| Ok(w.write_all(render_cross_merged(doc).as_bytes())?))?;
    }
    if let Some(count) = a.sample {
        let items: Vec<(&str, f64)> = built.documents.iter().map(|d| (d.file_id.as_str(), d.weight)).collect();
        let drawn = weighted_sample(&items, count, a.seed)?;
        write("sample.txt", &|w| {
            for id in &drawn {
                writeln!(w, "{id}")?;
            }
            Ok(())
        })?;
    }
    print_json(
        out,
        &serde_json::json!({
            "files": files.len(),
            "empty_files": built.empty_files,
            "blocks": built.blocks.len(),
            "examples": built.examples.len(),
            "documents": built.documents.len(),
        }),
    )
}

fn validate(a: ManifestArgs, out: &mut dyn Write) -> CliResult<()> {
    let problems = pipeline::load_benchmark(&a.benchmark)?;
    let check = validate_manifest(&problems, a.expected, a.ratio);
    print_json(out, &check)?;
    if check.passed() {
        Ok(())
    } else {
        Err(CliError::validation("manifest check failed"))
    }
}

fn serve(home: &DataHome, a: ServeArgs) -> CliResult<()> {
    let problems = pipeline::load_benchmark(&a.benchmark)?;
    let retrieval = a.retrieval.load(home)?;
    let selections = SelectionStore::open(home.selections())?;
    let backend = match pipeline::make_backend(a.mock_script.as_deref()) {
        Ok(b) => Some(b),
        Err(e) if a.mock_script.is_none() => {
            log::warn!("generation disabled: {e}");
            None
        }
        Err(e) => return Err(e),
    };
    let runner = pipeline::make_runner(a.runner.runner_cmd.as_deref(), &a.runner.python, &a.runner.python_path)?;
    let gen = GenerationConfig {
        temperatures: vec![a.temperature],
        max_new_tokens: a.max_new_tokens,
        seed: a.seed,
        ..Default::default()
    };
    gen.validate()?;
    let cfg = ServiceConfig { gen, run: a.runner.options()?, budget_chars: a.budget };
    let state = Arc::new(AppState::new(retrieval, problems, selections, backend, runner, cfg)?);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::runtime)?;
    rt.block_on(server::serve(a.addr, state))
}
