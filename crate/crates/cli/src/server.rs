//! HTTP service for human-in-the-loop API selection.
//!
//! Problem ids usually contain `/`; clients percent-encode them as one path
//! segment (`MicroEval%2F0`).

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use privapi_core::apiretriever::{aggregate_votes, majority_threshold, Ranking};
use privapi_core::evalharness::{pass_at_k, run_problem, Problem, RunOptions, SandboxRunner, Verdict};
use privapi_core::genclient::{generate, CompletionBackend, GenError, GenerationConfig};
use privapi_core::promptkit::{assemble_prompt, PromptSetting};

use crate::error::{CliError, CliResult};
use crate::pipeline::Retrieval;
use crate::selections::{Selection, SelectionStore};

/// APIs shown to a user per problem; selections must come from these.
pub const CANDIDATE_COUNT: usize = 5;
/// Largest `k` accepted by the candidates endpoint.
pub const MAX_CANDIDATES: usize = 20;
/// Cap on samples per generate request.
pub const MAX_UI_SAMPLES: usize = 20;
const DEFAULT_UI_SAMPLES: usize = 10;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Base generation settings; `n_samples` and `temperatures` are
    /// overridden per request.
    pub gen: GenerationConfig,
    pub run: RunOptions,
    pub budget_chars: usize,
}

pub struct AppState {
    retrieval: Retrieval,
    problems: Vec<Problem>,
    rankings: HashMap<String, Ranking>,
    selections: SelectionStore,
    backend: Option<Box<dyn CompletionBackend>>,
    runner: Box<dyn SandboxRunner>,
    cfg: ServiceConfig,
}

impl AppState {
    /// Rank every problem up front; the service never changes the store,
    /// index or benchmark afterwards.
    pub fn new(
        retrieval: Retrieval,
        problems: Vec<Problem>,
        selections: SelectionStore,
        backend: Option<Box<dyn CompletionBackend>>,
        runner: Box<dyn SandboxRunner>,
        cfg: ServiceConfig,
    ) -> CliResult<Self> {
        let depth = MAX_CANDIDATES.min(retrieval.index.len());
        let rankings = problems
            .iter()
            .map(|p| Ok((p.problem_id.clone(), retrieval.rank(p, depth)?)))
            .collect::<CliResult<_>>()?;
        Ok(Self { retrieval, problems, rankings, selections, backend, runner, cfg })
    }

    fn problem(&self, id: &str) -> Result<(&Problem, &Ranking), ApiError> {
        let p = self
            .problems
            .iter()
            .find(|p| p.problem_id == id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown problem `{id}`")))?;
        Ok((p, &self.rankings[id]))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self { status, kind, message: message.into() }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.kind, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        Self::internal(e)
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<AppState>>;

/// Empty and `null` bodies mean "all defaults".
fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice::<Option<T>>(body)
        .map(Option::unwrap_or_default)
        .map_err(|e| ApiError::unprocessable(format!("invalid JSON body: {e}")))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/problems", get(list_problems))
        .route("/problems/{id}/candidates", get(candidates))
        .route("/problems/{id}/selections", post(post_selection))
        .route("/problems/{id}/selections/{user_id}", get(get_selection))
        .route("/problems/{id}/vote", get(vote))
        .route("/problems/{id}/generate", post(generate_for_problem))
        .with_state(state)
}

/// Serve until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> CliResult<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| CliError::runtime(format!("binding {addr}: {e}")))?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(CliError::runtime)
}

#[derive(Debug, Serialize)]
struct ProblemView {
    problem_id: String,
    benchmark: String,
    num_apis: usize,
    context: String,
}

async fn list_problems(State(state): Shared) -> Json<Vec<ProblemView>> {
    let views = state
        .problems
        .iter()
        .map(|p| ProblemView {
            problem_id: p.problem_id.clone(),
            benchmark: p.benchmark.clone(),
            num_apis: p.num_apis,
            context: p.context.clone(),
        })
        .collect();
    Json(views)
}

/// What a user sees per candidate: no signature.
#[derive(Debug, Serialize)]
struct CandidateView {
    api_id: String,
    name: String,
    description: String,
}

#[derive(Debug, Deserialize)]
struct CandidateQuery {
    k: Option<usize>,
}

async fn candidates(State(state): Shared, Path(id): Path<String>, Query(q): Query<CandidateQuery>) -> ApiResult<Vec<CandidateView>> {
    let (_, ranking) = state.problem(&id)?;
    let k = q.k.unwrap_or(CANDIDATE_COUNT);
    if k == 0 || k > ranking.ranked.len() {
        return Err(ApiError::unprocessable(format!("k must be between 1 and {}", ranking.ranked.len())));
    }
    let views = ranking
        .ids()
        .take(k)
        .filter_map(|api_id| state.retrieval.store.get(api_id))
        .map(|r| CandidateView {
            api_id: r.api_id.clone(),
            name: r.name.clone(),
            description: r.description_first.clone(),
        })
        .collect();
    Ok(Json(views))
}

#[derive(Debug, Default, Deserialize)]
struct SelectionBody {
    #[serde(default)]
    user_id: String,
    #[serde(default)]
    api_ids: Vec<String>,
}

async fn post_selection(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Selection> {
    let (_, ranking) = state.problem(&id)?;
    let body: SelectionBody = parse_body(&body)?;
    let user_id = body.user_id.trim().to_string();
    if user_id.is_empty() {
        return Err(ApiError::unprocessable("user_id is required"));
    }
    let allowed: Vec<&str> = ranking.ids().take(CANDIDATE_COUNT).collect();
    let outside: Vec<&str> = body.api_ids.iter().map(String::as_str).filter(|a| !allowed.contains(a)).collect();
    if !outside.is_empty() {
        return Err(ApiError::unprocessable(format!("not among the candidates: {}", outside.join(", "))));
    }
    let mut api_ids: Vec<String> = Vec::new();
    for a in body.api_ids {
        if !api_ids.contains(&a) {
            api_ids.push(a);
        }
    }
    let selection = Selection { problem_id: id, user_id, api_ids };
    let st = Arc::clone(&state);
    let saved = selection.clone();
    tokio::task::spawn_blocking(move || st.selections.record(saved)).await.map_err(ApiError::internal)??;
    Ok(Json(selection))
}

async fn get_selection(State(state): Shared, Path((id, user_id)): Path<(String, String)>) -> ApiResult<Selection> {
    state.problem(&id)?;
    state.selections.get(&id, &user_id).map(Json).ok_or_else(|| {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no selection by `{user_id}` for `{id}`"))
    })
}

#[derive(Debug, Serialize)]
struct VoteView {
    problem_id: String,
    voters: usize,
    threshold: usize,
    /// Voted APIs in rank order.
    api_ids: Vec<String>,
}

fn tally(state: &AppState, id: &str, ranking: &Ranking) -> Result<VoteView, ApiError> {
    let selections = state.selections.for_problem(id);
    if selections.is_empty() {
        return Err(ApiError::new(StatusCode::CONFLICT, "no_selections", format!("no selections yet for `{id}`")));
    }
    let voted = aggregate_votes(&selections, None);
    Ok(VoteView {
        problem_id: id.to_string(),
        voters: selections.len(),
        threshold: majority_threshold(selections.len()),
        api_ids: PromptSetting::human(&voted, ranking).api_ids().to_vec(),
    })
}

async fn vote(State(state): Shared, Path(id): Path<String>) -> ApiResult<VoteView> {
    let (_, ranking) = state.problem(&id)?;
    tally(&state, &id, ranking).map(Json)
}

#[derive(Debug, Default, Deserialize)]
struct GenerateBody {
    n: Option<usize>,
    temperature: Option<f64>,
}

#[derive(Debug, Serialize)]
struct GenerateSummary {
    problem_id: String,
    setting: String,
    api_ids: Vec<String>,
    temperature: f64,
    n: usize,
    c: usize,
    pass_at_1: f64,
    verdicts: BTreeMap<String, usize>,
}

async fn generate_for_problem(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<GenerateSummary> {
    let (_, ranking) = state.problem(&id)?;
    let body: GenerateBody = parse_body(&body)?;
    let n = body.n.unwrap_or(DEFAULT_UI_SAMPLES);
    if n == 0 || n > MAX_UI_SAMPLES {
        return Err(ApiError::unprocessable(format!("n must be between 1 and {MAX_UI_SAMPLES}")));
    }
    let temperature = body.temperature.unwrap_or_else(|| state.cfg.gen.temperatures[0]);
    let votes = tally(&state, &id, ranking)?;
    if state.backend.is_none() {
        return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no_backend", "no completion backend configured"));
    }
    let st = Arc::clone(&state);
    tokio::task::spawn_blocking(move || run_generation(&st, &id, &votes.api_ids, n, temperature))
        .await
        .map_err(ApiError::internal)?
        .map(Json)
}

fn run_generation(state: &AppState, id: &str, voted: &[String], n: usize, temperature: f64) -> Result<GenerateSummary, ApiError> {
    let (problem, ranking) = state.problem(id)?;
    let setting = PromptSetting::human(voted, ranking);
    let prompt = assemble_prompt(id, &problem.context, &setting, &state.retrieval.store, state.cfg.budget_chars)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let cfg = GenerationConfig { n_samples: n, temperatures: vec![temperature], ..state.cfg.gen.clone() };
    let backend = state.backend.as_deref().ok_or_else(|| ApiError::internal("no backend"))?;
    let candidates = generate(&prompt, &cfg, backend).map_err(|e| match e {
        GenError::InvalidConfig(_) => ApiError::unprocessable(e.to_string()),
        GenError::BackendUnavailable { .. } => ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "backend_unavailable", e.to_string()),
        _ => ApiError::new(StatusCode::BAD_GATEWAY, "backend_error", e.to_string()),
    })?;
    let results = run_problem(problem, &candidates, state.runner.as_ref(), &state.cfg.run).map_err(ApiError::internal)?;
    let result = results.first().ok_or_else(|| ApiError::internal("no results"))?;
    let mut verdicts: BTreeMap<String, usize> =
        ["pass", "fail", "timeout", "crash"].iter().map(|k| (k.to_string(), 0)).collect();
    for v in &result.verdicts {
        let key = match v {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Timeout => "timeout",
            Verdict::Crash => "crash",
        };
        *verdicts.entry(key.to_string()).or_default() += 1;
    }
    Ok(GenerateSummary {
        problem_id: id.to_string(),
        setting: setting.name(),
        api_ids: prompt.included_api_ids,
        temperature,
        n: result.n,
        c: result.c,
        pass_at_1: pass_at_k(result.n, result.c, 1).map_err(ApiError::internal)?,
        verdicts,
    })
}
