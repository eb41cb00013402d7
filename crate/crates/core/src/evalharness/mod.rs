//! Execution-based evaluation: sandboxed runs, exact pass@k, best-over-
//! temperature aggregation and difficulty breakdowns.

mod harness;
mod passk;
mod runner;

use thiserror::Error;

pub use harness::{
    best_over_temperatures, best_temperature, build_report, difficulty_breakdown, difficulty_bucket,
    pass_at_k_by_temperature, read_benchmark, render_table, run_problem, EvalReport, Problem,
    ProblemResult, ProblemSummary, RunOptions,
};
pub use passk::{pass_at_k, EXACT_LIMIT};
pub use runner::{
    LocalPythonRunner, ProtocolRunner, RunRequest, RunVerdict, SandboxRunner, StubRunner, Verdict,
    MESSAGE_LIMIT,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid pass@k arguments n={n} c={c} k={k}")]
    InvalidArgs { n: usize, c: usize, k: usize },
    #[error("sandbox runner unavailable: {0}")]
    RunnerUnavailable(String),
    #[error("no results to aggregate")]
    EmptyResults,
    #[error("result for unknown problem `{0}`")]
    JoinFailure(String),
    #[error("candidate for `{found}` passed to problem `{expected}`")]
    MixedProblems { expected: String, found: String },
    #[error("malformed problem on line {line_no}: {reason}")]
    MalformedProblem { line_no: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
