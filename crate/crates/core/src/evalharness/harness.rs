use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::passk::pass_at_k;
use super::runner::{RunRequest, SandboxRunner, Verdict};
use super::EvalError;
use crate::genclient::Candidate;

/// One benchmark problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub problem_id: String,
    pub benchmark: String,
    /// Prompt context: description comment plus code scaffold.
    pub context: String,
    /// Reference completion of the context.
    pub canonical_solution: String,
    #[serde(rename = "test")]
    pub test_code: String,
    #[serde(default)]
    pub golden_api_ids: Vec<String>,
    pub num_apis: usize,
}

impl Problem {
    /// The program run for a completion: context, completion, then tests.
    pub fn program_for(&self, completion: &str) -> String {
        format!("{}{}\n\n{}\n", self.context, completion, self.test_code)
    }

    fn validate(&self) -> Result<(), String> {
        if self.problem_id.is_empty() {
            return Err("empty problem_id".into());
        }
        if self.context.is_empty() || self.test_code.is_empty() {
            return Err("context and test must be non-empty".into());
        }
        if self.num_apis == 0 {
            return Err("num_apis must be at least 1".into());
        }
        if !self.golden_api_ids.is_empty() && self.golden_api_ids.len() != self.num_apis {
            return Err("num_apis disagrees with golden_api_ids".into());
        }
        Ok(())
    }
}

/// Read a JSON Lines benchmark file.
pub fn read_benchmark<R: BufRead>(source: R) -> Result<Vec<Problem>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| EvalError::MalformedProblem { line_no: i + 1, reason };
        let p: Problem = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        p.validate().map_err(bad)?;
        out.push(p);
    }
    Ok(out)
}

/// Outcome of all samples of one problem at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub problem_id: String,
    pub temperature: f64,
    pub n: usize,
    pub c: usize,
    pub verdicts: Vec<Verdict>,
}

impl ProblemResult {
    fn from_verdicts(problem_id: &str, temperature: f64, verdicts: Vec<Verdict>) -> Self {
        let c = verdicts.iter().filter(|v| **v == Verdict::Pass).count();
        Self { problem_id: problem_id.to_string(), temperature, n: verdicts.len(), c, verdicts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub timeout_secs: f64,
    pub memory_limit_mb: u64,
    /// Concurrent sandbox invocations.
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { timeout_secs: 10.0, memory_limit_mb: 2048, workers: 4 }
    }
}

/// Run every candidate in its own sandbox invocation and count passes per
/// temperature. Results come back ordered by temperature.
pub fn run_problem(
    problem: &Problem,
    candidates: &[Candidate],
    runner: &dyn SandboxRunner,
    opts: &RunOptions,
) -> Result<Vec<ProblemResult>, EvalError> {
    if let Some(c) = candidates.iter().find(|c| c.problem_id != problem.problem_id) {
        return Err(EvalError::MixedProblems { expected: problem.problem_id.clone(), found: c.problem_id.clone() });
    }
    let slots: Vec<Mutex<Option<Result<Verdict, EvalError>>>> =
        candidates.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = opts.workers.clamp(1, candidates.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= candidates.len() {
                    break;
                }
                let request = RunRequest {
                    program_text: problem.program_for(&candidates[i].code),
                    timeout_secs: opts.timeout_secs,
                    memory_limit_mb: opts.memory_limit_mb,
                };
                let verdict = runner.run(&request).map(|v| v.status);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(verdict);
            });
        }
    });

    let mut by_temp: BTreeMap<OrderedFloat<f64>, Vec<(usize, Verdict)>> = BTreeMap::new();
    for (cand, slot) in candidates.iter().zip(slots) {
        let verdict = slot
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .unwrap_or_else(|| Err(EvalError::RunnerUnavailable("worker did not finish".into())))?;
        by_temp.entry(OrderedFloat(cand.temperature)).or_default().push((cand.sample_index, verdict));
    }
    Ok(by_temp
        .into_iter()
        .map(|(t, mut v)| {
            v.sort_by_key(|(i, _)| *i);
            ProblemResult::from_verdicts(&problem.problem_id, t.0, v.into_iter().map(|(_, v)| v).collect())
        })
        .collect())
}

/// Mean pass@k over problems at every temperature present in `results`.
pub fn pass_at_k_by_temperature(results: &[ProblemResult], k: usize) -> Result<BTreeMap<OrderedFloat<f64>, f64>, EvalError> {
    let mut groups: BTreeMap<OrderedFloat<f64>, Vec<f64>> = BTreeMap::new();
    for r in results {
        groups.entry(OrderedFloat(r.temperature)).or_default().push(pass_at_k(r.n, r.c, k)?);
    }
    Ok(groups
        .into_iter()
        .map(|(t, v)| (t, v.iter().sum::<f64>() / v.len() as f64))
        .collect())
}

/// Benchmark pass@k at its best temperature, with that temperature.
pub fn best_temperature(results: &[ProblemResult], k: usize) -> Result<(f64, f64), EvalError> {
    pass_at_k_by_temperature(results, k)?
        .into_iter()
        // first maximum wins, so ties go to the lowest temperature
        .fold(None, |best: Option<(f64, f64)>, (t, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((t.0, v)),
        })
        .ok_or(EvalError::EmptyResults)
}

/// Benchmark pass@k maximized over temperatures.
pub fn best_over_temperatures(results: &[ProblemResult], k: usize) -> Result<f64, EvalError> {
    best_temperature(results, k).map(|(_, v)| v)
}

/// Difficulty bucket of a problem by its number of APIs.
pub fn difficulty_bucket(num_apis: usize) -> &'static str {
    match num_apis {
        0 | 1 => "1 API",
        2 => "2 APIs",
        _ => ">=3 APIs",
    }
}

/// Solved fraction per difficulty bucket. A problem is solved when any
/// sample at any temperature passed. Empty buckets are left out.
pub fn difficulty_breakdown(results: &[ProblemResult], problems: &[Problem]) -> Result<BTreeMap<String, f64>, EvalError> {
    let index: HashMap<&str, &Problem> = problems.iter().map(|p| (p.problem_id.as_str(), p)).collect();
    let mut solved: HashMap<&str, bool> = HashMap::new();
    for r in results {
        if !index.contains_key(r.problem_id.as_str()) {
            return Err(EvalError::JoinFailure(r.problem_id.clone()));
        }
        *solved.entry(r.problem_id.as_str()).or_default() |= r.c > 0;
    }
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for p in problems {
        let entry = tally.entry(difficulty_bucket(p.num_apis).to_string()).or_default();
        entry.1 += 1;
        if solved.get(p.problem_id.as_str()).copied().unwrap_or(false) {
            entry.0 += 1;
        }
    }
    Ok(tally
        .into_iter()
        .map(|(bucket, (s, total))| (bucket, s as f64 / total as f64))
        .collect())
}

/// Per-problem line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub problem_id: String,
    pub num_apis: usize,
    pub solved: bool,
    /// Best pass@k of this problem over temperatures, per k.
    pub best_pass_at: BTreeMap<usize, f64>,
    pub results: Vec<ProblemResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub benchmark: String,
    pub setting: String,
    /// Benchmark pass@k at the best temperature, per k.
    pub pass_at: BTreeMap<usize, f64>,
    pub best_temperature: BTreeMap<usize, f64>,
    pub difficulty_buckets: BTreeMap<String, f64>,
    pub per_problem: Vec<ProblemSummary>,
}

/// Aggregate results into a report. k values larger than the smallest
/// sample count are skipped.
pub fn build_report(
    benchmark: &str,
    setting: &str,
    problems: &[Problem],
    results: &[ProblemResult],
    k_list: &[usize],
) -> Result<EvalReport, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let min_n = results.iter().map(|r| r.n).min().unwrap_or(0);
    let ks: Vec<usize> = k_list.iter().copied().filter(|k| *k >= 1 && *k <= min_n).collect();
    let mut pass_at = BTreeMap::new();
    let mut best_t = BTreeMap::new();
    for &k in &ks {
        let (t, v) = best_temperature(results, k)?;
        pass_at.insert(k, v);
        best_t.insert(k, t);
    }
    let difficulty_buckets = difficulty_breakdown(results, problems)?;
    let mut per_problem = Vec::with_capacity(problems.len());
    for p in problems {
        let mine: Vec<ProblemResult> = results.iter().filter(|r| r.problem_id == p.problem_id).cloned().collect();
        let mut best = BTreeMap::new();
        for &k in &ks {
            if !mine.is_empty() {
                best.insert(k, best_over_temperatures(&mine, k)?);
            }
        }
        per_problem.push(ProblemSummary {
            problem_id: p.problem_id.clone(),
            num_apis: p.num_apis,
            solved: mine.iter().any(|r| r.c > 0),
            best_pass_at: best,
            results: mine,
        });
    }
    Ok(EvalReport {
        benchmark: benchmark.to_string(),
        setting: setting.to_string(),
        pass_at,
        best_temperature: best_t,
        difficulty_buckets,
        per_problem,
    })
}

/// Plain-text results table: one row per report, pass@k in percent.
pub fn render_table(reports: &[EvalReport], k_list: &[usize]) -> String {
    let mut out = format!("{:<16} {:<10}", "Benchmark", "Setting");
    for k in k_list {
        out.push_str(&format!(" {:>9}", format!("pass@{k}")));
    }
    out.push('\n');
    for r in reports {
        out.push_str(&format!("{:<16} {:<10}", r.benchmark, r.setting));
        for k in k_list {
            let cell = r.pass_at.get(k).map(|v| format!("{:.2}", v * 100.0)).unwrap_or_else(|| "-".into());
            out.push_str(&format!(" {cell:>9}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalharness::StubRunner;

    fn result(id: &str, t: f64, n: usize, c: usize) -> ProblemResult {
        let verdicts = (0..n).map(|i| if i < c { Verdict::Pass } else { Verdict::Fail }).collect();
        ProblemResult::from_verdicts(id, t, verdicts)
    }

    fn problem(id: &str, num_apis: usize) -> Problem {
        Problem {
            problem_id: id.into(),
            benchmark: "b".into(),
            context: "def f():\n".into(),
            canonical_solution: "    return 1".into(),
            test_code: "assert f() == 1".into(),
            golden_api_ids: vec![],
            num_apis,
        }
    }

    fn cand(id: &str, t: f64, i: usize, code: &str) -> Candidate {
        Candidate { problem_id: id.into(), temperature: t, sample_index: i, code: code.into() }
    }

    #[test]
    fn best_over_temperatures_cases() {
        let one = [result("a", 0.2, 10, 3), result("b", 0.2, 10, 1)];
        assert!((best_over_temperatures(&one, 1).unwrap() - 0.2).abs() < 1e-12);
        let two = [result("a", 0.1, 10, 1), result("a", 0.8, 50, 6)];
        assert!((best_over_temperatures(&two, 1).unwrap() - 0.12).abs() < 1e-12);
        let zero = [result("a", 0.1, 4, 0), result("a", 0.5, 4, 0)];
        assert_eq!(best_over_temperatures(&zero, 1).unwrap(), 0.0);
        assert!(matches!(best_over_temperatures(&[], 1), Err(EvalError::EmptyResults)));
    }

    #[test]
    fn breakdown_cases() {
        let problems = [problem("a", 1), problem("b", 2), problem("c", 2), problem("d", 5)];
        let results = [result("a", 0.1, 4, 1), result("b", 0.1, 4, 0), result("b", 0.5, 4, 2), result("c", 0.1, 4, 0), result("d", 0.1, 4, 0)];
        let b = difficulty_breakdown(&results, &problems).unwrap();
        assert_eq!(b["1 API"], 1.0);
        assert_eq!(b["2 APIs"], 0.5);
        assert_eq!(b[">=3 APIs"], 0.0);

        let b = difficulty_breakdown(&[result("a", 0.1, 1, 1), result("b", 0.1, 1, 0)], &[problem("a", 2), problem("b", 2)]).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b["2 APIs"], 0.5);
    }

    #[test]
    fn orphan_result() {
        let err = difficulty_breakdown(&[result("zz", 0.1, 1, 1)], &[problem("a", 1)]).unwrap_err();
        assert!(matches!(err, EvalError::JoinFailure(id) if id == "zz"));
    }

    #[test]
    fn run_problem_groups_by_temperature() {
        let p = problem("a", 1);
        let runner = StubRunner::new([p.program_for("    return 1")]);
        let cands = vec![
            cand("a", 0.2, 1, "    return 2"),
            cand("a", 0.1, 0, "    return 1"),
            cand("a", 0.2, 0, "    return 1"),
            cand("a", 0.1, 1, "    return 1"),
        ];
        let r = run_problem(&p, &cands, &runner, &RunOptions::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].temperature, r[0].n, r[0].c), (0.1, 2, 2));
        assert_eq!((r[1].temperature, r[1].c), (0.2, 1));
        assert_eq!(r[1].verdicts, vec![Verdict::Pass, Verdict::Fail]);
    }

    #[test]
    fn run_problem_rejects_foreign_candidates() {
        let err = run_problem(&problem("a", 1), &[cand("b", 0.1, 0, "")], &StubRunner::default(), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, EvalError::MixedProblems { .. }));
    }

    #[test]
    fn benchmark_parsing() {
        let line = r#"{"problem_id":"p","benchmark":"b","context":"x","canonical_solution":"y","test":"assert 1","golden_api_ids":["a"],"num_apis":1}"#;
        let ps = read_benchmark(line.as_bytes()).unwrap();
        assert_eq!(ps[0].test_code, "assert 1");
        let bad = line.replace("\"num_apis\":1", "\"num_apis\":2");
        assert!(matches!(read_benchmark(bad.as_bytes()), Err(EvalError::MalformedProblem { line_no: 1, .. })));
    }

    #[test]
    fn table_layout() {
        let problems = [problem("a", 1)];
        let report = build_report("micro", "Perfect", &problems, &[result("a", 0.1, 4, 2)], &[1, 10, 100]).unwrap();
        assert_eq!(report.pass_at.keys().copied().collect::<Vec<_>>(), vec![1]);
        let t = render_table(&[report], &[1, 10, 100]);
        assert_eq!(
            t,
            "Benchmark        Setting       pass@1   pass@10  pass@100\nmicro            Perfect        50.00         -         -\n"
        );
    }
}
