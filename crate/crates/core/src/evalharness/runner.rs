//! Executing one candidate program and classifying the outcome.
//!
//! [`ProtocolRunner`] drives an external runner process over the
//! stdin/stdout JSON protocol; [`LocalPythonRunner`] runs the interpreter
//! directly with process-level limits; [`StubRunner`] decides verdicts in
//! process for environments without an interpreter.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Longest message kept in a verdict.
pub const MESSAGE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub program_text: String,
    pub timeout_secs: f64,
    pub memory_limit_mb: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Timeout,
    Crash,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub status: Verdict,
    pub duration_secs: f64,
    #[serde(default)]
    pub message: String,
}

impl RunVerdict {
    fn new(status: Verdict, duration: Duration, message: impl Into<String>) -> Self {
        Self { status, duration_secs: duration.as_secs_f64(), message: truncate(message.into()) }
    }
}

fn truncate(mut s: String) -> String {
    if let Some((idx, _)) = s.char_indices().nth(MESSAGE_LIMIT) {
        s.truncate(idx);
    }
    s
}

/// Executes one program. Candidate misbehavior is always a verdict; an
/// error means the runner itself could not be used.
pub trait SandboxRunner: Send + Sync {
    fn run(&self, request: &RunRequest) -> Result<RunVerdict, EvalError>;
}

/// Output of a finished or killed child process.
struct Finished {
    status: Option<ExitStatus>,
    timed_out: bool,
    stdout: String,
    stderr: String,
    elapsed: Duration,
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    // the child leads its own process group
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}

fn wait_with_deadline(mut child: Child, stdin: Option<Vec<u8>>, deadline: Duration) -> std::io::Result<Finished> {
    let start = Instant::now();
    let writer = stdin.map(|bytes| {
        let pipe = child.stdin.take();
        std::thread::spawn(move || {
            if let Some(mut p) = pipe {
                let _ = p.write_all(&bytes);
            }
        })
    });
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= deadline {
            kill_tree(&mut child);
            let _ = child.wait();
            timed_out = true;
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let elapsed = start.elapsed();
    if let Some(w) = writer {
        let _ = w.join();
    }
    Ok(Finished {
        status,
        timed_out,
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        elapsed,
    })
}

#[cfg(unix)]
fn isolate(cmd: &mut Command, cpu_secs: u64, memory_limit_mb: u64) {
    use std::os::unix::process::CommandExt;
    cmd.process_group(0);
    let mem_bytes = memory_limit_mb.saturating_mul(1024 * 1024) as libc::rlim_t;
    let cpu = cpu_secs as libc::rlim_t;
    // only async-signal-safe calls between fork and exec
    unsafe {
        cmd.pre_exec(move || {
            if mem_bytes > 0 {
                let lim = libc::rlimit { rlim_cur: mem_bytes, rlim_max: mem_bytes };
                libc::setrlimit(libc::RLIMIT_AS, &lim);
            }
            let lim = libc::rlimit { rlim_cur: cpu, rlim_max: cpu + 1 };
            libc::setrlimit(libc::RLIMIT_CPU, &lim);
            Ok(())
        });
    }
}

#[cfg(not(unix))]
fn isolate(_cmd: &mut Command, _cpu_secs: u64, _memory_limit_mb: u64) {}

/// Last line of a Python traceback names the exception type.
fn exception_line(stderr: &str) -> Option<&str> {
    stderr.lines().rev().map(str::trim).find(|l| !l.is_empty())
}

#[cfg(unix)]
fn killed_by_cpu_limit(status: &ExitStatus) -> bool {
    use std::os::unix::process::ExitStatusExt;
    matches!(status.signal(), Some(s) if s == libc::SIGXCPU || s == libc::SIGKILL)
}

#[cfg(not(unix))]
fn killed_by_cpu_limit(_status: &ExitStatus) -> bool {
    false
}

/// Runs programs with a local Python interpreter, one fresh process per
/// program, in a scratch directory.
#[derive(Debug, Clone)]
pub struct LocalPythonRunner {
    pub interpreter: PathBuf,
    /// Prepended to `PYTHONPATH`, e.g. for private-library alias shims.
    pub python_path: Vec<PathBuf>,
}

impl Default for LocalPythonRunner {
    fn default() -> Self {
        Self { interpreter: PathBuf::from("python3"), python_path: Vec::new() }
    }
}

impl LocalPythonRunner {
    /// Whether the interpreter can be started at all.
    pub fn available(&self) -> bool {
        Command::new(&self.interpreter)
            .arg("-c")
            .arg("pass")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok_and(|s| s.success())
    }
}

impl SandboxRunner for LocalPythonRunner {
    fn run(&self, request: &RunRequest) -> Result<RunVerdict, EvalError> {
        let dir = tempfile::tempdir().map_err(|e| EvalError::RunnerUnavailable(e.to_string()))?;
        let script = dir.path().join("candidate.py");
        std::fs::write(&script, &request.program_text)
            .map_err(|e| EvalError::RunnerUnavailable(e.to_string()))?;

        let mut cmd = Command::new(&self.interpreter);
        cmd.arg("-B")
            .arg(&script)
            .current_dir(dir.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .env("PYTHONHASHSEED", "0")
            .env("OPENBLAS_NUM_THREADS", "1")
            .env("OMP_NUM_THREADS", "1");
        if !self.python_path.is_empty() {
            let joined = std::env::join_paths(&self.python_path)
                .map_err(|e| EvalError::RunnerUnavailable(e.to_string()))?;
            cmd.env("PYTHONPATH", joined);
        }
        let cpu_secs = request.timeout_secs.ceil().max(1.0) as u64 + 1;
        isolate(&mut cmd, cpu_secs, request.memory_limit_mb);
        let child = cmd
            .spawn()
            .map_err(|e| EvalError::RunnerUnavailable(format!("{}: {e}", self.interpreter.display())))?;
        let done = wait_with_deadline(child, None, Duration::from_secs_f64(request.timeout_secs))
            .map_err(|e| EvalError::RunnerUnavailable(e.to_string()))?;

        let verdict = match done.status {
            None => RunVerdict::new(Verdict::Timeout, done.elapsed, "wall-clock limit exceeded"),
            Some(s) if s.success() => RunVerdict::new(Verdict::Pass, done.elapsed, done.stdout),
            Some(s) if killed_by_cpu_limit(&s) => {
                RunVerdict::new(Verdict::Timeout, done.elapsed, "cpu limit exceeded")
            }
            Some(_) => {
                let last = exception_line(&done.stderr).unwrap_or("").to_string();
                let status = if last.starts_with("AssertionError") { Verdict::Fail } else { Verdict::Crash };
                RunVerdict::new(status, done.elapsed, done.stderr)
            }
        };
        Ok(verdict)
    }
}

/// Talks to an external runner: one request JSON object on stdin, one
/// verdict JSON object on stdout. Protocol failures become crash verdicts.
#[derive(Debug, Clone)]
pub struct ProtocolRunner {
    program: String,
    args: Vec<String>,
    /// Extra wall-clock allowance beyond the request timeout.
    pub grace: Duration,
}

impl ProtocolRunner {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self { program: program.into(), args, grace: Duration::from_secs(5) }
    }

    /// Split a shell-like command line on whitespace.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace().map(String::from);
        let program = parts.next()?;
        Some(Self::new(program, parts.collect()))
    }
}

impl SandboxRunner for ProtocolRunner {
    fn run(&self, request: &RunRequest) -> Result<RunVerdict, EvalError> {
        let payload = serde_json::to_vec(request).map_err(|e| EvalError::RunnerUnavailable(e.to_string()))?;
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        let child = cmd
            .spawn()
            .map_err(|e| EvalError::RunnerUnavailable(format!("{}: {e}", self.program)))?;
        let deadline = Duration::from_secs_f64(request.timeout_secs) + self.grace;
        let done = wait_with_deadline(child, Some(payload), deadline)
            .map_err(|e| EvalError::RunnerUnavailable(e.to_string()))?;
        if done.timed_out {
            return Ok(RunVerdict::new(Verdict::Timeout, done.elapsed, "runner exceeded its wall-clock allowance"));
        }
        let exit_ok = done.status.is_some_and(|s| s.success());
        match serde_json::from_str::<RunVerdict>(done.stdout.trim()) {
            Ok(v) if exit_ok => Ok(RunVerdict { message: truncate(v.message), ..v }),
            Ok(_) | Err(_) => Ok(RunVerdict::new(
                Verdict::Crash,
                done.elapsed,
                format!("protocol error (exit {:?}): {}{}", done.status.and_then(|s| s.code()), done.stdout, done.stderr),
            )),
        }
    }
}

/// In-process runner: a program passes iff it is one of the known-good
/// program texts.
#[derive(Debug, Clone, Default)]
pub struct StubRunner {
    passing: HashSet<String>,
}

impl StubRunner {
    pub fn new(passing: impl IntoIterator<Item = String>) -> Self {
        Self { passing: passing.into_iter().collect() }
    }
}

impl SandboxRunner for StubRunner {
    fn run(&self, request: &RunRequest) -> Result<RunVerdict, EvalError> {
        let status = if self.passing.contains(&request.program_text) { Verdict::Pass } else { Verdict::Fail };
        Ok(RunVerdict::new(status, Duration::ZERO, "stub"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(program: &str, timeout_secs: f64) -> RunRequest {
        RunRequest { program_text: program.into(), timeout_secs, memory_limit_mb: 1024 }
    }

    fn python() -> Option<LocalPythonRunner> {
        let r = LocalPythonRunner::default();
        r.available().then_some(r)
    }

    #[test]
    fn verdict_wire_format() {
        let v = RunVerdict { status: Verdict::Timeout, duration_secs: 2.0, message: String::new() };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"status":"timeout","duration_secs":2.0,"message":""}"#);
    }

    #[test]
    fn message_truncated() {
        let v = RunVerdict::new(Verdict::Crash, Duration::ZERO, "é".repeat(5000));
        assert_eq!(v.message.chars().count(), MESSAGE_LIMIT);
    }

    #[test]
    fn local_pass_fail_crash() {
        let Some(r) = python() else { return };
        assert_eq!(r.run(&req("assert 1 + 1 == 2\n", 10.0)).unwrap().status, Verdict::Pass);
        assert_eq!(r.run(&req("assert False\n", 10.0)).unwrap().status, Verdict::Fail);
        assert_eq!(r.run(&req("raise Exception()\n", 10.0)).unwrap().status, Verdict::Crash);
        assert_eq!(r.run(&req("def f(:\n", 10.0)).unwrap().status, Verdict::Crash);
    }

    #[test]
    fn local_timeout_is_bounded() {
        let Some(r) = python() else { return };
        let start = Instant::now();
        let v = r.run(&req("while True: pass\n", 2.0)).unwrap();
        assert_eq!(v.status, Verdict::Timeout);
        assert!(start.elapsed() <= Duration::from_secs(3));
    }

    #[test]
    fn local_runs_are_fresh_processes() {
        let Some(r) = python() else { return };
        let first = "import builtins\nbuiltins.LEAK = 1\n";
        let probe = "import builtins\nassert not hasattr(builtins, 'LEAK')\n";
        assert_eq!(r.run(&req(first, 10.0)).unwrap().status, Verdict::Pass);
        assert_eq!(r.run(&req(probe, 10.0)).unwrap().status, Verdict::Pass);
    }

    #[test]
    fn missing_interpreter_is_runner_error() {
        let r = LocalPythonRunner { interpreter: "/nonexistent/python".into(), python_path: vec![] };
        assert!(matches!(r.run(&req("pass", 1.0)), Err(EvalError::RunnerUnavailable(_))));
    }

    #[test]
    fn protocol_runner_round_trip() {
        if python().is_none() {
            return;
        }
        // minimal protocol peer: pass iff the program mentions "ok"
        let peer = "import json,sys\nr=json.load(sys.stdin)\nprint(json.dumps({'status':'pass' if 'ok' in r['program_text'] else 'fail','duration_secs':0.0,'message':''}))";
        let runner = ProtocolRunner::new("python3", vec!["-c".into(), peer.into()]);
        assert_eq!(runner.run(&req("ok", 5.0)).unwrap().status, Verdict::Pass);
        assert_eq!(runner.run(&req("no", 5.0)).unwrap().status, Verdict::Fail);
    }

    #[test]
    fn protocol_garbage_is_crash() {
        if python().is_none() {
            return;
        }
        let runner = ProtocolRunner::new("python3", vec!["-c".into(), "print('nope')".into()]);
        let v = runner.run(&req("x", 5.0)).unwrap();
        assert_eq!(v.status, Verdict::Crash);
        assert!(v.message.contains("protocol error"));
    }

    #[test]
    fn protocol_runner_missing_binary() {
        let runner = ProtocolRunner::new("/nonexistent/runner", vec![]);
        assert!(matches!(runner.run(&req("x", 1.0)), Err(EvalError::RunnerUnavailable(_))));
    }

    #[test]
    fn stub_runner() {
        let r = StubRunner::new(["good".to_string()]);
        assert_eq!(r.run(&req("good", 1.0)).unwrap().status, Verdict::Pass);
        assert_eq!(r.run(&req("bad", 1.0)).unwrap().status, Verdict::Fail);
    }
}
