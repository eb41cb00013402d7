//! HTTP embedder and completion backend against a scripted local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use privapi_core::apiretriever::{Embedder, HttpEmbedder, RetrieverError};
use privapi_core::genclient::{generate, GenError, GenerationConfig, HttpBackend};
use privapi_core::promptkit::{Prompt, PromptSetting};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves one canned `(status, body)` per connection, in order, and records
/// each request.
struct MockServer {
    url: String,
    seen: Arc<Mutex<Vec<Seen>>>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    fn start(responses: Vec<(u16, String)>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        let handle = std::thread::spawn(move || {
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let path = request_line.split_whitespace().nth(1).unwrap_or_default().to_string();
                let mut length = 0;
                let mut authorization = None;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    let (name, value) = line.split_once(':').unwrap();
                    match name.to_ascii_lowercase().as_str() {
                        "content-length" => length = value.trim().parse().unwrap(),
                        "authorization" => authorization = Some(value.trim().to_string()),
                        _ => {}
                    }
                }
                let mut raw = vec![0; length];
                reader.read_exact(&mut raw).unwrap();
                let request_body = serde_json::from_slice(&raw).unwrap_or(Value::Null);
                log.lock().unwrap().push(Seen { path, authorization, body: request_body });
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        Self { url, seen, handle: Some(handle) }
    }

    fn finish(mut self) -> Vec<Seen> {
        self.handle.take().unwrap().join().unwrap();
        self.seen.lock().unwrap().clone()
    }
}

fn embedder(url: &str, dim: usize) -> HttpEmbedder {
    HttpEmbedder::new(url, dim, Duration::from_secs(5)).unwrap()
}

#[test]
fn embedder_round_trip() {
    let server = MockServer::start(vec![(200, json!({"vectors": [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]], "dimension": 3}).to_string())]);
    let vectors = embedder(&format!("{}/", server.url), 3).embed_batch(&["a", "b c"]).unwrap();
    assert_eq!(vectors, vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8]]);
    let seen = server.finish();
    assert_eq!(seen[0].path, "/embed");
    assert_eq!(seen[0].body, json!({"texts": ["a", "b c"]}));
}

#[test]
fn embedder_rejects_wrong_dimension() {
    let server = MockServer::start(vec![
        (200, json!({"vectors": [[1.0, 0.0]], "dimension": 2}).to_string()),
        (200, json!({"vectors": [[1.0, 0.0]], "dimension": 3}).to_string()),
    ]);
    let e = embedder(&server.url, 3);
    assert!(matches!(e.embed("x"), Err(RetrieverError::DimensionMismatch { expected: 3, got: 2 })));
    assert!(matches!(e.embed("x"), Err(RetrieverError::DimensionMismatch { expected: 3, got: 2 })));
    server.finish();
}

#[test]
fn embedder_rejects_wrong_count_and_bad_status() {
    let server = MockServer::start(vec![
        (200, json!({"vectors": [], "dimension": 2}).to_string()),
        (500, "{}".into()),
        (200, "not json".into()),
    ]);
    let e = embedder(&server.url, 2);
    assert!(matches!(e.embed("x"), Err(RetrieverError::Malformed(_))));
    assert!(matches!(e.embed("x"), Err(RetrieverError::Provider(_))));
    assert!(matches!(e.embed("x"), Err(RetrieverError::Malformed(_))));
    server.finish();
}

fn prompt() -> Prompt {
    Prompt {
        problem_id: "P/0".into(),
        setting: PromptSetting::NoApi,
        included_api_ids: vec![],
        text: "def f():\n".into(),
    }
}

fn config(n: usize) -> GenerationConfig {
    GenerationConfig { n_samples: n, temperatures: vec![0.5], retry_base_delay_ms: 1, ..Default::default() }
}

fn completions(items: &[&str]) -> (u16, String) {
    (200, json!({ "completions": items }).to_string())
}

#[test]
fn backend_retries_transient_failures_and_resumes_short_batches() {
    let server = MockServer::start(vec![
        (503, "{}".into()),
        (429, "{}".into()),
        completions(&["    return 1"]),
        completions(&["    return 2", "    return 3", "    return 4"]),
    ]);
    let backend = HttpBackend::new(&server.url, Some("secret".into()), Duration::from_secs(5)).unwrap();
    let out = generate(&prompt(), &config(3), &backend).unwrap();
    let codes: Vec<&str> = out.iter().map(|c| c.code.as_str()).collect();
    assert_eq!(codes, ["    return 1", "    return 2", "    return 3"]);
    assert_eq!(out.iter().map(|c| c.sample_index).collect::<Vec<_>>(), [0, 1, 2]);

    let seen = server.finish();
    assert_eq!(seen.len(), 4);
    assert!(seen.iter().all(|s| s.path == "/complete"));
    assert!(seen.iter().all(|s| s.authorization.as_deref() == Some("Bearer secret")));
    assert_eq!(seen[0].body["n"], 3);
    assert_eq!(seen[0].body["temperature"], 0.5);
    assert_eq!(seen[0].body["prompt"], "def f():\n");
    assert_eq!(seen[3].body["n"], 2);
}

#[test]
fn backend_gives_up_after_max_attempts() {
    let server = MockServer::start(vec![(503, "{}".into()); 5]);
    let backend = HttpBackend::new(&server.url, None, Duration::from_secs(5)).unwrap();
    let err = generate(&prompt(), &config(1), &backend).unwrap_err();
    assert!(matches!(err, GenError::BackendUnavailable { attempts: 5, .. }), "{err:?}");
    let seen = server.finish();
    assert!(seen.iter().all(|s| s.authorization.is_none()));
}

#[test]
fn backend_does_not_retry_rejections_or_garbage() {
    let server = MockServer::start(vec![(400, "{}".into())]);
    let backend = HttpBackend::new(&server.url, None, Duration::from_secs(5)).unwrap();
    assert!(matches!(generate(&prompt(), &config(1), &backend), Err(GenError::BackendRejected(_))));
    assert_eq!(server.finish().len(), 1);

    let server = MockServer::start(vec![(200, json!({"text": "x"}).to_string())]);
    let backend = HttpBackend::new(&server.url, None, Duration::from_secs(5)).unwrap();
    assert!(matches!(generate(&prompt(), &config(1), &backend), Err(GenError::BackendMalformedResponse(_))));
    assert_eq!(server.finish().len(), 1);
}

#[test]
fn backend_unreachable_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let backend = HttpBackend::new(format!("http://127.0.0.1:{port}"), None, Duration::from_secs(2)).unwrap();
    let err = generate(&prompt(), &config(1), &backend).unwrap_err();
    assert!(matches!(err, GenError::BackendUnavailable { attempts: 5, .. }), "{err:?}");
}
