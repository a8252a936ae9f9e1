//! Model backend protocol: newline-delimited JSON requests and responses.
//!
//! The same wire types are used by the in-process scripted mock and by the
//! external model process, so the pipeline cannot tell them apart.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::BBox;
use crate::transition::OcrToken;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("mock script: {0}")]
    Script(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ocr,
    Detect,
    Hands,
    Vlm,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageRef {
    Path(String),
    Base64(String),
}

impl ImageRef {
    fn key(&self) -> &str {
        match self {
            ImageRef::Path(p) | ImageRef::Base64(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageParams {
    pub image: ImageRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    pub image: ImageRef,
    pub caption: String,
    pub box_threshold: f64,
    pub text_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Part {
    Text { text: String },
    Image { image: ImageRef },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VlmParams {
    pub messages: Vec<Message>,
    pub temperature: f64,
    /// Stable name of the pipeline step issuing the call, e.g. `initial/3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub id: String,
    pub method: Method,
    pub params: Value,
}

impl BackendRequest {
    pub fn vlm(id: impl Into<String>, params: &VlmParams) -> Self {
        Self { id: id.into(), method: Method::Vlm, params: serde_json::to_value(params).expect("serializable") }
    }

    pub fn ocr(id: impl Into<String>, image: ImageRef) -> Self {
        Self { id: id.into(), method: Method::Ocr, params: serde_json::to_value(ImageParams { image }).expect("serializable") }
    }

    pub fn hands(id: impl Into<String>, image: ImageRef) -> Self {
        Self { id: id.into(), method: Method::Hands, params: serde_json::to_value(ImageParams { image }).expect("serializable") }
    }

    pub fn detect(id: impl Into<String>, params: &DetectParams) -> Self {
        Self { id: id.into(), method: Method::Detect, params: serde_json::to_value(params).expect("serializable") }
    }

    /// Checks that `params` has the shape required by `method`.
    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |e: serde_json::Error| BackendError::Protocol(format!("{:?} params: {e}", self.method));
        match self.method {
            Method::Ocr | Method::Hands => serde_json::from_value::<ImageParams>(self.params.clone()).map(|_| ()).map_err(bad),
            Method::Detect => serde_json::from_value::<DetectParams>(self.params.clone()).map(|_| ()).map_err(bad),
            Method::Vlm => serde_json::from_value::<VlmParams>(self.params.clone()).map(|_| ()).map_err(bad),
        }
    }

    fn script_key(&self) -> Option<String> {
        match self.method {
            Method::Vlm => serde_json::from_value::<VlmParams>(self.params.clone()).ok()?.tag,
            Method::Ocr | Method::Hands => Some(serde_json::from_value::<ImageParams>(self.params.clone()).ok()?.image.key().to_string()),
            Method::Detect => Some(serde_json::from_value::<DetectParams>(self.params.clone()).ok()?.image.key().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedBox {
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub id: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Deserialize)]
struct VlmResult {
    text: String,
}

#[derive(Deserialize)]
struct OcrResult {
    tokens: Vec<OcrToken>,
}

#[derive(Deserialize)]
struct DetectResult {
    boxes: Vec<DetectedBox>,
}

#[derive(Deserialize)]
struct HandsResult {
    present: bool,
}

impl BackendResponse {
    pub fn success(id: impl Into<String>, result: Value) -> Self {
        Self { id: id.into(), ok: true, result: Some(result), error: None }
    }

    pub fn failure(id: impl Into<String>, error: impl Into<String>) -> Self {
        Self { id: id.into(), ok: false, result: None, error: Some(error.into()) }
    }

    fn payload<T: serde::de::DeserializeOwned>(&self) -> Result<T, BackendError> {
        if !self.ok {
            return Err(BackendError::Protocol(self.error.clone().unwrap_or_else(|| "request failed".into())));
        }
        let v = self.result.clone().ok_or_else(|| BackendError::Protocol("missing result".into()))?;
        serde_json::from_value(v).map_err(|e| BackendError::Protocol(format!("malformed result: {e}")))
    }

    pub fn text(&self) -> Result<String, BackendError> {
        self.payload::<VlmResult>().map(|r| r.text)
    }

    pub fn tokens(&self) -> Result<Vec<OcrToken>, BackendError> {
        self.payload::<OcrResult>().map(|r| r.tokens)
    }

    pub fn boxes(&self) -> Result<Vec<DetectedBox>, BackendError> {
        self.payload::<DetectResult>().map(|r| r.boxes)
    }

    pub fn hands_present(&self) -> Result<bool, BackendError> {
        self.payload::<HandsResult>().map(|r| r.present)
    }

    /// Checks the response envelope and, given the request method, the result
    /// shape.
    pub fn validate(&self, method: Method) -> Result<(), BackendError> {
        match (self.ok, &self.result, &self.error) {
            (true, Some(_), None) => {}
            (false, None, Some(_)) => return Ok(()),
            _ => return Err(BackendError::Protocol("exactly one of result/error must be present".into())),
        }
        match method {
            Method::Vlm => self.text().map(|_| ()),
            Method::Ocr => self.tokens().map(|_| ()),
            Method::Detect => self.boxes().map(|_| ()),
            Method::Hands => self.hands_present().map(|_| ()),
        }
    }
}

/// Anything that can answer backend requests. Implementations must be safe
/// to share between episode workers.
pub trait Backend: Send + Sync {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError>;
}

/// One scripted answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockEntry {
    #[serde(default = "default_method")]
    pub method: Method,
    /// VLM step tag, or image locator for the perception methods.
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn default_method() -> Method {
    Method::Vlm
}

/// Deterministic backend driven by a script of answers keyed by
/// `(method, tag)`. Repeated requests for one key consume its answers in
/// order; the final answer repeats once the queue is exhausted.
#[derive(Debug, Default)]
pub struct MockBackend {
    script: HashMap<(Method, String), Vec<MockEntry>>,
    cursor: Mutex<HashMap<(Method, String), usize>>,
    log: Mutex<Vec<BackendRequest>>,
}

impl MockBackend {
    pub fn new(entries: Vec<MockEntry>) -> Result<Self, BackendError> {
        let mut script: HashMap<(Method, String), Vec<MockEntry>> = HashMap::new();
        for e in entries {
            let n = [e.reply.is_some(), e.result.is_some(), e.error.is_some()].iter().filter(|b| **b).count();
            if n != 1 {
                return Err(BackendError::Script(format!("entry {:?} needs exactly one of reply/result/error", e.tag)));
            }
            if e.reply.is_some() && e.method != Method::Vlm {
                return Err(BackendError::Script(format!("entry {:?}: `reply` is only valid for vlm", e.tag)));
            }
            script.entry((e.method, e.tag.clone())).or_default().push(e);
        }
        Ok(Self { script, ..Default::default() })
    }

    /// Reads a JSON Lines script; blank lines and `#` comments are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self, BackendError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            entries.push(serde_json::from_str(line).map_err(|e| BackendError::Script(format!("line {}: {e}", n + 1)))?);
        }
        Self::new(entries)
    }

    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::Script(format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&text)
    }

    /// Every request seen so far, in arrival order.
    pub fn requests(&self) -> Vec<BackendRequest> {
        self.log.lock().unwrap().clone()
    }
}

impl Backend for MockBackend {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        self.log.lock().unwrap().push(request.clone());
        if let Err(e) = request.validate() {
            return Ok(BackendResponse::failure(&request.id, e.to_string()));
        }
        let Some(tag) = request.script_key() else {
            return Ok(BackendResponse::failure(&request.id, "request carries no tag"));
        };
        let key = (request.method, tag);
        let Some(entries) = self.script.get(&key) else {
            return Ok(BackendResponse::failure(&request.id, format!("no scripted reply for {:?} {:?}", key.0, key.1)));
        };
        let idx = {
            let mut cursor = self.cursor.lock().unwrap();
            let c = cursor.entry(key).or_insert(0);
            let idx = (*c).min(entries.len() - 1);
            *c += 1;
            idx
        };
        let e = &entries[idx];
        Ok(match (&e.reply, &e.result, &e.error) {
            (Some(text), _, _) => BackendResponse::success(&request.id, serde_json::json!({ "text": text })),
            (_, Some(v), _) => BackendResponse::success(&request.id, v.clone()),
            (_, _, Some(err)) => BackendResponse::failure(&request.id, err.clone()),
            _ => unreachable!("validated in MockBackend::new"),
        })
    }
}

struct Connection {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Connection {
    fn spawn(program: &str, args: &[String]) -> Result<Self, BackendError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| BackendError::Transport(format!("spawning {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self { child, stdin, stdout })
    }

    fn roundtrip(&mut self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        let mut line = serde_json::to_string(request).map_err(|e| BackendError::Protocol(e.to_string()))?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let mut reply = String::new();
        let n = self.stdout.read_line(&mut reply).map_err(|e| BackendError::Transport(e.to_string()))?;
        if n == 0 {
            return Err(BackendError::Transport("sidecar closed its output".into()));
        }
        let resp: BackendResponse =
            serde_json::from_str(reply.trim_end()).map_err(|e| BackendError::Protocol(format!("bad response line: {e}")))?;
        if resp.id != request.id {
            return Err(BackendError::Protocol(format!("response id {:?} does not match request {:?}", resp.id, request.id)));
        }
        Ok(resp)
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Pool of external model processes speaking the line protocol over stdio.
/// Each process handles one request at a time.
pub struct SidecarBackend {
    pool: Vec<Mutex<Connection>>,
    next: AtomicUsize,
}

impl SidecarBackend {
    /// Environment variable holding the sidecar command line.
    pub const ENV: &'static str = "NAVMINE_SIDECAR";

    /// Spawns `size` copies of `command` (whitespace-separated program and
    /// arguments).
    pub fn spawn(command: &str, size: usize) -> Result<Self, BackendError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| BackendError::Transport("empty sidecar command".into()))?;
        let args: Vec<String> = parts.collect();
        let pool = (0..size.max(1))
            .map(|_| Connection::spawn(&program, &args).map(Mutex::new))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { pool, next: AtomicUsize::new(0) })
    }
}

impl Backend for SidecarBackend {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        let start = self.next.fetch_add(1, Ordering::Relaxed);
        for k in 0..self.pool.len() {
            if let Ok(mut conn) = self.pool[(start + k) % self.pool.len()].try_lock() {
                return conn.roundtrip(request);
            }
        }
        let mut conn = self.pool[start % self.pool.len()]
            .lock()
            .map_err(|_| BackendError::Transport("sidecar connection poisoned".into()))?;
        conn.roundtrip(request)
    }
}

/// Answers requests read line by line from `input` until EOF. Malformed lines
/// get an error response with a synthetic id; nothing aborts the loop except
/// an I/O failure on the streams themselves.
pub fn serve<R: BufRead, W: Write>(backend: &dyn Backend, input: R, mut output: W) -> std::io::Result<()> {
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<BackendRequest>(&line) {
            Ok(req) => match backend.call(&req) {
                Ok(r) => r,
                Err(e) => BackendResponse::failure(&req.id, e.to_string()),
            },
            Err(e) => BackendResponse::failure(format!("invalid-{}", n + 1), format!("malformed request: {e}")),
        };
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
