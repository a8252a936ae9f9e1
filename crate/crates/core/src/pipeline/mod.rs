//! File-based stages. Each video lives in its own directory with
//! conventionally named inputs; every stage reads earlier outputs from the
//! same directory and writes its own atomically.

mod stages;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Platform;
use crate::dataset::{to_canonical_json, to_canonical_line};
use crate::geometry::BBox;

pub use stages::{
    assemble_dataset, evaluate_dirs, filter_corpus, load_episode, run_actions, run_elements, run_scenes, run_track,
    stats_for, EvalSummary,
};

/// Conventional file names inside a video directory.
pub mod files {
    pub const META: &str = "meta.json";
    pub const FRAMES: &str = "frames.jsonl";
    pub const SCREEN_DETECTIONS: &str = "screen_detections.jsonl";
    pub const OCR: &str = "ocr.jsonl";
    pub const ICONS: &str = "icons.jsonl";
    pub const TRANSCRIPT: &str = "transcript.jsonl";
    pub const GROUND_TRUTH: &str = "ground_truth.json";
    pub const TRACK: &str = "track.json";
    pub const TRANSITIONS: &str = "transitions.json";
    pub const SCENES: &str = "scenes.json";
    pub const LAYOUTS: &str = "layouts.json";
    pub const CROPS: &str = "crops";
    pub const SOM: &str = "som";
    pub const ZOOM: &str = "zoom";
    pub const EPISODE: &str = "episode.json";
    pub const QUARANTINE: &str = "quarantine";
    pub const EVAL: &str = "eval.json";
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input {0}")]
    MissingInput(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}{}: {msg}", .line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Parse { path: PathBuf, line: Option<usize>, msg: String },
    #[error("{video}: {stage}: {msg}")]
    Stage { video: String, stage: &'static str, msg: String },
}

impl PipelineError {
    /// Missing inputs are usage errors; everything else is a data error.
    pub fn is_usage(&self) -> bool {
        matches!(self, PipelineError::MissingInput(_))
    }

    pub(crate) fn stage(video: &str, stage: &'static str, msg: impl ToString) -> Self {
        PipelineError::Stage { video: video.to_string(), stage, msg: msg.to_string() }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// Per-video description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub task_name: String,
    pub platform: Platform,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

/// One line of the screen-detection file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDetectionLine {
    pub frame_index: u64,
    pub bbox: BBox,
    pub confidence: f64,
}

pub(crate) fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingInput(path.to_path_buf()))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    require(path)?;
    let bytes = std::fs::read(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_slice(&bytes).map_err(|e| PipelineError::Parse { path: path.to_path_buf(), line: Some(e.line()), msg: e.to_string() })
}

/// Reads JSON Lines, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    require(path)?;
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| PipelineError::Parse { path: path.to_path_buf(), line: Some(n + 1), msg: e.to_string() })
        })
        .collect()
}

/// Like [`read_jsonl`] but an absent file reads as empty.
pub fn read_jsonl_optional<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if path.exists() {
        read_jsonl(path)
    } else {
        Ok(Vec::new())
    }
}

/// Writes through a temporary sibling and renames it into place, so readers
/// never see a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_canonical_json(value).map_err(|e| PipelineError::Parse { path: path.to_path_buf(), line: None, msg: e.to_string() })?;
    write_atomic(path, text.as_bytes())
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&to_canonical_line(r).map_err(|e| PipelineError::Parse { path: path.to_path_buf(), line: None, msg: e.to_string() })?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Saves a PNG atomically.
pub fn write_png(path: &Path, img: &image::RgbImage) -> Result<()> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| PipelineError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) })?;
    write_atomic(path, buf.get_ref())
}
