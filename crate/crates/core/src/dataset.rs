//! Canonical episode files, dataset statistics and training-pair export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::action::{Action, ActionKind, Episode, Platform};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("episode {video}: {}", .violations.join("; "))]
    InvariantViolation { video: String, violations: Vec<String> },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Decimal places for every float in canonical output.
pub const FLOAT_DECIMALS: usize = 6;

fn write_number(out: &mut String, n: &serde_json::Number) {
    if n.is_f64() {
        let f = n.as_f64().unwrap_or(0.0);
        let s = format!("{:.*}", FLOAT_DECIMALS, f);
        // Negative zero after rounding prints as "-0.000000".
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            out.push_str(s.trim_start_matches('-'));
        } else {
            out.push_str(&s);
        }
    } else {
        out.push_str(&n.to_string());
    }
}

fn write_value(out: &mut String, v: &Value, indent: Option<usize>, depth: usize) {
    let newline = |out: &mut String, d: usize| {
        if let Some(w) = indent {
            out.push('\n');
            out.extend(std::iter::repeat_n(' ', w * d));
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(out, item, indent, depth + 1);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                let _ = write!(out, "{}:", serde_json::to_string(key).expect("string serializes"));
                if indent.is_some() {
                    out.push(' ');
                }
                write_value(out, &map[*key], indent, depth + 1);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

/// Sorted keys, fixed float precision, two-space indentation, LF line ends
/// and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, DatasetError> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, Some(2), 0);
    out.push('\n');
    Ok(out)
}

/// Single-line canonical form, for JSON Lines output. No trailing newline.
pub fn to_canonical_line<T: Serialize>(value: &T) -> Result<String, DatasetError> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, None, 0);
    Ok(out)
}

pub fn serialize_episode(e: &Episode) -> Result<Vec<u8>, DatasetError> {
    let violations = e.violations();
    if !violations.is_empty() {
        return Err(DatasetError::InvariantViolation { video: e.video_id.clone(), violations });
    }
    Ok(to_canonical_json(e)?.into_bytes())
}

pub fn deserialize_episode(bytes: &[u8]) -> Result<Episode, DatasetError> {
    Ok(serde_json::from_slice(bytes)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindShare {
    pub count: usize,
    /// Percent of all actions, two decimals; shares sum to exactly 100.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub episodes: usize,
    pub actions: usize,
    pub kinds: BTreeMap<String, KindShare>,
    pub platforms: BTreeMap<String, usize>,
    /// Steps per episode -> episode count.
    pub step_histogram: BTreeMap<usize, usize>,
    /// Lower bound of each duration bucket in seconds -> episode count.
    pub duration_histogram: BTreeMap<u64, usize>,
    pub duration_bucket_s: u64,
}

/// Splits 100.00% over `counts` in hundredths using largest remainders, so
/// the parts always add up exactly. Ties go to the earlier entry.
pub fn percentages(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    let quota: Vec<(usize, usize)> = counts.iter().map(|&c| ((c * 10_000) / total, (c * 10_000) % total)).collect();
    let mut units: Vec<usize> = quota.iter().map(|q| q.0).collect();
    let short = 10_000 - units.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| quota[b].1.cmp(&quota[a].1).then(a.cmp(&b)));
    for &i in order.iter().take(short) {
        units[i] += 1;
    }
    units.into_iter().map(|u| u as f64 / 100.0).collect()
}

pub fn dataset_stats(episodes: &[Episode], duration_bucket_s: u64) -> DatasetStats {
    let bucket = duration_bucket_s.max(1);
    let mut counts = [0usize; ActionKind::ALL.len()];
    let mut platforms: BTreeMap<String, usize> = Platform::ALL.iter().map(|p| (p.as_str().to_string(), 0)).collect();
    let mut step_histogram = BTreeMap::new();
    let mut duration_histogram = BTreeMap::new();
    for e in episodes {
        for a in e.actions() {
            let k = ActionKind::ALL.iter().position(|k| *k == a.kind()).expect("closed taxonomy");
            counts[k] += 1;
        }
        *platforms.entry(e.platform.as_str().to_string()).or_default() += 1;
        *step_histogram.entry(e.steps.len()).or_default() += 1;
        let lo = (e.metadata.duration_s.max(0.0) as u64 / bucket) * bucket;
        *duration_histogram.entry(lo).or_default() += 1;
    }
    let pct = percentages(&counts);
    let kinds = ActionKind::ALL
        .iter()
        .zip(counts.iter().zip(pct))
        .map(|(k, (&count, percent))| (k.as_str().to_string(), KindShare { count, percent }))
        .collect();
    DatasetStats {
        episodes: episodes.len(),
        actions: counts.iter().sum(),
        kinds,
        platforms,
        step_histogram,
        duration_histogram,
        duration_bucket_s: bucket,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub video_id: String,
    pub step: usize,
    /// Image locator of the step's screen.
    pub screen: String,
    pub task_name: String,
    /// Up to `history_len` previous actions, oldest first.
    pub history: Vec<Action>,
    pub target: Action,
}

/// One pair per step. Partial episodes yield nothing.
pub fn export_training_pairs(e: &Episode, history_len: usize) -> Vec<TrainingPair> {
    if e.partial {
        return Vec::new();
    }
    let actions: Vec<&Action> = e.steps.iter().filter_map(|s| s.action.as_ref()).collect();
    if actions.len() != e.steps.len() {
        return Vec::new();
    }
    e.steps
        .iter()
        .enumerate()
        .map(|(i, s)| TrainingPair {
            video_id: e.video_id.clone(),
            step: i,
            screen: s.scene.representative.image_uri.clone(),
            task_name: e.task_name.clone(),
            history: actions[i.saturating_sub(history_len)..i].iter().map(|a| (*a).clone()).collect(),
            target: actions[i].clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub split: Split,
    pub episodes: Vec<String>,
    pub counts: BTreeMap<String, usize>,
}

impl DatasetManifest {
    /// Builds a manifest from `(locator, platform)` entries, sorted by
    /// locator.
    pub fn new(split: Split, entries: &[(String, Platform)]) -> Self {
        let mut sorted: Vec<&(String, Platform)> = entries.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for (_, p) in &sorted {
            *counts.entry(p.as_str().to_string()).or_default() += 1;
        }
        Self { split, episodes: sorted.iter().map(|e| e.0.clone()).collect(), counts }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let tally: usize = self.counts.values().sum();
        if tally != self.episodes.len() {
            return Err(DatasetError::Manifest(format!("counts sum to {tally}, {} episodes listed", self.episodes.len())));
        }
        Ok(())
    }
}
