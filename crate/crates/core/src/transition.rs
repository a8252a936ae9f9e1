//! OCR-driven scene transition detection.
//!
//! Adjacent frames are compared by pairing text tokens found at the same
//! screen location and measuring how much of the earlier frame's text was
//! edited or disappeared. Frames whose change ratio exceeds the threshold are
//! candidates; nearby candidates are merged and each merged event is then
//! re-checked against frames further out in time to drop animation artifacts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BBox, Point};
use crate::text::{char_len, levenshtein, normalize_text};
use crate::track::FrameRef;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TransitionError {
    #[error("OCR stream has {0} frame(s); at least 2 are needed")]
    EmptyStream(usize),
    #[error("OCR stream is not strictly time-ordered at frame {0}")]
    Unordered(u64),
    #[error("transition events are not sorted or fall outside [{0}, {1})")]
    EventsOutOfSpan(f64, f64),
    #[error("scene [{start}, {end}) contains no grid frame")]
    EmptyScene { start: f64, end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrToken {
    pub text: String,
    pub bbox: BBox,
    pub confidence: f64,
}

/// One line of the per-frame OCR file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrFrame {
    pub frame_index: u64,
    pub timestamp_s: f64,
    #[serde(default)]
    pub tokens: Vec<OcrToken>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub timestamp_s: f64,
    pub frame_index: u64,
    pub change_ratio: f64,
    pub verified: bool,
    /// Ratio between the frames used for verification, when it ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification_ratio: Option<f64>,
}

/// Output of [`detect_transitions`]: kept events plus the merged candidates
/// that failed verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TransitionReport {
    pub events: Vec<TransitionEvent>,
    pub dropped: Vec<TransitionEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub representative: FrameRef,
    #[serde(default)]
    pub tokens: Vec<OcrToken>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionParams {
    pub min_confidence: f64,
    pub top_exclusion: f64,
    pub bottom_exclusion: f64,
    pub location_tolerance: f64,
    pub threshold: f64,
    pub merge_window_s: f64,
    pub verify_window_s: f64,
    pub verify: bool,
}

impl Default for TransitionParams {
    fn default() -> Self {
        Self {
            min_confidence: 0.9,
            top_exclusion: 0.05,
            bottom_exclusion: 0.10,
            location_tolerance: 0.02,
            threshold: 0.20,
            merge_window_s: 0.4,
            verify_window_s: 2.0,
            verify: true,
        }
    }
}

/// Drops unreliable tokens and tokens in the status/navigation bar bands.
/// Surviving tokens carry normalized text; tokens that normalize to nothing
/// are dropped too.
pub fn filter_tokens(tokens: &[OcrToken], min_conf: f64, top_excl: f64, bottom_excl: f64) -> Vec<OcrToken> {
    tokens
        .iter()
        .filter(|t| t.confidence > min_conf)
        .filter(|t| {
            let cy = t.bbox.center().y;
            cy >= top_excl && cy <= 1.0 - bottom_excl
        })
        .filter_map(|t| {
            let text = normalize_text(&t.text);
            (!text.is_empty()).then_some(OcrToken { text, bbox: t.bbox, confidence: t.confidence })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TokenMatching {
    /// `(prev index, next index)` pairs.
    pub pairs: Vec<(usize, usize)>,
    pub prev_unmatched: Vec<usize>,
    pub next_unmatched: Vec<usize>,
}

/// Reading-order rank of every token: top-to-bottom, then left-to-right by
/// center, then input position.
fn reading_ranks(centers: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| {
        centers[a]
            .y
            .total_cmp(&centers[b].y)
            .then(centers[a].x.total_cmp(&centers[b].x))
            .then(a.cmp(&b))
    });
    let mut rank = vec![0; centers.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Pairs tokens whose centers are within `loc_tol` on both axes, nearest
/// first. Distance ties go to the pair earlier in reading order.
pub fn match_tokens(prev: &[OcrToken], next: &[OcrToken], loc_tol: f64) -> TokenMatching {
    let pc: Vec<Point> = prev.iter().map(|t| t.bbox.center()).collect();
    let nc: Vec<Point> = next.iter().map(|t| t.bbox.center()).collect();
    let pr = reading_ranks(&pc);
    let nr = reading_ranks(&nc);

    let mut candidates = Vec::new();
    for (i, p) in pc.iter().enumerate() {
        for (j, n) in nc.iter().enumerate() {
            let dx = (p.x - n.x).abs();
            let dy = (p.y - n.y).abs();
            if dx <= loc_tol + TIME_EPS && dy <= loc_tol + TIME_EPS {
                candidates.push((dx.hypot(dy), i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(pr[a.1].cmp(&pr[b.1])).then(nr[a.2].cmp(&nr[b.2])));

    let mut prev_used = vec![false; prev.len()];
    let mut next_used = vec![false; next.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !prev_used[i] && !next_used[j] {
            prev_used[i] = true;
            next_used[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    TokenMatching {
        pairs,
        prev_unmatched: (0..prev.len()).filter(|&i| !prev_used[i]).collect(),
        next_unmatched: (0..next.len()).filter(|&j| !next_used[j]).collect(),
    }
}

/// Edited plus vanished characters, over the earlier frame's character count.
pub fn change_ratio(prev: &[OcrToken], next: &[OcrToken], loc_tol: f64) -> f64 {
    let total: usize = prev.iter().map(|t| char_len(&t.text)).sum();
    if total == 0 {
        return if next.iter().all(|t| t.text.is_empty()) { 0.0 } else { 1.0 };
    }
    let m = match_tokens(prev, next, loc_tol);
    let edited: usize = m.pairs.iter().map(|&(i, j)| levenshtein(&prev[i].text, &next[j].text)).sum();
    let vanished: usize = m.prev_unmatched.iter().map(|&i| char_len(&prev[i].text)).sum();
    (edited + vanished) as f64 / total as f64
}

/// Finds scene transitions in a time-ordered OCR stream.
pub fn detect_transitions(stream: &[OcrFrame], params: &TransitionParams) -> Result<TransitionReport, TransitionError> {
    if stream.len() < 2 {
        return Err(TransitionError::EmptyStream(stream.len()));
    }
    for w in stream.windows(2) {
        if w[1].timestamp_s <= w[0].timestamp_s {
            return Err(TransitionError::Unordered(w[1].frame_index));
        }
    }

    let frames: Vec<Vec<OcrToken>> = stream
        .iter()
        .map(|f| filter_tokens(&f.tokens, params.min_confidence, params.top_exclusion, params.bottom_exclusion))
        .collect();
    let tol = params.location_tolerance;

    // arrival[i]: change from frame i-1 to frame i.
    let mut arrival = vec![0.0; frames.len()];
    for i in 1..frames.len() {
        arrival[i] = change_ratio(&frames[i - 1], &frames[i], tol);
    }
    let candidates: Vec<usize> = (1..frames.len()).filter(|&i| arrival[i] > params.threshold).collect();

    // Chain candidates spaced within the merge window into clusters.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in candidates {
        match clusters.last_mut() {
            Some(c)
                if stream[i].timestamp_s - stream[*c.last().unwrap()].timestamp_s
                    <= params.merge_window_s + TIME_EPS =>
            {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    let unstable = |i: usize| -> bool {
        let arrives = i > 0 && arrival[i] > params.threshold;
        let departs = i + 1 < frames.len() && arrival[i + 1] > params.threshold;
        arrives && departs
    };

    let mut report = TransitionReport::default();
    for cluster in clusters {
        let first = cluster[0];
        let last = *cluster.last().unwrap();
        let peak = cluster.iter().map(|&i| arrival[i]).fold(f64::MIN, f64::max);
        let mut event = TransitionEvent {
            timestamp_s: stream[first].timestamp_s,
            frame_index: stream[first].frame_index,
            change_ratio: peak,
            verified: true,
            verification_ratio: None,
        };
        if params.verify {
            let before = reference_before(stream, first, params.verify_window_s, &unstable);
            let after = reference_after(stream, last, params.verify_window_s, &unstable);
            let ratio = change_ratio(&frames[before], &frames[after], tol);
            event.verification_ratio = Some(ratio);
            event.verified = ratio > params.threshold;
        }
        if event.verified {
            report.events.push(event);
        } else {
            report.dropped.push(event);
        }
    }
    Ok(report)
}

/// Last stable frame at least `window` before the frame at `at`, or the
/// closest available one.
fn reference_before(stream: &[OcrFrame], at: usize, window: f64, unstable: &dyn Fn(usize) -> bool) -> usize {
    let limit = stream[at].timestamp_s - window + TIME_EPS;
    let start = (0..at).rev().find(|&k| stream[k].timestamp_s <= limit).unwrap_or(0);
    (0..=start).rev().find(|&k| !unstable(k)).unwrap_or(start)
}

/// First stable frame at least `window` after the frame at `at`, or the
/// closest available one.
fn reference_after(stream: &[OcrFrame], at: usize, window: f64, unstable: &dyn Fn(usize) -> bool) -> usize {
    let limit = stream[at].timestamp_s + window - TIME_EPS;
    let last = stream.len() - 1;
    let start = (at..stream.len()).find(|&k| stream[k].timestamp_s >= limit).unwrap_or(last);
    (start..=last).find(|&k| !unstable(k)).unwrap_or(start)
}

/// Splits `[span.0, span.1)` at every event and picks, for each piece, the
/// grid frame nearest its temporal midpoint.
pub fn segment_scenes(
    events: &[TransitionEvent],
    span: (f64, f64),
    grid: &[FrameRef],
) -> Result<Vec<Scene>, TransitionError> {
    let (t0, t1) = span;
    let mut bounds = vec![t0];
    for e in events {
        if e.timestamp_s <= *bounds.last().unwrap() || e.timestamp_s >= t1 {
            return Err(TransitionError::EventsOutOfSpan(t0, t1));
        }
        bounds.push(e.timestamp_s);
    }
    bounds.push(t1);

    bounds
        .windows(2)
        .enumerate()
        .map(|(scene_index, w)| {
            let (start, end) = (w[0], w[1]);
            let mid = (start + end) / 2.0;
            let rep = grid
                .iter()
                .filter(|f| f.timestamp_s >= start && f.timestamp_s < end)
                .min_by(|a, b| {
                    (a.timestamp_s - mid)
                        .abs()
                        .total_cmp(&(b.timestamp_s - mid).abs())
                        .then(a.timestamp_s.total_cmp(&b.timestamp_s))
                })
                .ok_or(TransitionError::EmptyScene { start, end })?;
            Ok(Scene { scene_index, start_s: start, end_s: end, representative: rep.clone(), tokens: Vec::new() })
        })
        .collect()
}

/// Time span covered by a frame grid: first timestamp up to one median frame
/// interval past the last.
pub fn stream_span(grid: &[FrameRef]) -> Option<(f64, f64)> {
    let first = grid.first()?.timestamp_s;
    let last = grid.last()?.timestamp_s;
    let mut steps: Vec<f64> = grid.windows(2).map(|w| w[1].timestamp_s - w[0].timestamp_s).collect();
    steps.sort_by(f64::total_cmp);
    let step = steps.get(steps.len() / 2).copied().unwrap_or(0.25);
    Some((first, last + step))
}
