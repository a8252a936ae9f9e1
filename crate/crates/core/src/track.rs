//! Continuous phone-screen track from sparse detector output.

use std::collections::BTreeMap;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::BBox;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("no usable screen detections for video {0}")]
    EmptyTrack(String),
    #[error("detection references frame {0} which is not in the frame grid")]
    UnknownFrame(u64),
    #[error("frame grid is not strictly increasing in time at frame {0}")]
    UnorderedGrid(u64),
    #[error("crop of {width}x{height} raster to {bbox:?} is empty")]
    DegenerateCrop { bbox: BBox, width: u32, height: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRef {
    pub video_id: String,
    pub frame_index: u64,
    pub timestamp_s: f64,
    pub image_uri: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetectionSource {
    #[default]
    Detected,
    Interpolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDetection {
    pub frame: FrameRef,
    pub bbox: BBox,
    pub confidence: f64,
    #[serde(default)]
    pub source: DetectionSource,
}

/// A run of consecutive grid frames with no screen box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub start_s: f64,
    pub end_s: f64,
    pub frame_indices: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenTrack {
    pub video_id: String,
    pub entries: Vec<ScreenDetection>,
    pub gaps: Vec<Gap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackParams {
    /// Longest anchor spacing that still gets interpolated.
    pub max_gap_s: f64,
    /// Detector box threshold; weaker detections are ignored.
    pub min_confidence: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self { max_gap_s: 3.0, min_confidence: 0.25 }
    }
}

/// Builds the per-frame screen track over `frame_grid`.
///
/// Grid frames strictly between two detections at most `max_gap_s` apart get
/// a corner-wise linear blend of the two anchor boxes. Frames before the first
/// or after the last detection, or between anchors that are too far apart,
/// are reported as gaps.
pub fn build_track(
    detections: &[ScreenDetection],
    frame_grid: &[FrameRef],
    params: TrackParams,
) -> Result<ScreenTrack, TrackError> {
    let mut grid: Vec<&FrameRef> = frame_grid.iter().collect();
    grid.sort_by_key(|f| f.frame_index);
    for w in grid.windows(2) {
        if w[1].timestamp_s <= w[0].timestamp_s || w[1].frame_index == w[0].frame_index {
            return Err(TrackError::UnorderedGrid(w[1].frame_index));
        }
    }
    let video_id = grid
        .first()
        .map(|f| f.video_id.clone())
        .or_else(|| detections.first().map(|d| d.frame.video_id.clone()))
        .unwrap_or_default();

    let positions: BTreeMap<u64, usize> = grid.iter().enumerate().map(|(i, f)| (f.frame_index, i)).collect();

    // Strongest detection per frame; first one wins ties.
    let mut anchors: BTreeMap<usize, &ScreenDetection> = BTreeMap::new();
    for det in detections {
        if det.confidence < params.min_confidence {
            continue;
        }
        let pos = *positions.get(&det.frame.frame_index).ok_or(TrackError::UnknownFrame(det.frame.frame_index))?;
        match anchors.get(&pos) {
            Some(prev) if prev.confidence >= det.confidence => {}
            _ => {
                anchors.insert(pos, det);
            }
        }
    }
    if anchors.is_empty() {
        return Err(TrackError::EmptyTrack(video_id));
    }

    let mut entries = Vec::with_capacity(grid.len());
    let mut gaps: Vec<Gap> = Vec::new();
    let mut open_gap: Option<Gap> = None;

    for (pos, frame) in grid.iter().enumerate() {
        let entry = if let Some(det) = anchors.get(&pos) {
            Some(ScreenDetection {
                frame: (*frame).clone(),
                bbox: det.bbox,
                confidence: det.confidence,
                source: DetectionSource::Detected,
            })
        } else {
            let before = anchors.range(..pos).next_back();
            let after = anchors.range(pos + 1..).next();
            match (before, after) {
                (Some((_, a)), Some((_, b))) => {
                    let span = b.frame.timestamp_s - a.frame.timestamp_s;
                    if span <= params.max_gap_s + TIME_EPS {
                        let t = (frame.timestamp_s - a.frame.timestamp_s) / span;
                        Some(ScreenDetection {
                            frame: (*frame).clone(),
                            bbox: a.bbox.lerp(&b.bbox, t),
                            confidence: a.confidence.min(b.confidence),
                            source: DetectionSource::Interpolated,
                        })
                    } else {
                        None
                    }
                }
                _ => None,
            }
        };

        match entry {
            Some(e) => {
                if let Some(g) = open_gap.take() {
                    gaps.push(g);
                }
                entries.push(e);
            }
            None => {
                let g = open_gap.get_or_insert_with(|| Gap {
                    start_s: frame.timestamp_s,
                    end_s: frame.timestamp_s,
                    frame_indices: Vec::new(),
                });
                g.end_s = frame.timestamp_s;
                g.frame_indices.push(frame.frame_index);
            }
        }
    }
    if let Some(g) = open_gap {
        gaps.push(g);
    }

    Ok(ScreenTrack { video_id, entries, gaps })
}

impl ScreenTrack {
    pub fn entry(&self, frame_index: u64) -> Option<&ScreenDetection> {
        self.entries
            .binary_search_by_key(&frame_index, |e| e.frame.frame_index)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Entry closest in time to `timestamp_s`; earlier entry on ties.
    pub fn nearest(&self, timestamp_s: f64) -> Option<&ScreenDetection> {
        self.entries.iter().min_by(|a, b| {
            let da = (a.frame.timestamp_s - timestamp_s).abs();
            let db = (b.frame.timestamp_s - timestamp_s).abs();
            da.total_cmp(&db)
        })
    }
}

/// Crops `raster` to `bbox` using outward pixel rounding.
pub fn crop_to_screen(raster: &RgbImage, bbox: &BBox) -> Result<RgbImage, TrackError> {
    let (w, h) = raster.dimensions();
    let (left, top, right, bottom) = bbox.to_pixels(w, h);
    if right <= left || bottom <= top {
        return Err(TrackError::DegenerateCrop { bbox: *bbox, width: w, height: h });
    }
    Ok(image::imageops::crop_imm(raster, left, top, right - left, bottom - top).to_image())
}
