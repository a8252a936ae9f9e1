//! UI element post-processing and Set-of-Marks labeling.
//!
//! Raw detector boxes and OCR text boxes are combined into one candidate set,
//! cleaned up with screen-coverage, shape and overlap rules, and numbered in
//! reading order so a language model can refer to elements by label.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{delta_e, rgb_to_lab, LabColor};
use crate::geometry::{BBox, Point};
use crate::track::FrameRef;
use crate::transition::OcrToken;

#[derive(Debug, Error, PartialEq)]
pub enum ElementError {
    #[error("label {0} is not present in the layout")]
    UnknownLabel(u32),
    #[error("segment {segment:?} of token {token:?} is narrower than one pixel")]
    DegenerateBox { token: String, segment: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Icon,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDetection {
    pub bbox: BBox,
    pub score: f64,
    #[serde(default = "default_kind")]
    pub kind: ElementKind,
}

fn default_kind() -> ElementKind {
    ElementKind::Icon
}

/// One line of the icon-detections file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFrame {
    pub frame_index: u64,
    #[serde(default)]
    pub detections: Vec<RawDetection>,
}

/// A filtered element before labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementBox {
    pub bbox: BBox,
    pub kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UiElement {
    pub label: u32,
    pub bbox: BBox,
    pub kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomLayout {
    pub frame: FrameRef,
    /// Sorted by label, labels run 1..=N.
    pub elements: Vec<UiElement>,
    /// `ordering[k]` is the input position of the element labeled `k + 1`.
    pub ordering: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementParams {
    pub min_icon_score: f64,
    pub max_area: f64,
    pub min_area: f64,
    pub iou_merge: f64,
    pub min_aspect: f64,
    pub max_aspect: f64,
    pub row_tolerance: f64,
    pub delta_e_start: f64,
    pub delta_e_step: f64,
    pub delta_e_floor: f64,
}

impl Default for ElementParams {
    fn default() -> Self {
        Self {
            min_icon_score: 0.04,
            max_area: 0.4,
            min_area: 0.00005,
            iou_merge: 0.5,
            min_aspect: 1.0 / 12.0,
            max_aspect: 12.0,
            row_tolerance: 0.02,
            delta_e_start: 50.0,
            delta_e_step: 5.0,
            delta_e_floor: 5.0,
        }
    }
}

fn reading_cmp(a: &BBox, b: &BBox) -> Ordering {
    let (ca, cb) = (a.center(), b.center());
    ca.y.total_cmp(&cb.y).then(ca.x.total_cmp(&cb.x))
}

/// Total order used to canonicalize element sets before merging and labeling.
fn canonical_cmp(a: &ElementBox, b: &ElementBox) -> Ordering {
    reading_cmp(&a.bbox, &b.bbox)
        .then(a.bbox.x0().total_cmp(&b.bbox.x0()))
        .then(a.bbox.y0().total_cmp(&b.bbox.y0()))
        .then(a.bbox.x1().total_cmp(&b.bbox.x1()))
        .then(a.bbox.y1().total_cmp(&b.bbox.y1()))
        .then(a.kind.cmp(&b.kind))
        .then(a.text.cmp(&b.text))
}

/// Combines two overlapping elements into their hull. Text wins over icon;
/// two texts keep the enclosing one's string, or join in reading order.
pub(crate) fn merge_pair(a: &ElementBox, b: &ElementBox) -> ElementBox {
    let bbox = a.bbox.union_hull(&b.bbox);
    let kind = if a.kind == ElementKind::Text || b.kind == ElementKind::Text { ElementKind::Text } else { ElementKind::Icon };
    let text = match (&a.text, &b.text) {
        (Some(ta), Some(tb)) => {
            if a.bbox.contains_box(&b.bbox) {
                Some(ta.clone())
            } else if b.bbox.contains_box(&a.bbox) {
                Some(tb.clone())
            } else if reading_cmp(&a.bbox, &b.bbox) != Ordering::Greater {
                Some(format!("{ta} {tb}"))
            } else {
                Some(format!("{tb} {ta}"))
            }
        }
        (Some(t), None) | (None, Some(t)) => Some(t.clone()),
        (None, None) => None,
    };
    ElementBox { bbox, kind, text }
}

#[derive(PartialEq)]
struct MergeCandidate {
    iou: f64,
    i: usize,
    j: usize,
    vi: u32,
    vj: u32,
}

impl Eq for MergeCandidate {}

impl Ord for MergeCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest IoU first, then the lexicographically smallest pair.
        self.iou.total_cmp(&other.iou).then_with(|| (other.i, other.j).cmp(&(self.i, self.j)))
    }
}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Repeatedly merges the most-overlapping pair above `threshold` until no such
/// pair remains. The merged element takes the lower slot.
pub(crate) fn merge_overlaps(items: Vec<ElementBox>, threshold: f64) -> Vec<ElementBox> {
    let mut slots: Vec<Option<ElementBox>> = items.into_iter().map(Some).collect();
    let mut version = vec![0u32; slots.len()];
    let mut heap = BinaryHeap::new();

    for i in 0..slots.len() {
        for j in i + 1..slots.len() {
            let v = slots[i].as_ref().unwrap().bbox.iou(&slots[j].as_ref().unwrap().bbox);
            if v > threshold {
                heap.push(MergeCandidate { iou: v, i, j, vi: 0, vj: 0 });
            }
        }
    }

    while let Some(c) = heap.pop() {
        let live = slots[c.i].is_some() && slots[c.j].is_some() && version[c.i] == c.vi && version[c.j] == c.vj;
        if !live {
            continue;
        }
        let b = slots[c.j].take().unwrap();
        let merged = merge_pair(slots[c.i].as_ref().unwrap(), &b);
        slots[c.i] = Some(merged);
        version[c.i] += 1;

        let mb = slots[c.i].as_ref().unwrap().bbox;
        for k in 0..slots.len() {
            if k == c.i {
                continue;
            }
            if let Some(other) = &slots[k] {
                let v = mb.iou(&other.bbox);
                if v > threshold {
                    let (i, j) = if k < c.i { (k, c.i) } else { (c.i, k) };
                    heap.push(MergeCandidate { iou: v, i, j, vi: version[i], vj: version[j] });
                }
            }
        }
    }
    slots.into_iter().flatten().collect()
}

fn passes_shape(e: &ElementBox, p: &ElementParams) -> bool {
    let area = e.bbox.area();
    if area > p.max_area || area < p.min_area {
        return false;
    }
    if e.kind == ElementKind::Icon {
        let ar = e.bbox.aspect_ratio();
        if ar < p.min_aspect || ar > p.max_aspect {
            return false;
        }
    }
    true
}

/// Turns detector boxes and OCR tokens into a clean, unlabeled element set.
///
/// Icon boxes below the detector score floor are ignored. Elements larger
/// than `max_area` or smaller than `min_area` are removed, icons with extreme
/// aspect ratios are removed, and overlapping elements are merged. The
/// result is in canonical order and independent of input order.
pub fn filter_and_merge(raw: &[RawDetection], ocr: &[OcrToken], params: &ElementParams) -> Vec<ElementBox> {
    let mut items: Vec<ElementBox> = raw
        .iter()
        .filter(|d| d.score >= params.min_icon_score)
        .map(|d| ElementBox { bbox: d.bbox, kind: d.kind, text: None })
        .chain(ocr.iter().filter_map(|t| {
            let text = t.text.trim();
            (!text.is_empty()).then(|| ElementBox { bbox: t.bbox, kind: ElementKind::Text, text: Some(text.to_string()) })
        }))
        .filter(|e| passes_shape(e, params))
        .collect();
    items.sort_by(canonical_cmp);

    let mut merged = merge_overlaps(items, params.iou_merge);
    // Hulls can outgrow the coverage limit; dropping them cannot create new overlaps.
    merged.retain(|e| e.bbox.area() <= params.max_area);
    merged.sort_by(canonical_cmp);
    merged
}

/// Splits `text` on whitespace and gives each word a horizontal slice of
/// `bbox` proportional to its character count. Whitespace characters take
/// their share of the width too.
pub fn segment_boxes(text: &str, bbox: &BBox) -> Vec<(String, BBox)> {
    let text = text.trim();
    let total = text.chars().count();
    if total == 0 {
        return Vec::new();
    }
    let unit = bbox.width() / total as f64;
    let mut out = Vec::new();
    let mut offset = 0usize;
    let mut word = String::new();
    let mut word_start = 0usize;
    for (idx, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            if !word.is_empty() {
                out.push((std::mem::take(&mut word), word_start, idx));
            }
        } else {
            if word.is_empty() {
                word_start = idx;
            }
            word.push(c);
        }
        offset = idx + 1;
    }
    if !word.is_empty() {
        out.push((word, word_start, offset));
    }
    out.into_iter()
        .filter_map(|(w, s, e)| {
            let x0 = bbox.x0() + unit * s as f64;
            let x1 = if e == total { bbox.x1() } else { bbox.x0() + unit * e as f64 };
            BBox::new(x0, bbox.y0(), x1.min(1.0), bbox.y1()).ok().map(|b| (w, b))
        })
        .collect()
}

const LEVELS: u32 = 16;

fn bin_of(px: &image::Rgb<u8>) -> usize {
    let q = |v: u8| (v as u32 * LEVELS / 256) as usize;
    (q(px[0]) * 16 + q(px[1])) * 16 + q(px[2])
}

fn bin_levels(bin: usize) -> (i32, i32, i32) {
    ((bin / 256) as i32, ((bin / 16) % 16) as i32, (bin % 16) as i32)
}

fn bin_color(bin: usize) -> LabColor {
    let (r, g, b) = bin_levels(bin);
    let c = |l: i32| (l * 16 + 8) as u8;
    rgb_to_lab(c(r), c(g), c(b))
}

/// Background and foreground colors of a raster region: the modal
/// 4-bit-per-channel bin, and the most frequent bin not adjacent to it.
pub fn dominant_colors(raster: &RgbImage, region: &BBox) -> Option<(LabColor, LabColor)> {
    let (w, h) = raster.dimensions();
    let (left, top, right, bottom) = region.to_pixels(w, h);
    let mut hist = vec![0u32; 4096];
    for y in top..bottom {
        for x in left..right {
            hist[bin_of(raster.get_pixel(x, y))] += 1;
        }
    }
    let modal = |skip: &dyn Fn(usize) -> bool| {
        hist.iter()
            .enumerate()
            .filter(|(i, c)| **c > 0 && !skip(*i))
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
    };
    let bg = modal(&|_| false)?;
    let (br, bgn, bb) = bin_levels(bg);
    let fg = modal(&|i| {
        let (r, g, b) = bin_levels(i);
        (r - br).abs().max((g - bgn).abs()).max((b - bb).abs()) <= 1
    })?;
    Some((bin_color(bg), bin_color(fg)))
}

/// Splits a multi-word OCR token into per-word elements, keeping only words
/// whose text color stands out from the background.
///
/// The contrast threshold starts at `delta_e_start` and is lowered by
/// `delta_e_step` until at least one word clears it or `delta_e_floor` is
/// passed; words are kept if they clear the threshold in effect at that
/// point.
pub fn split_text_segments(token: &OcrToken, raster: &RgbImage, params: &ElementParams) -> Result<Vec<ElementBox>, ElementError> {
    let segments = segment_boxes(&token.text, &token.bbox);
    let width = raster.width() as f64;
    let mut contrast = Vec::with_capacity(segments.len());
    for (word, b) in &segments {
        if b.width() * width < 1.0 {
            return Err(ElementError::DegenerateBox { token: token.text.clone(), segment: word.clone() });
        }
        contrast.push(dominant_colors(raster, b).map(|(bg, fg)| delta_e(bg, fg)).unwrap_or(0.0));
    }

    let mut threshold = params.delta_e_start;
    while threshold >= params.delta_e_floor - 1e-9 {
        let kept: Vec<ElementBox> = segments
            .iter()
            .zip(&contrast)
            .filter(|(_, de)| **de > threshold)
            .map(|((word, b), _)| ElementBox { bbox: *b, kind: ElementKind::Text, text: Some(word.clone()) })
            .collect();
        if !kept.is_empty() {
            return Ok(kept);
        }
        threshold -= params.delta_e_step;
    }
    Ok(Vec::new())
}

/// Full per-frame element pipeline: word splitting of multi-word tokens
/// (when a raster is available) followed by [`filter_and_merge`].
pub fn build_elements(raw: &[RawDetection], ocr: &[OcrToken], raster: Option<&RgbImage>, params: &ElementParams) -> Vec<ElementBox> {
    let mut tokens: Vec<OcrToken> = ocr.to_vec();
    if let Some(raster) = raster {
        for t in ocr {
            if t.text.split_whitespace().count() < 2 {
                continue;
            }
            match split_text_segments(t, raster, params) {
                Ok(parts) => tokens.extend(parts.into_iter().map(|p| OcrToken {
                    text: p.text.unwrap_or_default(),
                    bbox: p.bbox,
                    confidence: t.confidence,
                })),
                Err(e) => log::debug!("skipping word split: {e}"),
            }
        }
    }
    filter_and_merge(raw, &tokens, params)
}

/// Numbers elements in reading order: rows top to bottom (centers within
/// `row_tolerance` of a row's first center share the row), left to right
/// within a row.
pub fn assign_labels(elements: &[ElementBox], frame: FrameRef, row_tolerance: f64) -> SomLayout {
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| canonical_cmp(&elements[a], &elements[b]).then(a.cmp(&b)));

    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for i in order {
        let cy = elements[i].bbox.center().y;
        if rows.is_empty() || cy - anchor > row_tolerance {
            anchor = cy;
            rows.push(Vec::new());
        }
        rows.last_mut().unwrap().push(i);
    }
    let mut ordering = Vec::with_capacity(elements.len());
    for mut row in rows {
        row.sort_by(|&a, &b| {
            let (ca, cb) = (elements[a].bbox.center(), elements[b].bbox.center());
            ca.x.total_cmp(&cb.x).then(canonical_cmp(&elements[a], &elements[b])).then(a.cmp(&b))
        });
        ordering.extend(row);
    }

    let labeled = ordering
        .iter()
        .enumerate()
        .map(|(k, &i)| UiElement {
            label: k as u32 + 1,
            bbox: elements[i].bbox,
            kind: elements[i].kind,
            text: elements[i].text.clone(),
        })
        .collect();
    SomLayout { frame, elements: labeled, ordering }
}

impl SomLayout {
    pub fn element(&self, label: u32) -> Option<&UiElement> {
        label.checked_sub(1).and_then(|i| self.elements.get(i as usize)).filter(|e| e.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.elements.iter().map(|e| e.label)
    }
}

/// Screen point of the element carrying `label`.
pub fn resolve_label(layout: &SomLayout, label: u32) -> Result<Point, ElementError> {
    layout.element(label).map(|e| e.bbox.center()).ok_or(ElementError::UnknownLabel(label))
}

/// Whether any element's center falls inside `region`.
pub fn hit_test(layout: &SomLayout, region: &BBox) -> bool {
    layout.elements.iter().any(|e| region.contains(e.bbox.center()))
}
