use navmine::elements::{assign_labels, filter_and_merge, hit_test, ElementKind, ElementParams, RawDetection};
use navmine::geometry::BBox;
use navmine::track::FrameRef;
use navmine::transition::OcrToken;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Outcome};

fn random_box(rng: &mut ChaCha8Rng, max_side: f64) -> BBox {
    loop {
        let w = rng.random_range(0.005..max_side);
        let h = rng.random_range(0.005..max_side);
        let x0 = rng.random_range(0.0..1.0 - w);
        let y0 = rng.random_range(0.0..1.0 - h);
        if let Ok(b) = BBox::new(x0, y0, x0 + w, y0 + h) {
            return b;
        }
    }
}

/// Near-duplicate of `b`, as detectors produce for the same widget.
fn jitter(rng: &mut ChaCha8Rng, b: &BBox) -> BBox {
    let d = |rng: &mut ChaCha8Rng| rng.random_range(-0.01..0.01);
    BBox::clamped(b.x0() + d(rng), b.y0() + d(rng), b.x1() + d(rng), b.y1() + d(rng)).unwrap_or(*b)
}

fn raw_set(rng: &mut ChaCha8Rng) -> (Vec<RawDetection>, Vec<OcrToken>) {
    let mut raw = Vec::new();
    for _ in 0..rng.random_range(0..40) {
        // A few boxes cover most of the screen; most are widget-sized.
        let side = if rng.random_bool(0.1) { 0.95 } else { 0.3 };
        let b = random_box(rng, side);
        raw.push(RawDetection { bbox: b, score: rng.random_range(0.0..0.6), kind: ElementKind::Icon });
        if rng.random_bool(0.3) {
            raw.push(RawDetection { bbox: jitter(rng, &b), score: rng.random_range(0.0..0.6), kind: ElementKind::Icon });
        }
    }
    let mut ocr = Vec::new();
    for i in 0..rng.random_range(0..25) {
        let b = random_box(rng, 0.4);
        ocr.push(OcrToken { text: format!("word{i}"), bbox: b, confidence: 0.95 });
        if rng.random_bool(0.2) {
            ocr.push(OcrToken { text: format!("dup{i}"), bbox: jitter(rng, &b), confidence: 0.95 });
        }
    }
    (raw, ocr)
}

fn frame() -> FrameRef {
    FrameRef { video_id: "random".into(), frame_index: 0, timestamp_s: 0.0, image_uri: String::new() }
}

/// Intersection over union from raw corners.
fn corner_iou(a: &BBox, b: &BBox) -> f64 {
    let w = (a.x1().min(b.x1()) - a.x0().max(b.x0())).max(0.0);
    let h = (a.y1().min(b.y1()) - a.y0().max(b.y0())).max(0.0);
    let area = |r: &BBox| (r.x1() - r.x0()) * (r.y1() - r.y0());
    w * h / (area(a) + area(b) - w * h)
}

pub fn check() -> Outcome {
    let params = ElementParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut elements, mut regions, mut hits) = (0, 0, 0);
    for case in 0..250 {
        let (raw, ocr) = raw_set(&mut rng);
        let out = filter_and_merge(&raw, &ocr, &params);
        for (i, a) in out.iter().enumerate() {
            let b = &a.bbox;
            ensure!(b.area() <= params.max_area, "case {case}: element area {} above limit", b.area());
            ensure!(
                0.0 <= b.x0() && b.x0() < b.x1() && b.x1() <= 1.0 && 0.0 <= b.y0() && b.y0() < b.y1() && b.y1() <= 1.0,
                "case {case}: element {b:?} leaves the crop"
            );
            for c in &out[i + 1..] {
                let v = corner_iou(b, &c.bbox);
                ensure!(v <= params.iou_merge, "case {case}: surviving pair overlaps with IoU {v}");
            }
        }
        elements += out.len();

        let layout = assign_labels(&out, frame(), params.row_tolerance);
        for _ in 0..20 {
            let region = random_box(&mut rng, 0.5);
            let oracle = layout.elements.iter().any(|e| {
                let (cx, cy) = ((e.bbox.x0() + e.bbox.x1()) / 2.0, (e.bbox.y0() + e.bbox.y1()) / 2.0);
                region.x0() <= cx && cx <= region.x1() && region.y0() <= cy && cy <= region.y1()
            });
            ensure!(hit_test(&layout, &region) == oracle, "case {case}: hit_test disagrees on {region:?}");
            regions += 1;
            hits += usize::from(oracle);
        }
    }
    Ok(format!("250 detection sets, {elements} surviving elements, {regions} hit tests ({hits} hits) match the oracle"))
}
