//! Writes the three-scene "join a Wi-Fi network" fixture used by the
//! end-to-end tests: frames, perception outputs, transcript and metadata.
//!
//! Usage: cargo run --example make_fixture -- <out_dir>

use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage};
use serde_json::json;

const W: u32 = 320;
const H: u32 = 180;
const FPS: f64 = 4.0;
const FRAMES: u64 = 48;
/// Phone screen inside the recording, normalized.
const SCREEN: (f64, f64, f64, f64) = (0.35, 0.05, 0.65, 0.95);

struct Item {
    text: &'static str,
    b: (f64, f64, f64, f64),
}

fn scene_tokens(scene: usize) -> Vec<Item> {
    let t = |text, x0, y0, x1, y1| Item { text, b: (x0, y0, x1, y1) };
    match scene {
        0 => vec![
            t("Settings", 0.10, 0.12, 0.60, 0.17),
            t("Wi-Fi", 0.25, 0.30, 0.55, 0.34),
            t("Bluetooth", 0.25, 0.40, 0.80, 0.44),
            t("Battery", 0.25, 0.50, 0.70, 0.54),
        ],
        1 => vec![
            t("Wi-Fi", 0.10, 0.12, 0.40, 0.17),
            t("Networks", 0.10, 0.30, 0.55, 0.34),
            t("Home", 0.25, 0.40, 0.50, 0.44),
            t("Office", 0.25, 0.50, 0.55, 0.54),
            t("Other network", 0.25, 0.60, 0.90, 0.64),
        ],
        _ => vec![
            t("Enter password", 0.10, 0.12, 0.85, 0.17),
            t("Cancel", 0.10, 0.25, 0.40, 0.29),
            t("Join", 0.70, 0.25, 0.90, 0.29),
            t("Password", 0.10, 0.40, 0.60, 0.45),
        ],
    }
}

fn scene_icons(scene: usize) -> Vec<(f64, f64, f64, f64)> {
    match scene {
        0 => vec![(0.06, 0.29, 0.18, 0.35), (0.06, 0.39, 0.18, 0.45), (0.06, 0.49, 0.18, 0.55)],
        1 => vec![(0.75, 0.12, 0.92, 0.17), (0.06, 0.39, 0.18, 0.45)],
        _ => vec![(0.05, 0.70, 0.30, 0.78), (0.375, 0.70, 0.625, 0.78), (0.70, 0.70, 0.95, 0.78)],
    }
}

fn scene_of(frame: u64) -> usize {
    (frame / 16) as usize
}

fn fill(img: &mut RgbImage, b: (f64, f64, f64, f64), c: [u8; 3]) {
    // Map screen-relative box into recording pixels.
    let sx = |v: f64| ((SCREEN.0 + v * (SCREEN.2 - SCREEN.0)) * W as f64).round() as u32;
    let sy = |v: f64| ((SCREEN.1 + v * (SCREEN.3 - SCREEN.1)) * H as f64).round() as u32;
    for y in sy(b.1)..sy(b.3).min(H) {
        for x in sx(b.0)..sx(b.2).min(W) {
            img.put_pixel(x, y, Rgb(c));
        }
    }
}

fn render(scene: usize) -> RgbImage {
    let mut img = RgbImage::from_pixel(W, H, Rgb([40, 40, 48]));
    fill(&mut img, (0.0, 0.0, 1.0, 1.0), [250, 250, 250]);
    for item in scene_tokens(scene) {
        // Words are dark blocks with light gaps so the colour split can find them.
        let chars = item.text.chars().count() as f64;
        let w = item.b.2 - item.b.0;
        let mut x = item.b.0;
        for word in item.text.split(' ') {
            let ww = w * word.chars().count() as f64 / chars;
            fill(&mut img, (x, item.b.1, x + ww, item.b.3), [20, 20, 20]);
            x += ww + w / chars;
        }
    }
    for b in scene_icons(scene) {
        fill(&mut img, b, [30, 120, 230]);
    }
    img
}

fn main() {
    let out = std::env::args().nth(1).expect("usage: make_fixture <out_dir>");
    let out = Path::new(&out);
    fs::create_dir_all(out.join("frames")).unwrap();

    let mut frames = String::new();
    let mut detections = String::new();
    let mut ocr = String::new();
    let rendered: Vec<RgbImage> = (0..3).map(render).collect();
    for i in 0..FRAMES {
        let ts = i as f64 / FPS;
        let uri = format!("frames/{i:05}.png");
        rendered[scene_of(i)].save(out.join(&uri)).unwrap();
        frames += &format!("{}\n", json!({"video_id": "wifi_setup", "frame_index": i, "timestamp_s": ts, "image_uri": uri}));
        // The phone detector runs at half the frame rate, plus the closing frame.
        if i % 2 == 0 || i == FRAMES - 1 {
            let (x0, y0, x1, y1) = SCREEN;
            detections += &format!(
                "{}\n",
                json!({"frame_index": i, "bbox": {"x0": x0, "y0": y0, "x1": x1, "y1": y1}, "confidence": 0.9})
            );
        }
        let tokens: Vec<_> = scene_tokens(scene_of(i))
            .iter()
            .map(|t| json!({"text": t.text, "bbox": {"x0": t.b.0, "y0": t.b.1, "x1": t.b.2, "y1": t.b.3}, "confidence": 0.97}))
            .collect();
        ocr += &format!("{}\n", json!({"frame_index": i, "timestamp_s": ts, "tokens": tokens}));
    }
    fs::write(out.join("frames.jsonl"), frames).unwrap();
    fs::write(out.join("screen_detections.jsonl"), detections).unwrap();
    fs::write(out.join("ocr.jsonl"), ocr).unwrap();

    let mut icons = String::new();
    for (scene, frame) in [(0usize, 8u64), (1, 24), (2, 40)] {
        let dets: Vec<_> = scene_icons(scene)
            .iter()
            .map(|b| json!({"bbox": {"x0": b.0, "y0": b.1, "x1": b.2, "y1": b.3}, "score": 0.35}))
            .collect();
        icons += &format!("{}\n", json!({"frame_index": frame, "detections": dets}));
    }
    fs::write(out.join("icons.jsonl"), icons).unwrap();

    let transcript = [
        (0.5, 2.5, "Open the Settings app."),
        (3.0, 4.5, "Now tap on Wi-Fi."),
        (6.0, 7.5, "Choose your home network."),
        (9.0, 11.0, "And type in the password."),
    ];
    let lines: String =
        transcript.iter().map(|(a, b, t)| format!("{}\n", json!({"start_s": a, "end_s": b, "text": t}))).collect();
    fs::write(out.join("transcript.jsonl"), lines).unwrap();

    let meta = json!({
        "video_id": "wifi_setup",
        "task_name": "Join a Wi-Fi network",
        "platform": "ios",
        "duration_s": 12.0,
        "app_name": "Settings",
        "title": "How to join a Wi-Fi network on iPhone"
    });
    fs::write(out.join("meta.json"), serde_json::to_string_pretty(&meta).unwrap() + "\n").unwrap();

    let truth = json!({
        "video_id": "wifi_setup",
        "transitions": [4.0, 8.0],
        "steps": [
            {"kind": "touch", "region": {"x0": 0.25, "y0": 0.30, "x1": 0.55, "y1": 0.34}},
            {"kind": "touch", "region": {"x0": 0.25, "y0": 0.40, "x1": 0.50, "y1": 0.44}}
        ]
    });
    fs::write(out.join("ground_truth.json"), serde_json::to_string_pretty(&truth).unwrap() + "\n").unwrap();
}
