//! Writes the synthetic OCR-stream corpus used to score transition
//! detection: one JSON Lines stream per video plus `truth.json` with the
//! planted transition times and the distractors present in each video.
//!
//! Usage: cargo run --example make_transition_corpus -- <out_dir>

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const FPS: f64 = 4.0;
const VIDEOS: usize = 12;

const WORDS: &[&str] = &[
    "account", "airplane", "alarm", "backup", "battery", "bluetooth", "brightness", "calendar", "camera", "cellular",
    "contacts", "display", "download", "email", "focus", "general", "hotspot", "keyboard", "language", "location",
    "messages", "music", "network", "notes", "passcode", "password", "photos", "privacy", "reminders", "restore",
    "ringtone", "safari", "screen", "security", "sharing", "siri", "sounds", "storage", "sync", "time", "update",
    "vibration", "wallpaper", "weather", "widgets", "wireless",
];

#[derive(Clone)]
struct Tok {
    text: String,
    b: [f64; 4],
    conf: f64,
}

impl Tok {
    fn to_json(&self) -> Value {
        json!({
            "text": self.text,
            "bbox": {"x0": self.b[0], "y0": self.b[1], "x1": self.b[2], "y1": self.b[3]},
            "confidence": self.conf,
        })
    }
}

fn round4(v: f64) -> f64 {
    (v * 10_000.0).round() / 10_000.0
}

fn phrase(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn row_token(rng: &mut ChaCha8Rng, text: String, row: usize) -> Tok {
    let x0 = round4(rng.random_range(0.05..0.25));
    let w = (text.chars().count() as f64 * 0.03).min(0.95 - x0);
    let y0 = 0.22 + 0.09 * row as f64;
    Tok { text, b: [x0, round4(y0), round4(x0 + w), round4(y0 + 0.04)], conf: 0.97 }
}

fn scene_layout(rng: &mut ChaCha8Rng, header: Option<&Tok>) -> Vec<Tok> {
    let title = match header {
        Some(h) => h.clone(),
        None => {
            let t = phrase(rng, 1);
            Tok { b: [0.1, 0.1, round4(0.1 + t.len() as f64 * 0.04), 0.15], text: t, conf: 0.98 }
        }
    };
    let rows = rng.random_range(4..=7);
    let mut toks = vec![title];
    for r in 0..rows {
        let words = rng.random_range(1..=3);
        let text = phrase(rng, words);
        toks.push(row_token(rng, text, r));
    }
    toks
}

/// Status and navigation bar text, inside the excluded bands.
fn chrome(frame: usize) -> Vec<Tok> {
    vec![
        Tok { text: format!("9:{:02}", 10 + frame / 40), b: [0.05, 0.005, 0.15, 0.035], conf: 0.99 },
        Tok { text: format!("{}%", 100 - frame / 20), b: [0.8, 0.005, 0.9, 0.035], conf: 0.99 },
        Tok { text: "Home".into(), b: [0.4, 0.93, 0.6, 0.97], conf: 0.95 },
    ]
}

fn substitute_char(rng: &mut ChaCha8Rng, text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let at = rng.random_range(0..chars.len());
    let mut repl = chars[at];
    while repl == chars[at] || repl == ' ' {
        repl = (b'a' + rng.random_range(0..26u8)) as char;
    }
    chars.iter().enumerate().map(|(i, &c)| if i == at { repl } else { c }).collect()
}

fn main() {
    let out = std::env::args().nth(1).expect("usage: make_transition_corpus <out_dir>");
    let out = Path::new(&out);
    fs::create_dir_all(out).unwrap();
    let mut truth = BTreeMap::new();

    for v in 0..VIDEOS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + v as u64);
        let id = format!("synthetic_{v:02}");
        // Distractors rotate so every video carries at least one.
        let loading = v % 3 == 0;
        let theme_flip = v % 2 == 0;
        let noise = v % 4 != 3;
        let shared_header = v % 3 == 1;
        let low_conf_junk = v % 2 == 1;

        let scenes = rng.random_range(3..=6);
        let flip_scene = rng.random_range(0..scenes);
        let mut layouts: Vec<Vec<Tok>> = Vec::new();
        let mut dwell: Vec<usize> = Vec::new();
        for s in 0..scenes {
            let header = if shared_header && s > 0 { Some(layouts[s - 1][0].clone()) } else { None };
            layouts.push(scene_layout(&mut rng, header.as_ref()));
            // 3 to 7 seconds; the theme-flip scene is long enough to verify both sides.
            dwell.push(if theme_flip && s == flip_scene { 28 } else { rng.random_range(12..=28) });
        }

        let mut lines = String::new();
        let mut transitions = Vec::new();
        let mut frame = 0usize;
        for s in 0..scenes {
            if s > 0 {
                transitions.push(frame as f64 / FPS);
            }
            for k in 0..dwell[s] {
                let mut toks: Vec<Tok> = layouts[s].clone();
                if theme_flip && s == flip_scene {
                    let mid = dwell[s] / 2;
                    if k == mid {
                        // Inversion fade: everything reads at low confidence.
                        for t in &mut toks {
                            t.conf = 0.6;
                        }
                    } else if k > mid {
                        // Inverted theme: same text, new confidences, sub-tolerance jitter.
                        for t in &mut toks {
                            t.conf = 0.93 + 0.05 * (t.text.len() % 3) as f64 / 2.0;
                            let dx = 0.004 * if t.text.len() % 2 == 0 { 1.0 } else { -1.0 };
                            t.b = [round4(t.b[0] + dx), t.b[1], round4(t.b[2] + dx), t.b[3]];
                        }
                    }
                }
                if loading && s > 0 && k == 0 {
                    toks.clear();
                }
                if noise && k > 0 && rng.random_bool(0.3) {
                    let i = rng.random_range(1..toks.len().max(2));
                    if let Some(t) = toks.get_mut(i) {
                        t.text = substitute_char(&mut rng, &t.text);
                    }
                }
                if low_conf_junk {
                    let text = phrase(&mut rng, 1);
                    let y = round4(rng.random_range(0.2..0.8));
                    toks.push(Tok { text, b: [0.6, y, 0.9, round4(y + 0.03)], conf: round4(rng.random_range(0.3..0.85)) });
                }
                toks.extend(chrome(frame));
                let tokens: Vec<Value> = toks.iter().map(Tok::to_json).collect();
                lines += &format!(
                    "{}\n",
                    json!({"frame_index": frame, "timestamp_s": frame as f64 / FPS, "tokens": tokens})
                );
                frame += 1;
            }
        }
        fs::write(out.join(format!("{id}.jsonl")), lines).unwrap();
        let mut features = Vec::new();
        for (on, name) in [
            (loading, "loading_frame"),
            (theme_flip, "theme_inversion"),
            (noise, "sub_threshold_noise"),
            (shared_header, "shared_header"),
            (low_conf_junk, "low_confidence_junk"),
        ] {
            if on {
                features.push(name);
            }
        }
        truth.insert(id, json!({"transitions": transitions, "features": features}));
    }
    fs::write(out.join("truth.json"), serde_json::to_string_pretty(&truth).unwrap() + "\n").unwrap();
}
