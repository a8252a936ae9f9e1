use std::path::Path;
use std::process::Command;

use serde_json::Value;

use crate::common::{copy_inputs, fixture_dir, mock_script};
use crate::{ensure, Outcome};

fn navmine(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_navmine")).env_remove("NAVMINE_SIDECAR").args(args).output().map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "navmine {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn run_stages(dir: &Path) -> Result<(Vec<u8>, Vec<u8>), String> {
    let d = dir.to_str().ok_or("non-utf8 temp path")?;
    let script = mock_script();
    navmine(&["track", d])?;
    navmine(&["scenes", d])?;
    navmine(&["elements", d])?;
    navmine(&["actions", d, "--mock-backend", script.to_str().unwrap()])?;
    let read = |name: &str| std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"));
    Ok((read("scenes.json")?, read("episode.json")?))
}

pub fn check() -> Outcome {
    let golden_scenes = std::fs::read(fixture_dir().join("expected/scenes.json")).map_err(|e| e.to_string())?;
    let golden_episode = std::fs::read(fixture_dir().join("expected/episode.json")).map_err(|e| e.to_string())?;

    let mut runs = Vec::new();
    for _ in 0..2 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        copy_inputs(&fixture_dir(), tmp.path()).map_err(|e| e.to_string())?;
        runs.push(run_stages(tmp.path())?);
    }
    for (i, (scenes, episode)) in runs.iter().enumerate() {
        ensure!(*scenes == golden_scenes, "run {i}: scenes.json differs from the golden file");
        ensure!(*episode == golden_episode, "run {i}: episode.json differs from the golden file");
    }

    // The fixture was built with scene changes every 16 frames at 4 fps.
    let scenes: Value = serde_json::from_slice(&golden_scenes).map_err(|e| e.to_string())?;
    let bounds: Vec<(f64, f64, u64)> = scenes
        .as_array()
        .ok_or("scenes.json is not a list")?
        .iter()
        .map(|s| {
            (
                s["start_s"].as_f64().unwrap_or(f64::NAN),
                s["end_s"].as_f64().unwrap_or(f64::NAN),
                s["representative"]["frame_index"].as_u64().unwrap_or(u64::MAX),
            )
        })
        .collect();
    ensure!(bounds == vec![(0.0, 4.0, 8), (4.0, 8.0, 24), (8.0, 12.0, 40)], "scene bounds {bounds:?}");

    // Scripted replies tap "Wi-Fi" (after refinement corrects the first pick) then "Home".
    let episode: Value = serde_json::from_slice(&golden_episode).map_err(|e| e.to_string())?;
    let steps = episode["steps"].as_array().ok_or("episode has no steps")?;
    ensure!(steps.len() == 2 && episode["partial"] == Value::Bool(false), "expected two complete steps");
    for (step, (text, x, y)) in steps.iter().zip([("Wi-Fi", 0.40, 0.32), ("Home", 0.375, 0.42)]) {
        let a = &step["action"];
        let label = a["element_label"].as_u64().ok_or("pointer action without label")?;
        let element = step["layout"]["elements"]
            .as_array()
            .and_then(|es| es.iter().find(|e| e["label"].as_u64() == Some(label)))
            .ok_or("label missing from layout")?;
        ensure!(a["kind"] == "touch" && element["text"] == text, "step taps {element}, expected {text}");
        let (px, py) = (a["point"]["x"].as_f64().unwrap_or(-1.0), a["point"]["y"].as_f64().unwrap_or(-1.0));
        ensure!((px - x).abs() < 1e-6 && (py - y).abs() < 1e-6, "{text} tapped at ({px}, {py})");
    }
    Ok(format!("two runs byte-identical to the golden episode ({} bytes)", golden_episode.len()))
}
