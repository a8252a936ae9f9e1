mod common;

use std::io::{BufRead, BufReader, Write};
use std::process::Stdio;

use common::*;
use serde_json::{json, Value};

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_reproduces_golden_outputs() {
    let dir = fixture_copy();
    let out = run(&["run", path(dir.path()), "--mock-backend", path(&mock_script())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(dir.path().join("scenes.json")).unwrap(), expected("scenes.json"));
    assert_eq!(std::fs::read(dir.path().join("episode.json")).unwrap(), expected("episode.json"));
    for f in ["track.json", "transitions.json", "layouts.json", "som/scene_000.png", "crops/scene_002.png", "zoom/step000_zone1.png"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn eval_reports_golden_scores() {
    let dir = fixture_copy();
    assert!(run(&["run", path(dir.path()), "--mock-backend", path(&mock_script())]).status.success());
    let report = dir.path().join("report.json");
    let out = run(&["eval", path(dir.path()), "--out", path(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(dir.path().join("eval.json")).unwrap(), expected("eval.json"));
    let v: Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert_eq!(v["transition"]["f1"], 1.0);
    assert_eq!(v["accuracy_touch"], 1.0);
}

#[test]
fn sidecar_backend_matches_mock_backend() {
    // The hidden serve-mock command speaks the sidecar protocol, so it can
    // stand in for a model process.
    let dir = fixture_copy();
    let d = path(dir.path());
    for stage in ["track", "scenes", "elements"] {
        assert!(run(&[stage, d]).status.success());
    }
    let sidecar = format!("{} serve-mock --script {}", env!("CARGO_BIN_EXE_navmine"), path(&mock_script()));
    let out = navmine().env("NAVMINE_SIDECAR", sidecar).args(["actions", d]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(dir.path().join("episode.json")).unwrap(), expected("episode.json"));
}

#[test]
fn missing_inputs_exit_with_usage_status() {
    let empty = tempfile::tempdir().unwrap();
    let out = run(&["track", path(empty.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frames.jsonl"));

    assert_eq!(run(&["scenes", "/definitely/not/here"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/no/such/config.toml", "track", path(empty.path())]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));

    let dir = fixture_copy();
    assert_eq!(run(&["actions", path(dir.path())]).status.code(), Some(2), "no backend configured");
    assert_eq!(run(&["actions", path(dir.path()), "--mock-backend", "/no/script.jsonl"]).status.code(), Some(2));
}

#[test]
fn bad_data_exits_with_data_status() {
    let dir = fixture_copy();
    std::fs::write(dir.path().join("screen_detections.jsonl"), "{\"frame_index\": 0, \"bbox\": \"oops\"}\n").unwrap();
    let out = run(&["track", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn one_bad_video_does_not_stop_the_others() {
    let good = fixture_copy();
    let bad = fixture_copy();
    std::fs::write(bad.path().join("ocr.jsonl"), "garbage\n").unwrap();
    let out = run(&["-j", "2", "run", path(good.path()), path(bad.path()), "--mock-backend", path(&mock_script())]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(std::fs::read(good.path().join("episode.json")).unwrap(), expected("episode.json"));
    assert!(!bad.path().join("episode.json").exists());
}

#[test]
fn print_config_round_trips() {
    let out = run(&["--print-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[transition]") && text.contains("threshold = 0.2"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("navmine.toml");
    std::fs::write(&cfg, text.replace("threshold = 0.2\n", "threshold = 0.3\n")).unwrap();
    let again = run(&["--config", path(&cfg), "--print-config"]);
    assert!(again.status.success());
    assert!(String::from_utf8(again.stdout).unwrap().contains("threshold = 0.3"));

    std::fs::write(&cfg, "[transition]\nthreshhold = 0.3\n").unwrap();
    assert_eq!(run(&["--config", path(&cfg), "--print-config"]).status.code(), Some(1));
}

#[test]
fn serve_mock_speaks_the_line_protocol() {
    let mut child = navmine()
        .args(["serve-mock", "--script", path(&mock_script())])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let mut ask = |line: String| -> Value {
        writeln!(stdin, "{line}").unwrap();
        stdin.flush().unwrap();
        let mut reply = String::new();
        stdout.read_line(&mut reply).unwrap();
        serde_json::from_str(&reply).unwrap()
    };

    let request = json!({
        "id": "wifi_setup/summary/0/1",
        "method": "vlm",
        "params": {"messages": [{"role": "user", "content": [{"type": "text", "text": "describe"}]}], "temperature": 0.0, "tag": "summary/0"}
    });
    let reply = ask(request.to_string());
    assert_eq!(reply["id"], "wifi_setup/summary/0/1");
    assert_eq!(reply["ok"], true);
    assert!(reply["result"]["text"].as_str().unwrap().contains("Settings"));

    let reply = ask("this is not json".into());
    assert_eq!(reply["id"], "invalid-2");
    assert_eq!(reply["ok"], false);

    let unknown = json!({"id": "x", "method": "ocr", "params": {"image": {"path": "nowhere.png"}}});
    let reply = ask(unknown.to_string());
    assert_eq!((reply["id"].as_str(), reply["ok"].as_bool()), (Some("x"), Some(false)));

    drop(stdin);
    assert!(child.wait().unwrap().success());
}
