use std::path::PathBuf;

use navmine::action::{Action, ActionKind};
use navmine::eval::{accuracy, action_match, transition_f1, typing_matches, TruthStep};
use serde::Deserialize;

use crate::{ensure, Outcome};

#[derive(Deserialize)]
struct Case {
    name: String,
    truth: TruthStep,
    predicted: Option<Action>,
    expected: bool,
}

fn load_cases() -> Result<Vec<Case>, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/action_cases.json");
    serde_json::from_str(&std::fs::read_to_string(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

pub fn check() -> Outcome {
    let cases = load_cases()?;
    let scored: Vec<&Case> = cases.iter().filter(|c| !c.truth.skipped()).collect();
    ensure!(scored.len() == 20, "fixture has {} scored cases", scored.len());
    for c in &scored {
        let got = c.predicted.as_ref().is_some_and(|p| action_match(p, &c.truth));
        ensure!(got == c.expected, "{}: action_match = {got}", c.name);
    }

    // Counting oracle straight from the hand labels.
    let correct = scored.iter().filter(|c| c.expected).count();
    let touch: Vec<&&Case> = scored.iter().filter(|c| c.truth.kind == Some(ActionKind::Touch)).collect();
    let touch_correct = touch.iter().filter(|c| c.expected).count();
    ensure!((correct, touch.len(), touch_correct) == (16, 12, 11), "fixture counts {correct}/20, {touch_correct}/{}", touch.len());

    let preds: Vec<Option<Action>> = cases.iter().map(|c| c.predicted.clone()).collect();
    let truths: Vec<TruthStep> = cases.iter().map(|c| c.truth.clone()).collect();
    let report = accuracy(&preds, &truths).map_err(|e| e.to_string())?;
    ensure!(report.accuracy_all == Some(correct as f64 / 20.0), "accuracy_all {:?}", report.accuracy_all);
    ensure!(report.accuracy_all == Some(0.80), "accuracy_all {:?} is not 0.80", report.accuracy_all);
    ensure!(report.accuracy_touch == Some(11.0 / 12.0), "accuracy_touch {:?}", report.accuracy_touch);

    let f1 = transition_f1(&[2.3, 9.0], &[2.0, 6.0], 1.0);
    ensure!(
        (f1.true_positives, f1.false_positives, f1.false_negatives) == (1, 1, 1) && f1.f1 == 0.5,
        "worked example gave {f1:?}"
    );

    let typing = [
        ("hello world", "hello", true),
        ("hello", "hello world", true),
        ("  hello ", "hello", true),
        ("wifi password", "wifi password", true),
        ("Hello", "hello", false),
        ("home", "office", false),
        ("", "", true),
        ("", "hello", false),
    ];
    for (pred, truth, want) in typing {
        ensure!(typing_matches(pred, truth) == want, "typing {pred:?} vs {truth:?} should be {want}");
        ensure!(typing_matches(truth, pred) == want, "typing rule is not symmetric for {pred:?}, {truth:?}");
    }
    Ok(format!(
        "accuracy_all {:.2}, accuracy_touch {}/{}, worked F1 0.5, {} typing cases",
        report.accuracy_all.unwrap_or(f64::NAN),
        report.touch_correct,
        report.touch_scored,
        typing.len()
    ))
}
