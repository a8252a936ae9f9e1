use std::collections::BTreeMap;
use std::path::PathBuf;

use navmine::eval::transition_f1;
use navmine::text::char_len;
use navmine::transition::{change_ratio, detect_transitions, filter_tokens, OcrFrame, TransitionParams};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::{ensure, Outcome};

#[derive(Deserialize)]
struct Truth {
    transitions: Vec<f64>,
    features: Vec<String>,
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/transition_corpus")
}

fn load(id: &str) -> Result<Vec<OcrFrame>, String> {
    let text = std::fs::read_to_string(corpus_dir().join(format!("{id}.jsonl"))).map_err(|e| e.to_string())?;
    text.lines().map(|l| serde_json::from_str(l).map_err(|e| e.to_string())).collect()
}

/// Substitutes single characters of reliable tokens until `budget` of the
/// frame's counted characters have changed.
fn churn(frame: &mut OcrFrame, params: &TransitionParams, budget: f64, rng: &mut ChaCha8Rng) {
    let counted = filter_tokens(&frame.tokens, params.min_confidence, params.top_exclusion, params.bottom_exclusion);
    let total: usize = counted.iter().map(|t| char_len(&t.text)).sum();
    let edits = (total as f64 * budget).floor() as usize;
    let eligible: Vec<usize> = (0..frame.tokens.len())
        .filter(|&i| counted.iter().any(|c| c.bbox == frame.tokens[i].bbox))
        .collect();
    for _ in 0..edits {
        let Some(&i) = eligible.get(rng.random_range(0..eligible.len().max(1))) else { return };
        let mut chars: Vec<char> = frame.tokens[i].text.chars().collect();
        let at = rng.random_range(0..chars.len());
        if chars[at].is_alphabetic() {
            chars[at] = if chars[at] == 'q' { 'z' } else { 'q' };
        }
        frame.tokens[i].text = chars.into_iter().collect();
    }
}

pub fn check() -> Outcome {
    let truth: BTreeMap<String, Truth> = serde_json::from_str(
        &std::fs::read_to_string(corpus_dir().join("truth.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure!(truth.len() >= 10, "corpus has only {} videos", truth.len());
    for feature in ["theme_inversion", "sub_threshold_noise", "loading_frame"] {
        ensure!(truth.values().any(|t| t.features.iter().any(|f| f == feature)), "no video exercises {feature}");
    }

    let params = TransitionParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut max_churn = 0.0f64;
    for (id, t) in &truth {
        let stream = load(id)?;
        let report = detect_transitions(&stream, &params).map_err(|e| e.to_string())?;
        let predicted: Vec<f64> = report.events.iter().map(|e| e.timestamp_s).collect();
        let f1 = transition_f1(&predicted, &t.transitions, 0.5);
        tp += f1.true_positives;
        fp += f1.false_positives;
        fn_ += f1.false_negatives;
        ensure!(f1.f1 == 1.0, "{id}: f1 {} (predicted {predicted:?}, truth {:?})", f1.f1, t.transitions);
        if t.features.iter().any(|f| f == "theme_inversion") {
            ensure!(!report.dropped.is_empty(), "{id}: the theme inversion never became a candidate");
        }

        // Churn below the threshold must not add events.
        let mut noisy = stream.clone();
        for f in noisy.iter_mut() {
            if rng.random_bool(0.5) {
                churn(f, &params, 0.08, &mut rng);
            }
        }
        let clean: Vec<Vec<_>> = stream
            .iter()
            .map(|f| filter_tokens(&f.tokens, params.min_confidence, params.top_exclusion, params.bottom_exclusion))
            .collect();
        let dirty: Vec<Vec<_>> = noisy
            .iter()
            .map(|f| filter_tokens(&f.tokens, params.min_confidence, params.top_exclusion, params.bottom_exclusion))
            .collect();
        for i in 1..stream.len() {
            let base = change_ratio(&clean[i - 1], &clean[i], params.location_tolerance);
            if base <= params.threshold {
                let r = change_ratio(&dirty[i - 1], &dirty[i], params.location_tolerance);
                max_churn = max_churn.max(r);
                ensure!(r < 0.2, "{id}: injected churn at frame {i} reached {r}");
            }
        }
        let after = detect_transitions(&noisy, &params).map_err(|e| e.to_string())?;
        let noisy_ts: Vec<f64> = after.events.iter().map(|e| e.timestamp_s).collect();
        ensure!(noisy_ts == predicted, "{id}: churn changed events {predicted:?} -> {noisy_ts:?}");
    }
    Ok(format!(
        "{} videos, tp={tp} fp={fp} fn={fn_} at 0.5 s; churn up to {:.0}% added no events",
        truth.len(),
        max_churn * 100.0
    ))
}
