//! Scoring against annotated ground truth: transition F1, element hit
//! ratio and action accuracy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{Action, ActionKind, HardwareVariant, MultiTouchVariant, ScrollDirection, ZoomDirection};
use crate::elements::{hit_test, SomLayout};
use crate::geometry::BBox;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no frame has a touch or long-press ground truth")]
    NoEligibleFrames,
    #[error("{predicted} predicted steps against {truth} ground-truth steps")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("ground-truth step {index}: {reason}")]
    InvalidTruth { index: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// One-to-one matching of predicted to true timestamps: candidate pairs within
/// `tol_s` are taken in order of increasing time difference (ties by
/// prediction index, then truth index).
pub fn match_timestamps(predicted: &[f64], truth: &[f64], tol_s: f64) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in predicted.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let d = (p - t).abs();
            if d <= tol_s {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut p_used = vec![false; predicted.len()];
    let mut t_used = vec![false; truth.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !p_used[i] && !t_used[j] {
            p_used[i] = true;
            t_used[j] = true;
            out.push((i, j));
        }
    }
    out.sort();
    out
}

pub fn transition_f1(predicted: &[f64], truth: &[f64], tol_s: f64) -> F1Report {
    let tp = match_timestamps(predicted, truth, tol_s).len();
    let fp = predicted.len() - tp;
    let fn_ = truth.len() - tp;
    let precision = if predicted.is_empty() { if truth.is_empty() { 1.0 } else { 0.0 } } else { tp as f64 / predicted.len() as f64 };
    let recall = if truth.is_empty() { if predicted.is_empty() { 1.0 } else { 0.0 } } else { tp as f64 / truth.len() as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    F1Report { precision, recall, f1, true_positives: tp, false_positives: fp, false_negatives: fn_ }
}

/// One annotated step. `kind` may be omitted on skip-flagged steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ActionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Direction or variant for scroll, zoom, multi_touch and hardware.
    #[serde(default, alias = "direction", skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default)]
    pub ambiguous: bool,
    #[serde(default)]
    pub end_of_video: bool,
}

impl TruthStep {
    pub fn skipped(&self) -> bool {
        self.ambiguous || self.end_of_video
    }

    fn check(&self, index: usize) -> Result<(), EvalError> {
        if self.skipped() {
            return Ok(());
        }
        let bad = |reason: &str| Err(EvalError::InvalidTruth { index, reason: reason.into() });
        let Some(kind) = self.kind else { return bad("missing kind") };
        let variant_ok = |v: &serde_json::Value| match kind {
            ActionKind::Scroll => serde_json::from_value::<ScrollDirection>(v.clone()).is_ok(),
            ActionKind::Zoom => serde_json::from_value::<ZoomDirection>(v.clone()).is_ok(),
            ActionKind::MultiTouch => serde_json::from_value::<MultiTouchVariant>(v.clone()).is_ok(),
            ActionKind::Hardware => serde_json::from_value::<HardwareVariant>(v.clone()).is_ok(),
            _ => true,
        };
        match kind {
            ActionKind::Touch | ActionKind::LongPress if self.region.is_none() => bad("touch without region"),
            ActionKind::Typing if self.text.as_deref().is_none_or(|t| t.trim().is_empty()) => bad("typing without text"),
            ActionKind::Scroll | ActionKind::Zoom | ActionKind::MultiTouch | ActionKind::Hardware => match &self.variant {
                Some(v) if variant_ok(&serde_json::Value::String(v.clone())) => Ok(()),
                Some(v) => bad(&format!("unknown variant {v:?}")),
                None => bad("missing variant"),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub video_id: String,
    #[serde(default)]
    pub transitions: Vec<f64>,
    #[serde(default)]
    pub steps: Vec<TruthStep>,
}

impl GroundTruth {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.transitions.windows(2).any(|w| w[0] > w[1]) {
            return Err(EvalError::InvalidTruth { index: 0, reason: "transitions not sorted".into() });
        }
        self.steps.iter().enumerate().try_for_each(|(i, s)| s.check(i))
    }
}

fn variant_str(a: &Action) -> Option<String> {
    let v = match a {
        Action::Scroll { direction } => serde_json::to_value(direction),
        Action::Zoom { direction } => serde_json::to_value(direction),
        Action::MultiTouch { variant } => serde_json::to_value(variant),
        Action::Hardware { variant } => serde_json::to_value(variant),
        _ => return None,
    };
    v.ok()?.as_str().map(str::to_string)
}

/// Typed texts match when equal after trimming or when one contains the other.
pub fn typing_matches(pred: &str, truth: &str) -> bool {
    let (p, t) = (pred.trim(), truth.trim());
    if p.is_empty() || t.is_empty() {
        return p == t;
    }
    p == t || p.contains(t) || t.contains(p)
}

pub fn action_match(pred: &Action, truth: &TruthStep) -> bool {
    if truth.kind != Some(pred.kind()) {
        return false;
    }
    match pred {
        Action::Touch { point, .. } | Action::LongPress { point, .. } => truth.region.is_some_and(|r| r.contains(*point)),
        Action::Typing { text } => truth.text.as_deref().is_some_and(|t| typing_matches(text, t)),
        _ => variant_str(pred).is_some() && variant_str(pred) == truth.variant,
    }
}

/// Share of touch and long-press steps whose layout has an element centered
/// inside the annotated region. Other and skip-flagged steps are ignored.
pub fn hit_ratio(cases: &[(&SomLayout, &TruthStep)]) -> Result<f64, EvalError> {
    let eligible: Vec<_> = cases
        .iter()
        .filter(|(_, t)| !t.skipped() && t.kind.is_some_and(ActionKind::is_pointer))
        .filter_map(|(l, t)| t.region.map(|r| (*l, r)))
        .collect();
    if eligible.is_empty() {
        return Err(EvalError::NoEligibleFrames);
    }
    let hits = eligible.iter().filter(|(l, r)| hit_test(l, r)).count();
    Ok(hits as f64 / eligible.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_kind: Option<ActionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_kind: Option<ActionKind>,
    pub skipped: bool,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub scored: usize,
    pub correct: usize,
    pub touch_scored: usize,
    pub touch_correct: usize,
    /// `None` when every step was skipped.
    pub accuracy_all: Option<f64>,
    /// `None` when no scored step is a touch.
    pub accuracy_touch: Option<f64>,
    pub cases: Vec<CaseVerdict>,
}

/// Scores predictions step by step. Predictions align with the truth list by
/// index, or with its non-skipped steps when exactly that many are given. A
/// missing prediction counts as wrong.
pub fn accuracy(preds: &[Option<Action>], truths: &[TruthStep]) -> Result<AccuracyReport, EvalError> {
    let scored_idx: Vec<usize> = (0..truths.len()).filter(|&i| !truths[i].skipped()).collect();
    let aligned: Vec<Option<&Action>> = if preds.len() == truths.len() {
        preds.iter().map(Option::as_ref).collect()
    } else if preds.len() == scored_idx.len() {
        let mut v = vec![None; truths.len()];
        for (p, &i) in preds.iter().zip(&scored_idx) {
            v[i] = p.as_ref();
        }
        v
    } else {
        return Err(EvalError::LengthMismatch { predicted: preds.len(), truth: truths.len() });
    };

    let mut cases = Vec::with_capacity(truths.len());
    let (mut scored, mut correct, mut touch_scored, mut touch_correct) = (0, 0, 0, 0);
    for (i, (truth, pred)) in truths.iter().zip(&aligned).enumerate() {
        let skipped = truth.skipped();
        let ok = !skipped && pred.is_some_and(|p| action_match(p, truth));
        if !skipped {
            scored += 1;
            correct += usize::from(ok);
            if truth.kind == Some(ActionKind::Touch) {
                touch_scored += 1;
                touch_correct += usize::from(ok);
            }
        }
        cases.push(CaseVerdict { step: i, truth_kind: truth.kind, predicted_kind: pred.map(Action::kind), skipped, correct: ok });
    }
    let frac = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    Ok(AccuracyReport {
        scored,
        correct,
        touch_scored,
        touch_correct,
        accuracy_all: frac(correct, scored),
        accuracy_touch: frac(touch_correct, touch_scored),
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub video_id: String,
    pub transition: F1Report,
    /// `None` when no step has a pointer ground truth.
    pub hit_ratio: Option<f64>,
    pub accuracy: AccuracyReport,
}

/// Scores one video's predicted transitions, layouts and actions. Layouts and
/// actions are aligned with the ground-truth steps by index.
pub fn evaluate_video(
    truth: &GroundTruth,
    predicted_transitions: &[f64],
    layouts: &[&SomLayout],
    actions: &[Option<Action>],
    tol_s: f64,
) -> Result<EvalReport, EvalError> {
    truth.validate()?;
    let transition = transition_f1(predicted_transitions, &truth.transitions, tol_s);
    let cases: Vec<(&SomLayout, &TruthStep)> = layouts.iter().copied().zip(truth.steps.iter()).collect();
    let hit_ratio = match hit_ratio(&cases) {
        Ok(h) => Some(h),
        Err(EvalError::NoEligibleFrames) => None,
        Err(e) => return Err(e),
    };
    let accuracy = accuracy(actions, &truth.steps)?;
    Ok(EvalReport { video_id: truth.video_id.clone(), transition, hit_ratio, accuracy })
}
