use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrationSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub text: String,
}

/// Transcript text overlapping `[start - pad_s, end + pad_s]`, joined with
/// single spaces in time order.
pub fn narration_window(transcript: &[NarrationSegment], interval: (f64, f64), pad_s: f64) -> String {
    let lo = interval.0 - pad_s;
    let hi = interval.1 + pad_s;
    let mut hits: Vec<&NarrationSegment> = transcript.iter().filter(|s| s.start_s <= hi && s.end_s >= lo).collect();
    hits.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.end_s.total_cmp(&b.end_s)));
    hits.iter()
        .map(|s| s.text.trim())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}
