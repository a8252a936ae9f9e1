//! Video-level admission rules over precomputed detector signals.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("{video}: expected {expected} device votes, got {got}")]
    MissingVotes { video: String, expected: usize, got: usize },
    #[error("{video}: interval [{start}, {end}) outside [0, {duration}]")]
    BadInterval { video: String, start: f64, end: f64, duration: f64 },
    #[error("unknown {kind} label {label:?}")]
    UnknownLabel { kind: &'static str, label: String },
}

/// Half-open time interval `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        (self.end - self.start).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Sorted, disjoint union of the non-empty intervals. Abutting intervals fuse.
pub fn merge_intervals(intervals: &[Interval]) -> Vec<Interval> {
    let mut v: Vec<Interval> = intervals.iter().copied().filter(|i| !i.is_empty()).collect();
    v.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for i in v {
        match out.last_mut() {
            Some(last) if i.start <= last.end => last.end = last.end.max(i.end),
            _ => out.push(i),
        }
    }
    out
}

pub fn coverage(intervals: &[Interval]) -> f64 {
    merge_intervals(intervals).iter().map(Interval::len).sum()
}

fn label_key(s: &str) -> String {
    let mut out = String::new();
    for c in s.trim().chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

macro_rules! label_enum {
    ($name:ident, $kind:literal, { $($variant:ident => $key:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $key),+ }
            }
        }

        impl TryFrom<String> for $name {
            type Error = CorpusError;
            /// Accepts the canonical key or the classifier's display form,
            /// e.g. `Tablet/Pad` or `BlackBerry OS`.
            fn try_from(s: String) -> Result<Self, Self::Error> {
                match label_key(&s).as_str() {
                    $($key => Ok($name::$variant),)+
                    _ => Err(CorpusError::UnknownLabel { kind: $kind, label: s }),
                }
            }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String {
                v.as_str().to_string()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

label_enum!(OsLabel, "os", {
    Ios => "ios",
    Android => "android",
    WindowsMobile => "windows_mobile",
    BlackberryOs => "blackberry_os",
    MultipleOs => "multiple_os",
    None => "none",
});

label_enum!(DeviceLabel, "device", {
    Phone => "phone",
    TabletPad => "tablet_pad",
    Watch => "watch",
    Laptop => "laptop",
    MultiDevice => "multi_device",
    None => "none",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceVote {
    pub os: OsLabel,
    pub device: DeviceLabel,
}

/// One line of the signals file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSignals {
    pub video_id: String,
    pub duration_s: f64,
    #[serde(default)]
    pub phone_presence: Vec<Interval>,
    #[serde(default)]
    pub hand_presence: Vec<Interval>,
    #[serde(default)]
    pub title: String,
    pub scene_count: usize,
    #[serde(default)]
    pub device_votes: Vec<DeviceVote>,
}

impl VideoSignals {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for i in self.phone_presence.iter().chain(&self.hand_presence) {
            let ok = i.start.is_finite() && i.end.is_finite() && 0.0 <= i.start && i.start <= i.end && i.end <= self.duration_s;
            if !ok {
                return Err(CorpusError::BadInterval {
                    video: self.video_id.clone(),
                    start: i.start,
                    end: i.end,
                    duration: self.duration_s,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterParams {
    pub min_phone_coverage_s: f64,
    pub device_votes: usize,
    pub max_scenes: usize,
    pub overlap_chars: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { min_phone_coverage_s: 30.0, device_votes: 5, max_scenes: 55, overlap_chars: 30 }
    }
}

/// Rules in the order they are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    /// Signals failed validation; reported first and alone.
    InvalidSignals,
    PhonePresence,
    HandOcclusion,
    Device,
    SceneCount,
    Contamination,
}

impl FilterRule {
    pub const STAGES: [FilterRule; 5] =
        [FilterRule::PhonePresence, FilterRule::HandOcclusion, FilterRule::Device, FilterRule::SceneCount, FilterRule::Contamination];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub video_id: String,
    pub admitted: bool,
    pub failed_rules: Vec<FilterRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub os: Option<OsLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceLabel>,
}

/// Timestamps at the midpoints of `k` equal slices of the video.
pub fn sample_equidistant(duration_s: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| duration_s * (i as f64 + 0.5) / k as f64).collect()
}

pub fn phone_presence_rule(s: &VideoSignals, params: &FilterParams) -> bool {
    coverage(&s.phone_presence) >= params.min_phone_coverage_s
}

/// Passes when no hand interval overlaps a phone interval.
pub fn hand_occlusion_rule(s: &VideoSignals) -> bool {
    !s.hand_presence.iter().any(|h| s.phone_presence.iter().any(|p| h.overlaps(p)))
}

/// Label with strictly more votes than any other, if there is one.
fn plurality<T: Copy + Eq + std::hash::Hash + Ord>(votes: impl Iterator<Item = T>) -> Option<T> {
    let mut counts: HashMap<T, usize> = HashMap::new();
    for v in votes {
        *counts.entry(v).or_default() += 1;
    }
    let best = *counts.values().max()?;
    let mut top: Vec<T> = counts.into_iter().filter(|(_, c)| *c == best).map(|(k, _)| k).collect();
    top.sort();
    (top.len() == 1).then(|| top[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceDecision {
    pub pass: bool,
    pub os: Option<OsLabel>,
    pub device: Option<DeviceLabel>,
}

/// Per-dimension plurality vote. A tie leaves that dimension unresolved,
/// which fails the rule.
pub fn device_rule(s: &VideoSignals, params: &FilterParams) -> Result<DeviceDecision, CorpusError> {
    if s.device_votes.len() != params.device_votes {
        return Err(CorpusError::MissingVotes { video: s.video_id.clone(), expected: params.device_votes, got: s.device_votes.len() });
    }
    let os = plurality(s.device_votes.iter().map(|v| v.os));
    let device = plurality(s.device_votes.iter().map(|v| v.device));
    let pass = matches!(os, Some(OsLabel::Ios | OsLabel::Android)) && device == Some(DeviceLabel::Phone);
    Ok(DeviceDecision { pass, os, device })
}

pub fn scene_count_rule(scene_count: usize, params: &FilterParams) -> bool {
    scene_count <= params.max_scenes
}

/// Casefolds and collapses whitespace.
pub fn normalize_title(title: &str) -> String {
    title.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitleEntry {
    pub id: String,
    pub title: String,
}

const HASH_BASE: u64 = 1_000_003;

fn window_hashes(chars: &[char], n: usize) -> Vec<u64> {
    if n == 0 || chars.len() < n {
        return Vec::new();
    }
    let pow = (1..n).fold(1u64, |p, _| p.wrapping_mul(HASH_BASE));
    let mut h = 0u64;
    for &c in &chars[..n] {
        h = h.wrapping_mul(HASH_BASE).wrapping_add(c as u64);
    }
    let mut out = Vec::with_capacity(chars.len() - n + 1);
    out.push(h);
    for i in n..chars.len() {
        h = h.wrapping_sub((chars[i - n] as u64).wrapping_mul(pow));
        h = h.wrapping_mul(HASH_BASE).wrapping_add(chars[i] as u64);
        out.push(h);
    }
    out
}

/// Every length-`n` window of the protected titles, keyed by rolling hash.
/// Hash hits are confirmed by comparing characters.
pub struct ContaminationIndex {
    n: usize,
    titles: Vec<(String, Vec<char>)>,
    windows: HashMap<u64, Vec<(usize, usize)>>,
}

impl ContaminationIndex {
    pub fn new(protected: &[TitleEntry], n: usize) -> Self {
        let titles: Vec<(String, Vec<char>)> =
            protected.iter().map(|t| (t.id.clone(), normalize_title(&t.title).chars().collect())).collect();
        let mut windows: HashMap<u64, Vec<(usize, usize)>> = HashMap::new();
        for (ti, (_, chars)) in titles.iter().enumerate() {
            for (pos, h) in window_hashes(chars, n).into_iter().enumerate() {
                windows.entry(h).or_default().push((ti, pos));
            }
        }
        Self { n, titles, windows }
    }

    /// Whether `title` shares a run of at least `n` characters with a
    /// protected title other than the one carrying `id`.
    pub fn is_contaminated(&self, id: &str, title: &str) -> bool {
        let chars: Vec<char> = normalize_title(title).chars().collect();
        window_hashes(&chars, self.n).into_iter().enumerate().any(|(pos, h)| {
            self.windows.get(&h).is_some_and(|hits| {
                hits.iter().any(|&(ti, tpos)| {
                    let (pid, pchars) = &self.titles[ti];
                    pid != id && pchars[tpos..tpos + self.n] == chars[pos..pos + self.n]
                })
            })
        })
    }
}

/// Ids of candidates sharing a run of `n` or more characters with any
/// protected title, in candidate order.
pub fn decontaminate(candidates: &[TitleEntry], protected: &[TitleEntry], n: usize) -> Vec<String> {
    let index = ContaminationIndex::new(protected, n);
    candidates.iter().filter(|c| index.is_contaminated(&c.id, &c.title)).map(|c| c.id.clone()).collect()
}

/// Runs every rule without stopping at the first failure.
pub fn apply_all(s: &VideoSignals, params: &FilterParams, protected: Option<&ContaminationIndex>) -> FilterVerdict {
    let mut failed = Vec::new();
    let mut os = None;
    let mut device = None;
    if s.validate().is_err() {
        failed.push(FilterRule::InvalidSignals);
    } else {
        if !phone_presence_rule(s, params) {
            failed.push(FilterRule::PhonePresence);
        }
        if !hand_occlusion_rule(s) {
            failed.push(FilterRule::HandOcclusion);
        }
        match device_rule(s, params) {
            Ok(d) => {
                os = d.os;
                device = d.device;
                if !d.pass {
                    failed.push(FilterRule::Device);
                }
            }
            Err(_) => failed.push(FilterRule::Device),
        }
        if !scene_count_rule(s.scene_count, params) {
            failed.push(FilterRule::SceneCount);
        }
        if protected.is_some_and(|idx| idx.is_contaminated(&s.video_id, &s.title)) {
            failed.push(FilterRule::Contamination);
        }
    }
    FilterVerdict { video_id: s.video_id.clone(), admitted: failed.is_empty(), failed_rules: failed, os, device }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunnelStage {
    pub rule: FilterRule,
    /// Videos still admitted after this stage.
    pub remaining: usize,
    /// Share of the previous stage's survivors kept, in percent.
    pub retained_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunnelReport {
    pub total: usize,
    pub invalid: usize,
    pub stages: Vec<FunnelStage>,
    pub admitted: usize,
}

/// Stage-by-stage retention, as if rules were applied in sequence.
pub fn funnel(verdicts: &[FilterVerdict]) -> FunnelReport {
    let invalid = verdicts.iter().filter(|v| v.failed_rules.contains(&FilterRule::InvalidSignals)).count();
    let mut alive: Vec<&FilterVerdict> =
        verdicts.iter().filter(|v| !v.failed_rules.contains(&FilterRule::InvalidSignals)).collect();
    let mut stages = Vec::new();
    for rule in FilterRule::STAGES {
        let before = alive.len();
        alive.retain(|v| !v.failed_rules.contains(&rule));
        let pct = if before == 0 { 0.0 } else { (alive.len() as f64 * 10000.0 / before as f64).round() / 100.0 };
        stages.push(FunnelStage { rule, remaining: alive.len(), retained_pct: pct });
    }
    FunnelReport { total: verdicts.len(), invalid, stages, admitted: alive.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval { start: a, end: b }
    }

    fn vote(os: OsLabel, device: DeviceLabel) -> DeviceVote {
        DeviceVote { os, device }
    }

    fn signals() -> VideoSignals {
        VideoSignals {
            video_id: "v1".into(),
            duration_s: 120.0,
            phone_presence: vec![iv(0.0, 45.0)],
            hand_presence: vec![],
            title: "How to turn on wifi".into(),
            scene_count: 8,
            device_votes: vec![vote(OsLabel::Ios, DeviceLabel::Phone); 5],
        }
    }

    #[test]
    fn equidistant_examples() {
        assert_eq!(sample_equidistant(10.0, 5), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
        assert_eq!(sample_equidistant(7.0, 1), vec![3.5]);
    }

    #[test]
    fn phone_presence_examples() {
        let p = FilterParams::default();
        let mut s = signals();
        assert!(phone_presence_rule(&s, &p));
        s.phone_presence = vec![iv(0.0, 10.0)];
        assert!(!phone_presence_rule(&s, &p));
        s.phone_presence = vec![iv(0.0, 15.0), iv(15.0, 16.0)];
        assert_eq!(coverage(&s.phone_presence), 16.0);
        s.phone_presence = vec![iv(0.0, 20.0), iv(10.0, 30.0)];
        assert!(phone_presence_rule(&s, &p));
    }

    #[test]
    fn hand_occlusion_examples() {
        let mut s = signals();
        s.phone_presence = vec![iv(10.0, 20.0)];
        s.hand_presence = vec![iv(0.0, 5.0), iv(25.0, 30.0)];
        assert!(hand_occlusion_rule(&s));
        s.hand_presence = vec![iv(19.5, 25.0)];
        assert!(!hand_occlusion_rule(&s));
        s.hand_presence = vec![iv(20.0, 25.0), iv(0.0, 10.0)];
        assert!(hand_occlusion_rule(&s));
    }

    #[test]
    fn device_examples() {
        let p = FilterParams::default();
        let mut s = signals();
        s.device_votes = vec![vote(OsLabel::Ios, DeviceLabel::Phone); 4];
        s.device_votes.push(vote(OsLabel::None, DeviceLabel::None));
        let d = device_rule(&s, &p).unwrap();
        assert!(d.pass);
        assert_eq!((d.os, d.device), (Some(OsLabel::Ios), Some(DeviceLabel::Phone)));

        s.device_votes = vec![vote(OsLabel::Android, DeviceLabel::TabletPad); 5];
        assert!(!device_rule(&s, &p).unwrap().pass);

        s.device_votes = vec![
            vote(OsLabel::Ios, DeviceLabel::Phone),
            vote(OsLabel::Ios, DeviceLabel::Phone),
            vote(OsLabel::Android, DeviceLabel::Phone),
            vote(OsLabel::Android, DeviceLabel::Phone),
            vote(OsLabel::None, DeviceLabel::Phone),
        ];
        let d = device_rule(&s, &p).unwrap();
        assert!(!d.pass);
        assert_eq!(d.os, None);

        s.device_votes.pop();
        assert!(matches!(device_rule(&s, &p), Err(CorpusError::MissingVotes { got: 4, .. })));
    }

    #[test]
    fn labels_accept_display_forms() {
        let v: DeviceVote = serde_json::from_str(r#"{"os":"BlackBerry OS","device":"Tablet/Pad"}"#).unwrap();
        assert_eq!(v, vote(OsLabel::BlackberryOs, DeviceLabel::TabletPad));
        let v: DeviceVote = serde_json::from_str(r#"{"os":"iOS","device":"Multi-device"}"#).unwrap();
        assert_eq!(v, vote(OsLabel::Ios, DeviceLabel::MultiDevice));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"os":"ios","device":"multi_device"}"#);
        assert!(serde_json::from_str::<DeviceVote>(r#"{"os":"Symbian","device":"Phone"}"#).is_err());
    }

    #[test]
    fn scene_count_examples() {
        let p = FilterParams::default();
        assert!(scene_count_rule(55, &p));
        assert!(!scene_count_rule(56, &p));
        assert!(scene_count_rule(1, &p));
    }

    fn entry(id: &str, t: &str) -> TitleEntry {
        TitleEntry { id: id.into(), title: t.into() }
    }

    #[test]
    fn decontamination_examples() {
        let forty = "how to change the wallpaper on an iphone";
        assert_eq!(forty.chars().count(), 40);
        assert_eq!(decontaminate(&[entry("c", forty)], &[entry("p", forty)], 30), vec!["c"]);

        // Exactly 29 shared characters.
        let shared = "abcdefghijklmnopqrstuvwxyz012";
        assert_eq!(shared.len(), 29);
        let cand = format!("{shared}XXXXXXXX");
        let prot = format!("YYYYYYYY{shared}");
        assert!(decontaminate(&[entry("c", &cand)], &[entry("p", &prot)], 30).is_empty());
        assert_eq!(decontaminate(&[entry("c", &cand)], &[entry("p", &prot)], 29), vec!["c"]);

        assert!(decontaminate(&[entry("c", forty)], &[], 30).is_empty());
        // Casefolding and whitespace collapse apply to both sides.
        let shouty = "HOW TO   CHANGE THE WALLPAPER ON AN IPHONE";
        assert_eq!(decontaminate(&[entry("c", shouty)], &[entry("p", forty)], 30), vec!["c"]);
        // A title never contaminates itself.
        assert!(decontaminate(&[entry("same", forty)], &[entry("same", forty)], 30).is_empty());
    }

    #[test]
    fn apply_all_lists_every_failure() {
        let p = FilterParams::default();
        assert!(apply_all(&signals(), &p, None).admitted);
        let mut s = signals();
        s.phone_presence = vec![iv(0.0, 10.0)];
        s.hand_presence = vec![iv(5.0, 6.0)];
        let v = apply_all(&s, &p, None);
        assert!(!v.admitted);
        assert_eq!(v.failed_rules, vec![FilterRule::PhonePresence, FilterRule::HandOcclusion]);

        let idx = ContaminationIndex::new(&[entry("eval", "how to turn on wifi on your iphone quickly")], 15);
        let v = apply_all(&signals(), &p, Some(&idx));
        assert_eq!(v.failed_rules, vec![FilterRule::Contamination]);

        s.phone_presence = vec![iv(100.0, 130.0)];
        assert_eq!(apply_all(&s, &p, None).failed_rules, vec![FilterRule::InvalidSignals]);
    }

    #[test]
    fn funnel_counts_sequential_survivors() {
        let p = FilterParams::default();
        let mut a = signals();
        a.video_id = "a".into();
        let mut b = signals();
        b.video_id = "b".into();
        b.phone_presence = vec![iv(0.0, 5.0)];
        let mut c = signals();
        c.video_id = "c".into();
        c.scene_count = 60;
        let mut d = signals();
        d.video_id = "d".into();
        d.hand_presence = vec![iv(1.0, 2.0)];
        let v: Vec<FilterVerdict> = [a, b, c, d].iter().map(|s| apply_all(s, &p, None)).collect();
        let f = funnel(&v);
        assert_eq!(f.total, 4);
        assert_eq!(f.stages[0].remaining, 3);
        assert_eq!(f.stages[0].retained_pct, 75.0);
        assert_eq!(f.stages[1].remaining, 2);
        assert!((f.stages[1].retained_pct - 66.67).abs() < 1e-9);
        assert_eq!(f.stages[3].remaining, 1);
        assert_eq!(f.admitted, 1);
    }

    /// Brute force: longest common substring by dynamic programming.
    fn longest_common(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut best = 0;
        let mut prev = vec![0usize; b.len() + 1];
        for i in 1..=a.len() {
            let mut cur = vec![0usize; b.len() + 1];
            for j in 1..=b.len() {
                if a[i - 1] == b[j - 1] {
                    cur[j] = prev[j - 1] + 1;
                    best = best.max(cur[j]);
                }
            }
            prev = cur;
        }
        best
    }

    proptest! {
        #[test]
        fn coverage_matches_raster(raw in proptest::collection::vec((0u32..200, 0u32..60), 0..12)) {
            // Endpoints in hundredths of a second; each cell is one hundredth.
            let ivs: Vec<Interval> = raw.iter().map(|&(s, l)| iv(s as f64 / 100.0, (s + l) as f64 / 100.0)).collect();
            let mut cells = [false; 260];
            for &(s, l) in &raw {
                for c in s..s + l {
                    cells[c as usize] = true;
                }
            }
            let raster = cells.iter().filter(|c| **c).count() as f64 / 100.0;
            prop_assert!((coverage(&ivs) - raster).abs() < 1e-9);
            let merged = merge_intervals(&ivs);
            for w in merged.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
        }

        #[test]
        fn equidistant_increasing(d in 0.1f64..3600.0, k in 1usize..20) {
            let t = sample_equidistant(d, k);
            prop_assert_eq!(t.len(), k);
            for w in t.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            prop_assert!(t[0] > 0.0 && t[k - 1] < d);
        }

        #[test]
        fn decontaminate_matches_exhaustive(a in "[ab ]{0,24}", b in "[ab ]{0,24}", n in 1usize..8) {
            let na = normalize_title(&a);
            let nb = normalize_title(&b);
            let expected = longest_common(&na, &nb) >= n;
            let flagged = !decontaminate(&[entry("c", &a)], &[entry("p", &b)], n).is_empty();
            prop_assert_eq!(flagged, expected);
            // Symmetric when the roles are swapped.
            let swapped = !decontaminate(&[entry("p", &b)], &[entry("c", &a)], n).is_empty();
            prop_assert_eq!(flagged, swapped);
        }

        #[test]
        fn verdict_ignores_interval_order(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut s = signals();
            s.phone_presence = vec![iv(0.0, 10.0), iv(12.0, 20.0), iv(30.0, 41.0), iv(50.0, 52.0)];
            s.hand_presence = vec![iv(20.0, 30.0), iv(60.0, 61.0)];
            let base = apply_all(&s, &FilterParams::default(), None);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            s.phone_presence.shuffle(&mut rng);
            s.hand_presence.shuffle(&mut rng);
            prop_assert_eq!(apply_all(&s, &FilterParams::default(), None), base);
        }
    }
}
