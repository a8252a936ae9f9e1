use navmine::corpus::{
    apply_all, coverage, decontaminate, device_rule, hand_occlusion_rule, phone_presence_rule, scene_count_rule,
    DeviceLabel, DeviceVote, FilterParams, FilterRule, Interval, OsLabel, TitleEntry, VideoSignals,
};

use crate::{ensure, Outcome};

fn iv(start: f64, end: f64) -> Interval {
    Interval { start, end }
}

fn vote(os: OsLabel, device: DeviceLabel) -> DeviceVote {
    DeviceVote { os, device }
}

fn signals(phone: Vec<Interval>, hands: Vec<Interval>, votes: Vec<DeviceVote>, scenes: usize) -> VideoSignals {
    VideoSignals {
        video_id: "v".into(),
        duration_s: 120.0,
        phone_presence: phone,
        hand_presence: hands,
        title: "how to turn on dark mode".into(),
        scene_count: scenes,
        device_votes: votes,
    }
}

fn ios_phone() -> Vec<DeviceVote> {
    vec![vote(OsLabel::Ios, DeviceLabel::Phone); 5]
}

/// Longest common substring by trying every pair of start positions.
fn longest_common_run(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut best = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut k = 0;
            while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                k += 1;
            }
            best = best.max(k);
        }
    }
    best
}

fn entry(id: &str, title: String) -> TitleEntry {
    TitleEntry { id: id.into(), title }
}

pub fn check() -> Outcome {
    let p = FilterParams::default();

    // Phone coverage.
    let exact = signals(vec![iv(10.0, 25.0), iv(25.0, 40.0)], vec![], ios_phone(), 10);
    ensure!(coverage(&exact.phone_presence) == 30.0, "abutting intervals do not sum to 30 s");
    ensure!(phone_presence_rule(&exact, &p), "coverage of exactly 30 s should pass");
    let short = signals(vec![iv(10.0, 39.999)], vec![], ios_phone(), 10);
    ensure!(!phone_presence_rule(&short, &p), "coverage just under 30 s should fail");
    ensure!(coverage(&[iv(0.0, 15.0), iv(15.0, 16.0)]) == 16.0, "abutting [0,15],[15,16] should cover 16 s");

    // Hands over the screen.
    let touching = signals(vec![iv(0.0, 40.0)], vec![iv(40.0, 50.0)], ios_phone(), 10);
    ensure!(hand_occlusion_rule(&touching), "touching endpoints should pass");
    let overlapping = signals(vec![iv(0.0, 40.0)], vec![iv(39.5, 50.0)], ios_phone(), 10);
    ensure!(!hand_occlusion_rule(&overlapping), "a 0.5 s overlap should fail");

    // Device votes.
    let mut four_one = vec![vote(OsLabel::Ios, DeviceLabel::Phone); 4];
    four_one.push(vote(OsLabel::None, DeviceLabel::None));
    let d = device_rule(&signals(vec![], vec![], four_one, 1), &p).map_err(|e| e.to_string())?;
    ensure!(d.pass && d.os == Some(OsLabel::Ios) && d.device == Some(DeviceLabel::Phone), "4-1 vote gave {d:?}");
    let tablet = vec![vote(OsLabel::Android, DeviceLabel::TabletPad); 5];
    ensure!(!device_rule(&signals(vec![], vec![], tablet, 1), &p).map_err(|e| e.to_string())?.pass, "tablets must fail");
    let tie = vec![
        vote(OsLabel::Ios, DeviceLabel::Phone),
        vote(OsLabel::Ios, DeviceLabel::Phone),
        vote(OsLabel::Android, DeviceLabel::Phone),
        vote(OsLabel::Android, DeviceLabel::Phone),
        vote(OsLabel::None, DeviceLabel::Phone),
    ];
    let d = device_rule(&signals(vec![], vec![], tie, 1), &p).map_err(|e| e.to_string())?;
    ensure!(!d.pass && d.os.is_none(), "2-2-1 split gave {d:?}");

    // Scene count.
    ensure!(scene_count_rule(55, &p) && !scene_count_rule(56, &p) && scene_count_rule(1, &p), "scene count boundary");

    // Title overlap.
    let shared29 = "abcdefghijklmnopqrstuvwxyz012";
    let shared30 = "abcdefghijklmnopqrstuvwxyz0123";
    let protected29 = entry("eval", format!("1111{shared29}2222"));
    let candidate29 = entry("cand", format!("3333{shared29}4444"));
    let protected30 = entry("eval", format!("1111{shared30}2222"));
    let candidate30 = entry("cand", format!("3333{shared30}4444"));
    ensure!(longest_common_run(&protected29.title, &candidate29.title) == 29, "29-char construction is off");
    ensure!(longest_common_run(&protected30.title, &candidate30.title) == 30, "30-char construction is off");
    ensure!(decontaminate(std::slice::from_ref(&candidate29), &[protected29], 30).is_empty(), "29-char overlap was flagged");
    ensure!(decontaminate(std::slice::from_ref(&candidate30), &[protected30], 30) == vec!["cand"], "30-char overlap was not flagged");
    ensure!(decontaminate(&[candidate30], &[], 30).is_empty(), "empty protected list flagged a title");

    // Every failing rule is reported.
    let both = signals(vec![iv(0.0, 10.0)], vec![iv(5.0, 6.0)], ios_phone(), 10);
    let verdict = apply_all(&both, &p, None);
    ensure!(
        !verdict.admitted && verdict.failed_rules == vec![FilterRule::PhonePresence, FilterRule::HandOcclusion],
        "expected both rules, got {:?}",
        verdict.failed_rules
    );
    ensure!(apply_all(&exact, &p, None).admitted, "clean signals were not admitted");
    Ok("30 s, 55/56 scenes, 29/30-char overlaps and 2-2-1 ties decided correctly".into())
}
