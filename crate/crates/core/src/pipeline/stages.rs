use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{
    files, read_json, read_jsonl, read_jsonl_optional, require, write_atomic, write_json, write_jsonl, write_png, PipelineError,
    Result, ScreenDetectionLine, VideoMeta,
};
use crate::action::{run_episode, Backend, Episode, EpisodeInputs, EpisodeMetadata, NarrationSegment, PromptSet, SceneImages};
use crate::config::PipelineConfig;
use crate::corpus::{apply_all, funnel, ContaminationIndex, FilterVerdict, FunnelReport, TitleEntry, VideoSignals};
use crate::dataset::{dataset_stats, export_training_pairs, serialize_episode, DatasetManifest, DatasetStats, Split, TrainingPair};
use crate::elements::{assign_labels, build_elements, DetectionFrame, SomLayout};
use crate::eval::{evaluate_video, hit_ratio, EvalReport, F1Report, GroundTruth, TruthStep};
use crate::render::render_som;
use crate::track::{build_track, crop_to_screen, DetectionSource, FrameRef, ScreenDetection, ScreenTrack};
use crate::transition::{detect_transitions, segment_scenes, stream_span, OcrFrame, Scene, TransitionReport};

fn video_name(dir: &Path) -> String {
    dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string())
}

fn scene_png(dir: &Path, sub: &str, i: usize) -> PathBuf {
    dir.join(sub).join(format!("scene_{i:03}.png"))
}

/// Screen track over every listed frame.
pub fn run_track(dir: &Path, cfg: &PipelineConfig) -> Result<ScreenTrack> {
    let video = video_name(dir);
    let frames: Vec<FrameRef> = read_jsonl(&dir.join(files::FRAMES))?;
    let lines: Vec<ScreenDetectionLine> = read_jsonl(&dir.join(files::SCREEN_DETECTIONS))?;
    let by_index: HashMap<u64, &FrameRef> = frames.iter().map(|f| (f.frame_index, f)).collect();
    let detections = lines
        .iter()
        .map(|l| {
            let frame = by_index
                .get(&l.frame_index)
                .ok_or_else(|| PipelineError::stage(&video, "track", format!("detection for unlisted frame {}", l.frame_index)))?;
            Ok(ScreenDetection { frame: (*frame).clone(), bbox: l.bbox, confidence: l.confidence, source: DetectionSource::Detected })
        })
        .collect::<Result<Vec<_>>>()?;
    let track = build_track(&detections, &frames, cfg.track).map_err(|e| PipelineError::stage(&video, "track", e))?;
    if !track.gaps.is_empty() {
        warn!("{video}: {} gap(s) in the screen track", track.gaps.len());
    }
    write_json(&dir.join(files::TRACK), &track)?;
    Ok(track)
}

/// Transition events and scenes from the OCR stream.
pub fn run_scenes(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<Scene>> {
    let video = video_name(dir);
    let frames: Vec<FrameRef> = read_jsonl(&dir.join(files::FRAMES))?;
    let ocr: Vec<OcrFrame> = read_jsonl(&dir.join(files::OCR))?;
    let report = detect_transitions(&ocr, &cfg.transition).map_err(|e| PipelineError::stage(&video, "scenes", e))?;
    let span = stream_span(&frames).ok_or_else(|| PipelineError::stage(&video, "scenes", "no frames listed"))?;
    let mut scenes = segment_scenes(&report.events, span, &frames).map_err(|e| PipelineError::stage(&video, "scenes", e))?;
    let tokens: HashMap<u64, &OcrFrame> = ocr.iter().map(|f| (f.frame_index, f)).collect();
    for s in &mut scenes {
        if let Some(f) = tokens.get(&s.representative.frame_index) {
            s.tokens = f.tokens.clone();
        }
    }
    info!("{video}: {} events, {} dropped, {} scenes", report.events.len(), report.dropped.len(), scenes.len());
    write_json(&dir.join(files::TRANSITIONS), &report)?;
    write_json(&dir.join(files::SCENES), &scenes)?;
    Ok(scenes)
}

/// Screen crops, layouts and marked images for every scene.
pub fn run_elements(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<SomLayout>> {
    let video = video_name(dir);
    let scenes: Vec<Scene> = read_json(&dir.join(files::SCENES))?;
    let track: ScreenTrack = read_json(&dir.join(files::TRACK))?;
    let icons: Vec<DetectionFrame> = read_jsonl_optional(&dir.join(files::ICONS))?;
    let icons: HashMap<u64, &DetectionFrame> = icons.iter().map(|f| (f.frame_index, f)).collect();

    let mut layouts = Vec::with_capacity(scenes.len());
    for scene in &scenes {
        let rep = &scene.representative;
        let screen = track
            .entry(rep.frame_index)
            .or_else(|| track.nearest(rep.timestamp_s))
            .ok_or_else(|| PipelineError::stage(&video, "elements", "empty screen track"))?;
        let path = dir.join(&rep.image_uri);
        require(&path)?;
        let raster = image::open(&path)
            .map_err(|e| PipelineError::stage(&video, "elements", format!("{}: {e}", path.display())))?
            .to_rgb8();
        let crop = crop_to_screen(&raster, &screen.bbox).map_err(|e| PipelineError::stage(&video, "elements", e))?;
        let raw = icons.get(&rep.frame_index).map(|f| f.detections.as_slice()).unwrap_or(&[]);
        let elements = build_elements(raw, &scene.tokens, Some(&crop), &cfg.elements);
        let layout = assign_labels(&elements, rep.clone(), cfg.elements.row_tolerance);
        write_png(&scene_png(dir, files::CROPS, scene.scene_index), &crop)?;
        write_png(&scene_png(dir, files::SOM, scene.scene_index), &render_som(&crop, &layout))?;
        layouts.push(layout);
    }
    write_json(&dir.join(files::LAYOUTS), &layouts)?;
    Ok(layouts)
}

/// Runs the model steps and writes the episode, or its quarantined copy when
/// any step failed.
pub fn run_actions(dir: &Path, cfg: &PipelineConfig, backend: &dyn Backend, prompts: &PromptSet) -> Result<Episode> {
    let meta: VideoMeta = read_json(&dir.join(files::META))?;
    let scenes: Vec<Scene> = read_json(&dir.join(files::SCENES))?;
    let layouts: Vec<SomLayout> = read_json(&dir.join(files::LAYOUTS))?;
    let transcript: Vec<NarrationSegment> = read_jsonl_optional(&dir.join(files::TRANSCRIPT))?;
    let images = scenes
        .iter()
        .map(|s| {
            let images = SceneImages { screen: scene_png(dir, files::CROPS, s.scene_index), som: scene_png(dir, files::SOM, s.scene_index) };
            require(&images.screen)?;
            require(&images.som)?;
            Ok(images)
        })
        .collect::<Result<Vec<_>>>()?;
    let zoom = dir.join(files::ZOOM);
    let inputs = EpisodeInputs {
        video_id: &meta.video_id,
        task_name: &meta.task_name,
        platform: meta.platform,
        metadata: EpisodeMetadata { duration_s: meta.duration_s, app_name: meta.app_name.clone(), source: meta.source.clone() },
        scenes: &scenes,
        layouts: &layouts,
        images: &images,
        transcript: &transcript,
        narration_pad_s: cfg.actions.narration_pad_s,
        zoom_dir: &zoom,
    };
    let episode = run_episode(&inputs, backend, prompts).map_err(|e| PipelineError::stage(&meta.video_id, "actions", e))?;
    let bytes = serialize_episode(&episode).map_err(|e| PipelineError::stage(&meta.video_id, "actions", e))?;
    let main = dir.join(files::EPISODE);
    let quarantine = dir.join(files::QUARANTINE).join(files::EPISODE);
    let (target, stale) = if episode.partial { (&quarantine, &main) } else { (&main, &quarantine) };
    write_atomic(target, &bytes)?;
    if stale.exists() {
        std::fs::remove_file(stale).map_err(|source| PipelineError::Io { path: stale.clone(), source })?;
    }
    if episode.partial {
        warn!("{}: {} failed step(s), episode quarantined", meta.video_id, episode.failures.len());
    }
    Ok(episode)
}

/// The episode of a video directory and whether it came from quarantine.
pub fn load_episode(dir: &Path) -> Result<(Episode, bool)> {
    let main = dir.join(files::EPISODE);
    if main.exists() {
        return Ok((read_json(&main)?, false));
    }
    let q = dir.join(files::QUARANTINE).join(files::EPISODE);
    if q.exists() {
        return Ok((read_json(&q)?, true));
    }
    Err(PipelineError::MissingInput(main))
}

/// Admission verdicts for every signals line plus the stage funnel.
pub fn filter_corpus(signals: &Path, protected: Option<&Path>, out_dir: &Path, cfg: &PipelineConfig) -> Result<FunnelReport> {
    let rows: Vec<VideoSignals> = read_jsonl(signals)?;
    let index = match protected {
        Some(p) => Some(ContaminationIndex::new(&read_jsonl::<TitleEntry>(p)?, cfg.filter.overlap_chars)),
        None => None,
    };
    let verdicts: Vec<FilterVerdict> = rows.iter().map(|s| apply_all(s, &cfg.filter, index.as_ref())).collect();
    let report = funnel(&verdicts);
    write_jsonl(&out_dir.join("verdicts.jsonl"), &verdicts)?;
    write_json(&out_dir.join("funnel.json"), &report)?;
    Ok(report)
}

fn complete_episodes(dirs: &[PathBuf]) -> Result<Vec<Episode>> {
    let mut out = Vec::new();
    for d in dirs {
        let (e, quarantined) = load_episode(d)?;
        if quarantined {
            info!("{}: quarantined episode left out", e.video_id);
        } else {
            out.push(e);
        }
    }
    Ok(out)
}

/// Copies complete episodes into `out/episodes`, and writes the manifest and
/// training pairs. With `verdicts`, only admitted videos are kept.
pub fn assemble_dataset(dirs: &[PathBuf], out: &Path, split: Split, verdicts: Option<&Path>, cfg: &PipelineConfig) -> Result<DatasetManifest> {
    let admitted: Option<HashSet<String>> = match verdicts {
        Some(p) => Some(read_jsonl::<FilterVerdict>(p)?.into_iter().filter(|v| v.admitted).map(|v| v.video_id).collect()),
        None => None,
    };
    let mut episodes = complete_episodes(dirs)?;
    if let Some(ok) = &admitted {
        episodes.retain(|e| ok.contains(&e.video_id));
    }
    episodes.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    if let Some(w) = episodes.windows(2).find(|w| w[0].video_id == w[1].video_id) {
        return Err(PipelineError::stage(&w[0].video_id, "assemble", "duplicate video id"));
    }

    let mut entries = Vec::new();
    let mut pairs: Vec<TrainingPair> = Vec::new();
    for e in &episodes {
        let locator = format!("episodes/{}.json", e.video_id);
        let bytes = serialize_episode(e).map_err(|err| PipelineError::stage(&e.video_id, "assemble", err))?;
        write_atomic(&out.join(&locator), &bytes)?;
        entries.push((locator, e.platform));
        pairs.extend(export_training_pairs(e, cfg.dataset.history_len));
    }
    let manifest = DatasetManifest::new(split, &entries);
    write_json(&out.join("manifest.json"), &manifest)?;
    write_jsonl(&out.join("training_pairs.jsonl"), &pairs)?;
    Ok(manifest)
}

pub fn stats_for(dirs: &[PathBuf], out: &Path, cfg: &PipelineConfig) -> Result<DatasetStats> {
    let episodes = complete_episodes(dirs)?;
    let stats = dataset_stats(&episodes, cfg.dataset.duration_bucket_s);
    write_json(out, &stats)?;
    Ok(stats)
}

/// Pooled scores over several videos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub videos: usize,
    pub transition: F1Report,
    pub hit_ratio: Option<f64>,
    pub scored_steps: usize,
    pub accuracy_all: Option<f64>,
    pub accuracy_touch: Option<f64>,
    pub per_video: BTreeMap<String, EvalReport>,
}

/// Scores every directory holding a ground-truth file, writes each video's
/// report next to its inputs and returns the pooled summary.
pub fn evaluate_dirs(dirs: &[PathBuf], cfg: &PipelineConfig) -> Result<EvalSummary> {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let (mut scored, mut correct, mut touch_scored, mut touch_correct) = (0, 0, 0, 0);
    let mut per_video = BTreeMap::new();
    let mut hit_layouts: Vec<(SomLayout, TruthStep)> = Vec::new();
    for d in dirs {
        let truth: GroundTruth = read_json(&d.join(files::GROUND_TRUTH))?;
        let transitions: TransitionReport = read_json(&d.join(files::TRANSITIONS))?;
        let (episode, _) = load_episode(d)?;
        let predicted: Vec<f64> = transitions.events.iter().map(|e| e.timestamp_s).collect();
        let layouts: Vec<&SomLayout> = episode.steps.iter().map(|s| &s.layout).collect();
        let actions: Vec<_> = episode.steps.iter().map(|s| s.action.clone()).collect();
        let report = evaluate_video(&truth, &predicted, &layouts, &actions, cfg.eval.f1_tolerance_s)
            .map_err(|e| PipelineError::stage(&truth.video_id, "eval", e))?;
        tp += report.transition.true_positives;
        fp += report.transition.false_positives;
        fn_ += report.transition.false_negatives;
        scored += report.accuracy.scored;
        correct += report.accuracy.correct;
        touch_scored += report.accuracy.touch_scored;
        touch_correct += report.accuracy.touch_correct;
        hit_layouts.extend(layouts.into_iter().cloned().zip(truth.steps.iter().cloned()));
        write_json(&d.join(files::EVAL), &report)?;
        per_video.insert(truth.video_id.clone(), report);
    }
    let cases: Vec<(&SomLayout, &TruthStep)> = hit_layouts.iter().map(|(l, t)| (l, t)).collect();
    let frac = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let precision = if tp + fp == 0 { if fn_ == 0 { 1.0 } else { 0.0 } } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { if fp == 0 { 1.0 } else { 0.0 } } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(EvalSummary {
        videos: dirs.len(),
        transition: F1Report { precision, recall, f1, true_positives: tp, false_positives: fp, false_negatives: fn_ },
        hit_ratio: hit_ratio(&cases).ok(),
        scored_steps: scored,
        accuracy_all: frac(correct, scored),
        accuracy_touch: frac(touch_correct, touch_scored),
        per_video,
    })
}
