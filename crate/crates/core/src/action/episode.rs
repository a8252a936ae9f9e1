//! Episode assembly: run the three steps over every scene boundary.

use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use super::backend::Backend;
use super::identify::{identify_action_initial, refine_action, summarize_scene, SceneSummary, VlmClient};
use super::narration::{narration_window, NarrationSegment};
use super::prompts::PromptSet;
use super::{Action, ActionError};
use crate::elements::SomLayout;
use crate::transition::Scene;

/// Allowed gap between a pointer action and its element's center. Covers the
/// rounding of both values to six decimals on disk.
pub const CENTER_TOLERANCE: f64 = 1e-6 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Platform {
    Ios,
    Android,
    WindowsMobile,
    Other,
}

impl Platform {
    pub const ALL: [Platform; 4] = [Platform::Ios, Platform::Android, Platform::WindowsMobile, Platform::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Ios => "ios",
            Platform::Android => "android",
            Platform::WindowsMobile => "windows_mobile",
            Platform::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetadata {
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub scene: Scene,
    pub layout: SomLayout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    /// `None` only in partial episodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zoom_zones: Vec<u8>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub refinement_fallback: bool,
}

/// The closing scene, which carries no action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene: Scene,
    pub layout: SomLayout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub scene_index: usize,
    /// `summary`, `initial`, `refine` or `image`.
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub video_id: String,
    pub task_name: String,
    pub platform: Platform,
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_scene: Option<SceneRecord>,
    pub metadata: EpisodeMetadata,
    #[serde(default)]
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<StepFailure>,
}

impl Episode {
    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.steps.iter().filter_map(|s| s.action.as_ref())
    }

    pub fn scene_count(&self) -> usize {
        self.steps.len() + usize::from(self.final_scene.is_some())
    }

    /// Every broken invariant, as a human-readable list. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.final_scene.is_none() && !self.steps.is_empty() {
            out.push("episode with steps has no final scene".to_string());
        }
        for (i, step) in self.steps.iter().enumerate() {
            if step.scene.scene_index != i {
                out.push(format!("step {i} holds scene {}", step.scene.scene_index));
            }
            let Some(action) = &step.action else {
                if !self.partial {
                    out.push(format!("step {i} has no action in a complete episode"));
                }
                continue;
            };
            if let Err(e) = action.validate() {
                out.push(format!("step {i}: {e}"));
            }
            if let (Some(p), Some(label)) = (action.point(), action.element_label()) {
                match step.layout.element(label) {
                    None => out.push(format!("step {i}: label {label} missing from layout")),
                    Some(el) => {
                        let c = el.bbox.center();
                        if (c.x - p.x).abs() > CENTER_TOLERANCE || (c.y - p.y).abs() > CENTER_TOLERANCE {
                            out.push(format!("step {i}: point ({}, {}) is not the center of label {label}", p.x, p.y));
                        }
                    }
                }
            }
        }
        if let Some(f) = &self.final_scene {
            if f.scene.scene_index != self.steps.len() {
                out.push(format!("final scene index {} after {} steps", f.scene.scene_index, self.steps.len()));
            }
        }
        if self.partial == self.failures.is_empty() {
            out.push("partial flag disagrees with the failure list".to_string());
        }
        if !(self.metadata.duration_s.is_finite() && self.metadata.duration_s >= 0.0) {
            out.push("duration must be finite and non-negative".to_string());
        }
        out
    }
}

/// Image files for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneImages {
    /// Unmarked screen crop of the representative frame.
    pub screen: PathBuf,
    /// The same crop with the layout drawn on it.
    pub som: PathBuf,
}

pub struct EpisodeInputs<'a> {
    pub video_id: &'a str,
    pub task_name: &'a str,
    pub platform: Platform,
    pub metadata: EpisodeMetadata,
    pub scenes: &'a [Scene],
    pub layouts: &'a [SomLayout],
    pub images: &'a [SceneImages],
    pub transcript: &'a [NarrationSegment],
    pub narration_pad_s: f64,
    /// Where zoomed refinement views are written.
    pub zoom_dir: &'a Path,
}

/// Runs summary, initial identification and refinement for every scene
/// boundary. Step failures are recorded on the episode, which is then
/// marked partial; only malformed inputs produce an error.
pub fn run_episode(inputs: &EpisodeInputs, backend: &dyn Backend, prompts: &PromptSet) -> Result<Episode, ActionError> {
    let n = inputs.scenes.len();
    if inputs.layouts.len() != n || inputs.images.len() != n {
        return Err(ActionError::InvalidAction(format!(
            "{} scenes, {} layouts, {} image sets",
            n,
            inputs.layouts.len(),
            inputs.images.len()
        )));
    }
    let client = VlmClient::new(backend, inputs.video_id, prompts);
    let narration =
        |s: &Scene| narration_window(inputs.transcript, (s.start_s, s.end_s), inputs.narration_pad_s);
    let mut failures = Vec::new();

    let summaries: Vec<Option<SceneSummary>> = inputs
        .scenes
        .iter()
        .enumerate()
        .map(|(i, scene)| match summarize_scene(&client, i, &inputs.images[i].screen, &narration(scene)) {
            Ok(s) => Some(s),
            Err(e) => {
                failures.push(StepFailure { scene_index: i, stage: "summary".into(), error: e.to_string() });
                None
            }
        })
        .collect();

    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let scene = &inputs.scenes[i];
        let layout = &inputs.layouts[i];
        let text = narration(scene);
        let mut step = Step {
            scene: scene.clone(),
            layout: layout.clone(),
            summary: summaries[i].as_ref().map(|s| s.text.clone()),
            action: None,
            zoom_zones: vec![],
            refinement_fallback: false,
        };
        let outcome = identify_action_initial(&client, i, &summaries, &inputs.images[i].som, layout, &text)
            .map_err(|e| ("initial", e))
            .and_then(|cand| {
                let screen = image::open(&inputs.images[i].screen)
                    .map_err(|e| ("image", ActionError::Image(format!("{}: {e}", inputs.images[i].screen.display()))))?
                    .to_rgb8();
                refine_action(&client, i, &cand, &screen, layout, &text, inputs.zoom_dir).map_err(|e| ("refine", e))
            });
        match outcome {
            Ok(r) => {
                step.action = Some(r.action);
                step.zoom_zones = r.zones;
                step.refinement_fallback = r.fallback;
            }
            Err((stage, e)) => failures.push(StepFailure { scene_index: i, stage: stage.into(), error: e.to_string() }),
        }
        steps.push(step);
    }
    failures.sort_by_key(|f| f.scene_index);

    let final_scene = inputs.scenes.last().map(|scene| SceneRecord {
        scene: scene.clone(),
        layout: inputs.layouts[n - 1].clone(),
        summary: summaries[n - 1].as_ref().map(|s| s.text.clone()),
    });
    let partial = !failures.is_empty();
    info!("{}: {} steps, {} failures", inputs.video_id, steps.len(), failures.len());
    Ok(Episode {
        video_id: inputs.video_id.to_string(),
        task_name: inputs.task_name.to_string(),
        platform: inputs.platform,
        steps,
        final_scene,
        metadata: inputs.metadata.clone(),
        partial,
        failures,
    })
}
