//! The three model steps: markless summary, marked initial choice, zoomed
//! refinement.

use std::path::Path;

use image::RgbImage;
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::backend::{Backend, BackendRequest, ImageRef, Message, Part, VlmParams};
use super::prompts::PromptSet;
use super::reply::parse_action_response;
use super::zones::zones_containing;
use super::{Action, ActionError, CandidateAction};
use crate::elements::{resolve_label, SomLayout};
use crate::render::render_som;
use crate::track::crop_to_screen;

/// Attempts per backend call: the first try plus one retry.
const ATTEMPTS: usize = 2;

/// Neighbor summaries shown on each side of the current scene.
const CONTEXT_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub scene_index: usize,
    pub text: String,
}

/// Thin wrapper that issues VLM requests for one video with deterministic
/// request ids and the retry policy.
pub struct VlmClient<'a> {
    backend: &'a dyn Backend,
    video_id: String,
    pub prompts: &'a PromptSet,
}

impl<'a> VlmClient<'a> {
    pub fn new(backend: &'a dyn Backend, video_id: impl Into<String>, prompts: &'a PromptSet) -> Self {
        Self { backend, video_id: video_id.into(), prompts }
    }

    /// Sends one user message and returns the reply text. Transport errors,
    /// error responses and empty replies are retried once.
    pub fn ask(&self, tag: &str, content: Vec<Part>) -> Result<String, ActionError> {
        let params = VlmParams {
            messages: vec![Message { role: "user".into(), content }],
            temperature: 0.0,
            tag: Some(tag.to_string()),
        };
        let mut last = String::new();
        for attempt in 0..ATTEMPTS {
            let req = BackendRequest::vlm(format!("{}/{}/{}", self.video_id, tag, attempt), &params);
            let outcome = self.backend.call(&req).map_err(|e| e.to_string()).and_then(|r| r.text().map_err(|e| e.to_string()));
            match outcome {
                Ok(text) if !text.trim().is_empty() => return Ok(text),
                Ok(_) => last = "empty reply".into(),
                Err(e) => last = e,
            }
            debug!("{tag}: attempt {attempt} failed: {last}");
        }
        Err(ActionError::BackendFailure(format!("{tag}: {last}")))
    }
}

fn image_part(path: &Path) -> Part {
    Part::Image { image: ImageRef::Path(path.to_string_lossy().into_owned()) }
}

/// Step 1. `screen` must be the unmarked screen crop.
pub fn summarize_scene(client: &VlmClient, scene_index: usize, screen: &Path, narration: &str) -> Result<SceneSummary, ActionError> {
    let prompt = client.prompts.summary_prompt(narration);
    let text = client.ask(&format!("summary/{scene_index}"), vec![Part::Text { text: prompt }, image_part(screen)])?;
    Ok(SceneSummary { scene_index, text: text.trim().to_string() })
}

/// Formats the summaries within two scenes of `current`. Missing summaries
/// (episode edges or failed step-one calls) are left out.
pub(crate) fn context_block(summaries: &[Option<SceneSummary>], current: usize) -> String {
    let lo = current.saturating_sub(CONTEXT_RADIUS);
    let hi = (current + CONTEXT_RADIUS).min(summaries.len().saturating_sub(1));
    let mut lines = Vec::new();
    for (j, s) in summaries.iter().enumerate().take(hi + 1).skip(lo) {
        let Some(s) = s else { continue };
        let name = match j.cmp(&current) {
            std::cmp::Ordering::Less => format!("previous screen -{}", current - j),
            std::cmp::Ordering::Equal => "current screen".to_string(),
            std::cmp::Ordering::Greater => format!("next screen +{}", j - current),
        };
        lines.push(format!("[{name}] {}", s.text));
    }
    if lines.is_empty() {
        "(none)".into()
    } else {
        lines.join("\n")
    }
}

/// Step 2. `summaries` is indexed by scene; `som` is the marked screen image.
pub fn identify_action_initial(
    client: &VlmClient,
    step_index: usize,
    summaries: &[Option<SceneSummary>],
    som: &Path,
    layout: &SomLayout,
    narration: &str,
) -> Result<CandidateAction, ActionError> {
    let tag = format!("initial/{step_index}");
    let prompt = client.prompts.initial_prompt(&context_block(summaries, step_index), narration);
    let mut content = vec![Part::Text { text: prompt }, image_part(som)];
    let reply = client.ask(&tag, content.clone())?;
    let candidate = match parse_action_response(&reply) {
        Ok(c) => c,
        Err(first) => {
            debug!("{tag}: reprompting after {first}");
            content.push(Part::Text { text: client.prompts.format_reminder.clone() });
            parse_action_response(&client.ask(&tag, content)?)?
        }
    };
    if let CandidateAction::Element { label, .. } = candidate {
        if layout.element(label).is_none() {
            return Err(ActionError::UnknownLabel(label));
        }
    }
    Ok(candidate)
}

/// Step-three outcome with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub action: Action,
    /// Zone indices that were sent, empty for pass-through candidates.
    pub zones: Vec<u8>,
    /// Whether the step-two choice was kept because the reply was unusable.
    pub fallback: bool,
}

fn pointer_action(long_press: bool, layout: &SomLayout, label: u32) -> Result<Action, ActionError> {
    let point = resolve_label(layout, label)?;
    Ok(if long_press {
        Action::LongPress { point, element_label: Some(label) }
    } else {
        Action::Touch { point, element_label: Some(label) }
    })
}

/// Step 3. Element candidates are re-asked over full-width crops of every
/// zone containing the element's center; each crop is re-marked with the
/// elements centered inside it, keeping their labels. Crops are written to
/// `work_dir` as `step{N}_zone{Z}.png`. Non-element candidates pass through.
pub fn refine_action(
    client: &VlmClient,
    step_index: usize,
    candidate: &CandidateAction,
    screen: &RgbImage,
    layout: &SomLayout,
    narration: &str,
    work_dir: &Path,
) -> Result<Refinement, ActionError> {
    let (long_press, label) = match candidate {
        CandidateAction::Direct(a) => return Ok(Refinement { action: a.clone(), zones: vec![], fallback: false }),
        CandidateAction::Element { long_press, label } => (*long_press, *label),
    };
    let target = layout.element(label).ok_or(ActionError::UnknownLabel(label))?;
    let zones = zones_containing(target.bbox.center().y);

    std::fs::create_dir_all(work_dir).map_err(|e| ActionError::Image(format!("{}: {e}", work_dir.display())))?;
    let kind = if long_press { "long_press" } else { "touch" };
    let mut content = vec![Part::Text { text: client.prompts.refine_prompt(label, kind, narration) }];
    let mut visible: Vec<u32> = Vec::new();
    for zone in &zones {
        let band = zone.bbox();
        let crop = crop_to_screen(screen, &band).map_err(|e| ActionError::Image(e.to_string()))?;
        let elements: Vec<_> = layout
            .elements
            .iter()
            .filter(|e| band.contains(e.bbox.center()))
            .filter_map(|e| {
                let mut local = e.clone();
                local.bbox = e.bbox.relative_to(&band)?;
                Some(local)
            })
            .collect();
        visible.extend(elements.iter().map(|e| e.label));
        let ordering = (0..elements.len()).collect();
        let view = SomLayout { frame: layout.frame.clone(), elements, ordering };
        let path = work_dir.join(format!("step{step_index:03}_zone{}.png", zone.index));
        render_som(&crop, &view).save(&path).map_err(|e| ActionError::Image(format!("{}: {e}", path.display())))?;
        content.push(image_part(&path));
    }
    let zone_ids: Vec<u8> = zones.iter().map(|z| z.index).collect();

    let reply = client.ask(&format!("refine/{step_index}"), content)?;
    let chosen = match parse_action_response(&reply) {
        Ok(CandidateAction::Element { label: l, .. }) if visible.contains(&l) => Some(l),
        Ok(other) => {
            warn!("refine/{step_index}: reply {other:?} not usable, keeping label {label}");
            None
        }
        Err(e) => {
            warn!("refine/{step_index}: {e}, keeping label {label}");
            None
        }
    };
    let fallback = chosen.is_none();
    let action = pointer_action(long_press, layout, chosen.unwrap_or(label))?;
    Ok(Refinement { action, zones: zone_ids, fallback })
}
