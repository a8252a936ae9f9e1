//! Device-control actions and the three-step identification protocol.

mod backend;
mod episode;
mod identify;
mod narration;
mod prompts;
mod reply;
mod zones;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elements::ElementError;
use crate::geometry::Point;

pub use backend::{
    Backend, BackendError, BackendRequest, BackendResponse, DetectParams, DetectedBox, ImageRef, Message, Method,
    MockBackend, MockEntry, Part, SidecarBackend, VlmParams, serve, ImageParams, PROTOCOL_VERSION,
};
pub use episode::{run_episode, Episode, EpisodeInputs, EpisodeMetadata, Platform, SceneImages, SceneRecord, Step, StepFailure};
pub use identify::{identify_action_initial, refine_action, summarize_scene, Refinement, SceneSummary, VlmClient};
pub use narration::{narration_window, NarrationSegment};
pub use prompts::PromptSet;
pub use reply::parse_action_response;
pub use zones::{compute_zones, zones_containing, Zone};

#[derive(Debug, Error, PartialEq)]
pub enum ActionError {
    #[error("unparseable action reply ({reason}): {span:?}")]
    UnparseableAction { span: String, reason: String },
    #[error("backend named label {0}, which is not in the layout")]
    UnknownLabel(u32),
    #[error("backend failure: {0}")]
    BackendFailure(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("image i/o: {0}")]
    Image(String),
}

impl From<ElementError> for ActionError {
    fn from(e: ElementError) -> Self {
        match e {
            ElementError::UnknownLabel(l) => ActionError::UnknownLabel(l),
            other => ActionError::InvalidAction(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrollDirection {
    Up,
    Down,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoomDirection {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiTouchVariant {
    SwipeUp,
    SwipeLeft,
    SwipeRight,
    FourFingerPinch,
    DoubleTap,
    RotateCw,
    RotateCcw,
    MultiTaps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardwareVariant {
    Home,
    RecentApps,
    Back,
    VolumeUp,
    VolumeDown,
    Power,
    Authentication,
    Shake,
    OrientationCw,
    OrientationCcw,
    SilentOn,
    SilentOff,
}

/// The closed action taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Touch {
        point: Point,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        element_label: Option<u32>,
    },
    LongPress {
        point: Point,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        element_label: Option<u32>,
    },
    Scroll {
        direction: ScrollDirection,
    },
    Zoom {
        direction: ZoomDirection,
    },
    MultiTouch {
        variant: MultiTouchVariant,
    },
    Hardware {
        variant: HardwareVariant,
    },
    Typing {
        text: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    #[serde(alias = "click")]
    Touch,
    LongPress,
    Scroll,
    Zoom,
    MultiTouch,
    Hardware,
    Typing,
}

impl ActionKind {
    pub const ALL: [ActionKind; 7] = [
        ActionKind::Touch,
        ActionKind::LongPress,
        ActionKind::Scroll,
        ActionKind::Zoom,
        ActionKind::MultiTouch,
        ActionKind::Hardware,
        ActionKind::Typing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Touch => "touch",
            ActionKind::LongPress => "long_press",
            ActionKind::Scroll => "scroll",
            ActionKind::Zoom => "zoom",
            ActionKind::MultiTouch => "multi_touch",
            ActionKind::Hardware => "hardware",
            ActionKind::Typing => "typing",
        }
    }

    /// Kinds that target a screen location.
    pub fn is_pointer(self) -> bool {
        matches!(self, ActionKind::Touch | ActionKind::LongPress)
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Touch { .. } => ActionKind::Touch,
            Action::LongPress { .. } => ActionKind::LongPress,
            Action::Scroll { .. } => ActionKind::Scroll,
            Action::Zoom { .. } => ActionKind::Zoom,
            Action::MultiTouch { .. } => ActionKind::MultiTouch,
            Action::Hardware { .. } => ActionKind::Hardware,
            Action::Typing { .. } => ActionKind::Typing,
        }
    }

    pub fn point(&self) -> Option<Point> {
        match self {
            Action::Touch { point, .. } | Action::LongPress { point, .. } => Some(*point),
            _ => None,
        }
    }

    pub fn element_label(&self) -> Option<u32> {
        match self {
            Action::Touch { element_label, .. } | Action::LongPress { element_label, .. } => *element_label,
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ActionError> {
        match self {
            Action::Touch { point, .. } | Action::LongPress { point, .. } if !point.is_valid() => {
                Err(ActionError::InvalidAction(format!("point ({}, {}) outside the screen", point.x, point.y)))
            }
            Action::Typing { text } if text.trim().is_empty() => Err(ActionError::InvalidAction("typing without text".into())),
            _ => Ok(()),
        }
    }
}

/// Step-two output: either an element reference still to be localized, or a
/// complete non-pointer action.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateAction {
    Element { long_press: bool, label: u32 },
    Direct(Action),
}
