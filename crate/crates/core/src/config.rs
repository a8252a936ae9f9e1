//! Pipeline configuration, loaded from TOML. Every field has a default, so a
//! config file only needs the values it changes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FilterParams;
use crate::elements::ElementParams;
use crate::track::TrackParams;
use crate::transition::TransitionParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActionConfig {
    /// Narration included on each side of a scene's interval.
    pub narration_pad_s: f64,
    /// Directory of prompt template overrides.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts_dir: Option<PathBuf>,
    /// Command line of the model sidecar. Falls back to `NAVMINE_SIDECAR`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<String>,
    /// Sidecar processes kept alive.
    pub sidecar_pool: usize,
}

impl Default for ActionConfig {
    fn default() -> Self {
        Self { narration_pad_s: 2.0, prompts_dir: None, sidecar: None, sidecar_pool: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub history_len: usize,
    pub duration_bucket_s: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { history_len: 4, duration_bucket_s: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub f1_tolerance_s: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { f1_tolerance_s: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub track: TrackParams,
    pub transition: TransitionParams,
    pub elements: ElementParams,
    pub actions: ActionConfig,
    pub filter: FilterParams,
    pub dataset: DatasetConfig,
    pub eval: EvalConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.transition;
        let e = &self.elements;
        let checks: [(bool, &str); 10] = [
            (self.track.max_gap_s >= 0.0, "track.max_gap_s must be >= 0"),
            ((0.0..=1.0).contains(&t.min_confidence), "transition.min_confidence must be in [0, 1]"),
            (t.top_exclusion + t.bottom_exclusion < 1.0, "transition exclusion bands cover the whole screen"),
            (t.threshold >= 0.0, "transition.threshold must be >= 0"),
            (t.merge_window_s >= 0.0 && t.verify_window_s >= 0.0, "transition windows must be >= 0"),
            (e.min_area <= e.max_area, "elements.min_area exceeds max_area"),
            (e.min_aspect <= e.max_aspect, "elements.min_aspect exceeds max_aspect"),
            (e.delta_e_step > 0.0 && e.delta_e_floor <= e.delta_e_start, "elements colour thresholds are inconsistent"),
            (self.actions.narration_pad_s >= 0.0, "actions.narration_pad_s must be >= 0"),
            (self.eval.f1_tolerance_s >= 0.0, "eval.f1_tolerance_s must be >= 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(ConfigError::Invalid(msg.to_string())),
            None => Ok(()),
        }
    }

    /// Sidecar command from the config or the environment.
    pub fn sidecar_command(&self) -> Option<String> {
        self.actions
            .sidecar
            .clone()
            .or_else(|| std::env::var(crate::action::SidecarBackend::ENV).ok())
            .filter(|s| !s.trim().is_empty())
    }
}
