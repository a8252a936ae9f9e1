//! Prompt templates. Built-in copies are compiled in; a directory holding any
//! of `summary.txt`, `initial.txt`, `refine.txt`, `format_reminder.txt`
//! overrides the matching template.

use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub summary: String,
    pub initial: String,
    pub refine: String,
    pub format_reminder: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            summary: include_str!("../../prompts/summary.txt").to_string(),
            initial: include_str!("../../prompts/initial.txt").to_string(),
            refine: include_str!("../../prompts/refine.txt").to_string(),
            format_reminder: include_str!("../../prompts/format_reminder.txt").to_string(),
        }
    }
}

/// Replaces each `{{key}}` with its value. Unknown placeholders are left alone.
pub(crate) fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{{{k}}}}}"), v);
    }
    out
}

impl PromptSet {
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::default();
        for (name, slot) in [
            ("summary.txt", &mut set.summary),
            ("initial.txt", &mut set.initial),
            ("refine.txt", &mut set.refine),
            ("format_reminder.txt", &mut set.format_reminder),
        ] {
            let p = dir.join(name);
            if p.exists() {
                *slot = std::fs::read_to_string(&p)?;
            }
        }
        Ok(set)
    }

    pub fn summary_prompt(&self, narration: &str) -> String {
        fill(&self.summary, &[("narration", or_none(narration))])
    }

    pub fn initial_prompt(&self, summaries: &str, narration: &str) -> String {
        fill(&self.initial, &[("summaries", summaries), ("narration", or_none(narration))])
    }

    pub fn refine_prompt(&self, label: u32, kind: &str, narration: &str) -> String {
        fill(&self.refine, &[("label", &label.to_string()), ("kind", kind), ("narration", or_none(narration))])
    }
}

fn or_none(s: &str) -> &str {
    if s.trim().is_empty() {
        "(no narration)"
    } else {
        s
    }
}
