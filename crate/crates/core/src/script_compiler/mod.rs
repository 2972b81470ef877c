//! Compiles an annotated raw tour script into a [`TourPlan`].
//!
//! Script format: UTF-8 text split into stops by `@stop <nav_point_id>`
//! lines, with exhibit mentions tagged inline as `[exhibit_id]`. An
//! optional `@tour <id>` line names the tour. Lines starting with `#` are
//! comments.

mod external;
mod lint;
mod rules;
mod segment;

pub use external::{build_prompt, DisabledTransport, ExternalModelBackend, ModelTransport};
pub use lint::{pattern_lint, LintFinding, LintRule};
pub use rules::{assign_actions, synthesize_transitions, RuleBackend};
pub use segment::{segment, speakable, tags_in, word_count};

use crate::tour_model::{TourPlan, ValidationError, World};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("script body is empty")]
    EmptyScript,
    #[error("script has no '@stop <id>' marker")]
    NoStops,
    #[error("text before the first '@stop' marker: {0:?}")]
    TextBeforeFirstStop(String),
    #[error("unresolved reference [{tag}] at stop '{stop}': no such exhibit in the world")]
    UnresolvedReference { tag: String, stop: String },
    #[error("stop '{0}' does not name an exhibit in the world")]
    UnknownStop(String),
    #[error("model backend: {0}")]
    Backend(String),
    #[error("backend output is not a valid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("backend output breaks the action pattern: {}", .0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    PatternViolations(Vec<LintFinding>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompilerConfig {
    /// Spoken words per second used to size `PlayAudio` durations.
    pub speaking_rate_wps: f64,
    /// `{stop}` is replaced by the stop's display name.
    pub arrival_template: String,
    pub departure_template: String,
    pub laser_revolutions: u32,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        Self {
            speaking_rate_wps: 1.18,
            arrival_template: "We are approaching {stop}.".into(),
            departure_template: "Let us move to the next stop.".into(),
            laser_revolutions: 3,
        }
    }
}

impl CompilerConfig {
    /// Audio length of `text`, rounded to the millisecond.
    pub fn audio_duration(&self, text: &str) -> f64 {
        let words = word_count(text).max(1) as f64;
        (words / self.speaking_rate_wps * 1000.0).round() / 1000.0
    }
}

/// One `@stop` section of a script.
#[derive(Debug, Clone, PartialEq)]
pub struct StopPassage {
    pub nav_point_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawScript {
    pub tour_id: String,
    pub body: String,
}

impl RawScript {
    /// Reads script text; `@tour` overrides `default_id` when present.
    pub fn parse(text: &str, default_id: &str) -> Self {
        let mut tour_id = default_id.to_string();
        let mut body = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(id) = trimmed.strip_prefix("@tour") {
                tour_id = id.trim().to_string();
            } else if trimmed.starts_with('#') {
                continue;
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        Self { tour_id, body }
    }

    pub fn stops(&self) -> Result<Vec<StopPassage>, CompileError> {
        if self.body.trim().is_empty() {
            return Err(CompileError::EmptyScript);
        }
        let mut stops: Vec<StopPassage> = Vec::new();
        let mut preamble = String::new();
        for line in self.body.lines() {
            let trimmed = line.trim();
            if let Some(id) = trimmed.strip_prefix("@stop") {
                stops.push(StopPassage {
                    nav_point_id: id.trim().to_string(),
                    text: String::new(),
                });
            } else if let Some(stop) = stops.last_mut() {
                stop.text.push_str(line);
                stop.text.push('\n');
            } else {
                preamble.push_str(line);
            }
        }
        if stops.is_empty() {
            return Err(CompileError::NoStops);
        }
        if !preamble.trim().is_empty() {
            return Err(CompileError::TextBeforeFirstStop(preamble.trim().to_string()));
        }
        Ok(stops)
    }
}

/// Anything that turns a script into a plan. Implementations must return
/// plans that pass validation and [`pattern_lint`].
pub trait CompilerBackend {
    fn compile(&self, script: &RawScript, world: &World) -> Result<TourPlan, CompileError>;
}

/// Display form of a stop id.
pub fn display_name(id: &str) -> String {
    id.replace('_', " ")
}
