//! Plan compilation through an external language model.
//!
//! The backend only builds the prompt and checks whatever comes back; the
//! transport that would reach a model is a trait so that callers can plug
//! one in. The default transport refuses every request.

use super::{pattern_lint, CompileError, CompilerBackend, CompilerConfig, RawScript};
use crate::tour_model::{parse_plan, validate_against_world, validate_plan, PlanError, TourPlan, World};
use std::fmt::Write;

pub trait ModelTransport {
    /// Sends `prompt` and returns the raw completion text.
    fn complete(&self, prompt: &str) -> Result<String, String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DisabledTransport;

impl ModelTransport for DisabledTransport {
    fn complete(&self, _prompt: &str) -> Result<String, String> {
        Err("no model transport configured".into())
    }
}

const ACTION_TABLE: &[(&str, &str)] = &[
    ("PlayAudio", "Play the narration audio of the sentence. params: {text, duration_s}"),
    ("BlinkEye", "Blink the animated eyes. params: {}"),
    ("TrackVisitor", "Turn the head to follow the visitor's face. params: {}"),
    ("LookAtExhibit", "Turn the head toward an exhibit. params: {exhibit_id}"),
    ("PointLaser", "Circle the laser pointer around an exhibit. params: {exhibit_id, revolutions}"),
];

pub fn build_prompt(script: &RawScript, world: &World, cfg: &CompilerConfig) -> String {
    let mut p = String::new();
    p.push_str("Convert the tour script below into a JSON tour plan.\n\n");
    p.push_str("Split each stop's text into short sentences. Every sentence becomes one element\n");
    p.push_str("{index, text, sentence_type, nav_point, exhibit, actions}. sentence_type is\n");
    p.push_str("arrival, narration or departure. Add an arrival sentence before each stop and a\n");
    p.push_str("departure sentence after every stop but the last.\n\n");
    p.push_str("Actions (each element runs its actions at the same time):\n");
    for (name, desc) in ACTION_TABLE {
        let _ = writeln!(p, "- {name}: {desc}");
    }
    let _ = writeln!(
        p,
        "\nEach element has exactly one PlayAudio with duration_s = words / {}.",
        cfg.speaking_rate_wps
    );
    let _ = writeln!(
        p,
        "Never combine TrackVisitor with LookAtExhibit. Use LookAtExhibit with PointLaser \
         (revolutions {}) on the first sentence about an exhibit and TrackVisitor otherwise.",
        cfg.laser_revolutions
    );
    p.push_str("\nLocations and their exhibits:\n");
    for e in &world.exhibits {
        let _ = writeln!(p, "- {} (stop at nav point {:.2}, {:.2})", e.id, e.nav_point.x, e.nav_point.y);
    }
    let _ = writeln!(p, "\ntour_id: {}\n\nScript:\n{}", script.tour_id, script.body.trim_end());
    p.push_str("\nAnswer with the JSON document only.\n");
    p
}

/// Pulls the outermost JSON object out of a completion that may be wrapped
/// in prose or a code fence.
fn extract_json(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (end > start).then(|| &text[start..=end])
}

#[derive(Debug, Clone, Default)]
pub struct ExternalModelBackend<T = DisabledTransport> {
    pub transport: T,
    pub config: CompilerConfig,
}

impl<T: ModelTransport> ExternalModelBackend<T> {
    pub fn new(transport: T, config: CompilerConfig) -> Self {
        Self { transport, config }
    }

    /// Checks a completion and turns it into a plan.
    pub fn accept(&self, completion: &str, world: &World) -> Result<TourPlan, CompileError> {
        let json = extract_json(completion)
            .ok_or_else(|| CompileError::InvalidPlan("completion contains no JSON object".into()))?;
        let plan = parse_plan(json).map_err(|e| match e {
            PlanError::Validation(v) => CompileError::Validation(v),
            other => CompileError::InvalidPlan(other.to_string()),
        })?;
        validate_plan(&plan)?;
        validate_against_world(&plan, world)?;
        let findings = pattern_lint(&plan);
        if !findings.is_empty() {
            return Err(CompileError::PatternViolations(findings));
        }
        Ok(plan)
    }
}

impl<T: ModelTransport> CompilerBackend for ExternalModelBackend<T> {
    fn compile(&self, script: &RawScript, world: &World) -> Result<TourPlan, CompileError> {
        script.stops()?;
        let prompt = build_prompt(script, world, &self.config);
        let completion = self.transport.complete(&prompt).map_err(CompileError::Backend)?;
        self.accept(&completion, world)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_found_inside_a_fence() {
        assert_eq!(extract_json("sure:\n```json\n{\"a\": {}}\n```"), Some("{\"a\": {}}"));
        assert_eq!(extract_json("nothing"), None);
    }

    #[test]
    fn disabled_transport_fails_cleanly() {
        let backend = ExternalModelBackend::<DisabledTransport>::default();
        let script = RawScript::parse("@stop a\nHello.\n", "t");
        let world = World { exhibits: vec![] };
        assert!(matches!(backend.compile(&script, &world), Err(CompileError::Backend(_))));
    }
}
