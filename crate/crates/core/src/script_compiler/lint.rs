use crate::tour_model::{ActionKind, TourPlan};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LintRule {
    /// Arrival or departure without visitor tracking.
    TransitionWithoutTracking,
    /// LookAtExhibit later than the second sentence of an exhibit passage.
    LateLookAt,
    /// Narration that neither tracks the visitor nor looks at an exhibit.
    IdleHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LintFinding {
    pub rule: LintRule,
    pub element: u32,
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.rule {
            LintRule::TransitionWithoutTracking => "transition sentence lacks TrackVisitor",
            LintRule::LateLookAt => "LookAtExhibit after the second sentence of its passage",
            LintRule::IdleHead => "narration with neither TrackVisitor nor LookAtExhibit",
        };
        write!(f, "element {}: {what}", self.element)
    }
}

/// Checks a plan against the expected co-speech action pattern.
///
/// A passage is a maximal run of consecutive narration elements at one nav
/// point that share the same exhibit.
pub fn pattern_lint(plan: &TourPlan) -> Vec<LintFinding> {
    let mut out = Vec::new();
    let mut position = 0usize;
    let mut prev: Option<(&str, Option<&str>)> = None;
    for el in &plan.elements {
        let tracking = el.has(ActionKind::TrackVisitor);
        let looking = el.has(ActionKind::LookAtExhibit);
        if el.sentence_type.is_transition() {
            if !tracking {
                out.push(LintFinding {
                    rule: LintRule::TransitionWithoutTracking,
                    element: el.index,
                });
            }
            prev = None;
            continue;
        }
        let key = (el.nav_point.as_str(), el.exhibit.as_deref());
        position = if prev == Some(key) { position + 1 } else { 0 };
        prev = Some(key);

        if looking && el.exhibit.is_some() && position >= 2 {
            out.push(LintFinding {
                rule: LintRule::LateLookAt,
                element: el.index,
            });
        }
        if !tracking && !looking {
            out.push(LintFinding {
                rule: LintRule::IdleHead,
                element: el.index,
            });
        }
    }
    out
}
