use super::{ActionKind, ActionSpec, TourPlan, World};
use std::collections::HashSet;
use std::fmt;

/// A single invariant violation. `element` is the element index when the
/// offense is local to one element.
#[derive(Debug, Clone, PartialEq)]
pub struct Offense {
    pub element: Option<u32>,
    pub message: String,
}

impl fmt::Display for Offense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.element {
            Some(i) => write!(f, "element {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{} validation offense(s): {}", .0.len(), join(.0))]
pub struct ValidationError(pub Vec<Offense>);

fn join(offenses: &[Offense]) -> String {
    offenses
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl ValidationError {
    pub fn mentions(&self, needle: &str) -> bool {
        self.0.iter().any(|o| o.message.contains(needle))
    }
}

/// Checks every type invariant of a plan and reports all offenses at once.
pub fn validate_plan(plan: &TourPlan) -> Result<(), ValidationError> {
    let mut out = Vec::new();
    if plan.tour_id.trim().is_empty() {
        out.push(Offense {
            element: None,
            message: "tour_id is empty".into(),
        });
    }
    if plan.elements.is_empty() {
        out.push(Offense {
            element: None,
            message: "plan has no elements".into(),
        });
    }
    let mut prev: Option<u32> = None;
    for el in &plan.elements {
        let at = |message: String| Offense {
            element: Some(el.index),
            message,
        };
        if let Some(p) = prev {
            if el.index <= p {
                out.push(at(format!("index {} does not follow {p}", el.index)));
            }
        }
        prev = Some(el.index);

        if el.nav_point.trim().is_empty() {
            out.push(at("nav_point is empty".into()));
        }
        if matches!(&el.exhibit, Some(e) if e.trim().is_empty()) {
            out.push(at("exhibit is an empty string".into()));
        }

        let audio = el.actions.iter().filter(|a| a.kind() == ActionKind::PlayAudio).count();
        if audio != 1 {
            out.push(at(format!("expected exactly one PlayAudio, found {audio}")));
        }
        if el.has(ActionKind::TrackVisitor) && el.has(ActionKind::LookAtExhibit) {
            out.push(at("head contention: TrackVisitor and LookAtExhibit in one element".into()));
        }
        for action in &el.actions {
            match action {
                ActionSpec::PlayAudio { duration_s, .. } => {
                    if !(duration_s.is_finite() && *duration_s > 0.0) {
                        out.push(at(format!("PlayAudio duration_s must be > 0, got {duration_s}")));
                    }
                }
                ActionSpec::LookAtExhibit { exhibit_id, .. } => {
                    if exhibit_id.trim().is_empty() {
                        out.push(at("LookAtExhibit is missing exhibit_id".into()));
                    }
                }
                ActionSpec::PointLaser {
                    exhibit_id,
                    revolutions,
                } => {
                    if exhibit_id.trim().is_empty() {
                        out.push(at("PointLaser is missing exhibit_id".into()));
                    }
                    if *revolutions < 1 {
                        out.push(at("PointLaser revolutions must be >= 1".into()));
                    }
                    if el.exhibit.is_none() {
                        out.push(at("PointLaser in an element without exhibit".into()));
                    }
                }
                ActionSpec::BlinkEye {} | ActionSpec::TrackVisitor {} => {}
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(ValidationError(out))
    }
}

/// Checks that every exhibit and nav point referenced by the plan exists in `world`.
pub fn validate_against_world(plan: &TourPlan, world: &World) -> Result<(), ValidationError> {
    let mut out = Vec::new();
    for el in &plan.elements {
        let mut refs: Vec<(&str, &str)> = vec![("nav_point", el.nav_point.as_str())];
        if let Some(e) = &el.exhibit {
            refs.push(("exhibit", e));
        }
        for a in &el.actions {
            if let Some(e) = a.exhibit_id() {
                refs.push((a.kind().as_str(), e));
            }
        }
        for (what, id) in refs {
            if !world.contains(id) {
                out.push(Offense {
                    element: Some(el.index),
                    message: format!("{what} references unknown exhibit '{id}'"),
                });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(ValidationError(out))
    }
}

/// World invariants: positive extents, unit normals, unique ids.
pub fn validate_world(world: &World) -> Result<(), ValidationError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for ex in &world.exhibits {
        let bad = |message: String| Offense {
            element: None,
            message: format!("exhibit '{}': {message}", ex.id),
        };
        if ex.id.trim().is_empty() {
            out.push(bad("empty id".into()));
        }
        if !seen.insert(ex.id.as_str()) {
            out.push(bad("duplicate id".into()));
        }
        if !(ex.width > 0.0) {
            out.push(bad(format!("width must be > 0, got {}", ex.width)));
        }
        if !(ex.height > 0.0) {
            out.push(bad(format!("height must be > 0, got {}", ex.height)));
        }
        let n = ex.normal;
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !((norm - 1.0).abs() <= 1e-9) {
            out.push(bad(format!("normal is not unit length (|n| = {norm})")));
        }
        if ex.center.iter().any(|c| !c.is_finite()) {
            out.push(bad("center is not finite".into()));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(ValidationError(out))
    }
}
