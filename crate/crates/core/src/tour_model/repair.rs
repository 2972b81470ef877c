//! Pre-execution sanity check: every deictic action must be able to find
//! its exhibit. Exhibits missing from the registered coordinate list get a
//! relocalizing `LookAtExhibit` in the element that points at them.

use super::{validate_plan, ActionKind, ActionSpec, TourPlan, ValidationError, World};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairKind {
    /// A new `LookAtExhibit{relocalize}` was added to the element.
    Inserted,
    /// The element already looked at the exhibit; its relocalize flag was set.
    RelocalizeSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairEntry {
    pub element: u32,
    pub exhibit_id: String,
    pub kind: RepairKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepairReport {
    pub entries: Vec<RepairEntry>,
}

impl RepairReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepairError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("element {element}: exhibit '{exhibit_id}' has no pre-annotated coordinate")]
    Unrepairable { element: u32, exhibit_id: String },
    #[error("element {element}: cannot relocalize '{exhibit_id}' while TrackVisitor holds the head")]
    HeadBusy { element: u32, exhibit_id: String },
}

/// Ensures every `PointLaser` whose exhibit is not in `known_coords` is
/// accompanied by a relocalizing `LookAtExhibit` in the same element.
/// `world` supplies the pre-annotated coordinates.
pub fn sanity_check_repair(
    plan: &TourPlan,
    known_coords: &BTreeSet<String>,
    world: &World,
) -> Result<(TourPlan, RepairReport), RepairError> {
    validate_plan(plan)?;
    let mut repaired = plan.clone();
    let mut report = RepairReport::default();

    for el in &mut repaired.elements {
        for a in &el.actions {
            if let Some(id) = a.exhibit_id() {
                if !world.contains(id) {
                    return Err(RepairError::Unrepairable {
                        element: el.index,
                        exhibit_id: id.to_string(),
                    });
                }
            }
        }

        let missing: BTreeSet<String> = el
            .actions
            .iter()
            .filter(|a| a.kind() == ActionKind::PointLaser)
            .filter_map(|a| a.exhibit_id())
            .filter(|id| !known_coords.contains(*id))
            .map(str::to_string)
            .collect();

        for id in missing {
            let existing = el.actions.iter_mut().find_map(|a| match a {
                ActionSpec::LookAtExhibit {
                    exhibit_id,
                    relocalize,
                } if *exhibit_id == id => Some(relocalize),
                _ => None,
            });
            match existing {
                Some(flag) if *flag => {}
                Some(flag) => {
                    *flag = true;
                    report.entries.push(RepairEntry {
                        element: el.index,
                        exhibit_id: id,
                        kind: RepairKind::RelocalizeSet,
                    });
                }
                None => {
                    if el.has(ActionKind::TrackVisitor) {
                        return Err(RepairError::HeadBusy {
                            element: el.index,
                            exhibit_id: id,
                        });
                    }
                    el.actions.push(ActionSpec::LookAtExhibit {
                        exhibit_id: id.clone(),
                        relocalize: true,
                    });
                    report.entries.push(RepairEntry {
                        element: el.index,
                        exhibit_id: id,
                        kind: RepairKind::Inserted,
                    });
                }
            }
        }
    }
    Ok((repaired, report))
}
