use super::FixationRecord;
use crate::behavior_engine::{EventLog, ExecPhase};
use crate::tour_model::WallRect;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineSpan {
    /// `action`, `gaze` or `presentation`.
    pub track: String,
    pub t0: f64,
    pub t1: f64,
    pub label: String,
    pub tag: String,
}

/// Two-track timeline: robot actions above, gaze fixations below, plus
/// the presentation intervals as markers.
///
/// A fixation is tagged `target` when its centroid lies in the box of an
/// exhibit that is being presented while the fixation starts or overlaps,
/// otherwise `other`.
pub fn export_timeline(log: &EventLog, fixations: &[FixationRecord], boxes: &[(String, WallRect)]) -> Vec<TimelineSpan> {
    let mut out = Vec::new();
    for x in &log.executions {
        let kind = x.action.kind();
        let label = match x.action.exhibit_id() {
            Some(e) => format!("{kind}:{e}"),
            None => kind.to_string(),
        };
        let tag = match x.phase {
            ExecPhase::Aborted => "aborted",
            _ => "completed",
        };
        out.push(TimelineSpan {
            track: "action".into(),
            t0: x.start,
            t1: x.end,
            label,
            tag: tag.into(),
        });
    }
    for f in fixations {
        let hit = boxes.iter().find(|(_, r)| r.contains(f.centroid[0], f.centroid[1]));
        let target = hit.is_some_and(|(id, _)| {
            log.presentation(id).any(|p| f.t_start < p.t_end && f.t_end > p.t_start)
        });
        out.push(TimelineSpan {
            track: "gaze".into(),
            t0: f.t_start,
            t1: f.t_end,
            label: hit.map_or_else(|| "none".to_string(), |(id, _)| id.clone()),
            tag: if target { "target" } else { "other" }.into(),
        });
    }
    for p in &log.presentations {
        out.push(TimelineSpan {
            track: "presentation".into(),
            t0: p.t_start,
            t1: p.t_end,
            label: p.exhibit.clone(),
            tag: "interval".into(),
        });
    }
    out
}
