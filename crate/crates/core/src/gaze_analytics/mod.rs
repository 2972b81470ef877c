//! Fixation detection, per-exhibit attention metrics and condition comparison.

mod compare;
mod fixation;
mod metrics;
mod timeline;
mod trace;

pub use compare::{compare_conditions, Better, Comparison, ComparisonRow, MetricDelta, MismatchError};
pub use fixation::{detect_fixations, FixationRecord};
pub use metrics::{compute_metrics, ExhibitMetrics};
pub use timeline::{export_timeline, TimelineSpan};
pub use trace::{read_trace, write_trace};

use crate::behavior_engine::EventLog;
use crate::geometry::{Vec3, WallFrame};
use crate::tour_model::{World, WallRect};
use crate::world_sim::GazeSample;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// I-DT dispersion threshold, m on the wall.
    pub dispersion_m: f64,
    pub min_duration_s: f64,
    /// Slack allowed between the trace end and the log duration, s.
    pub time_slack_s: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            dispersion_m: 0.05,
            min_duration_s: 0.10,
            time_slack_s: 0.1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("gaze trace is empty")]
    EmptyTrace,
    #[error("gaze trace is not time ordered at sample {0}")]
    Unordered(usize),
    #[error("gaze trace spans [{t0}, {t1}] s but the event log covers [0, {log_end}] s")]
    TimeBase { t0: f64, t1: f64, log_end: f64 },
    #[error("world has no exhibits")]
    NoExhibits,
}

/// Exhibit boxes in the coordinates of the wall through the first exhibit.
pub fn exhibit_boxes(world: &World) -> Result<Vec<(String, WallRect)>, AnalysisError> {
    let first = world.exhibits.first().ok_or(AnalysisError::NoExhibits)?;
    let wall = WallFrame::new(Vec3::from(first.center), Vec3::from(first.normal));
    Ok(world
        .exhibits
        .iter()
        .map(|e| {
            let (u, v) = wall.to_wall(Vec3::from(e.center));
            (e.id.clone(), WallRect::centered(u, v, e.width, e.height))
        })
        .collect())
}

/// Rejects traces that cannot belong to `log`.
pub fn check_time_base(trace: &[GazeSample], log: &EventLog, slack: f64) -> Result<(), AnalysisError> {
    let (first, last) = match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(AnalysisError::EmptyTrace),
    };
    if let Some(i) = trace.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(AnalysisError::Unordered(i + 1));
    }
    let log_end = log
        .duration()
        .or_else(|| log.elements.last().map(|e| e.t_end))
        .unwrap_or(0.0);
    if first < -slack || last > log_end + slack || first > log_end + slack {
        return Err(AnalysisError::TimeBase {
            t0: first,
            t1: last,
            log_end,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub fixations: Vec<FixationRecord>,
    pub metrics: Vec<ExhibitMetrics>,
    pub warnings: Vec<String>,
    pub timeline: Vec<TimelineSpan>,
}

pub fn analyze(
    log: &EventLog,
    trace: &[GazeSample],
    world: &World,
    cfg: &AnalysisConfig,
) -> Result<Analysis, AnalysisError> {
    check_time_base(trace, log, cfg.time_slack_s)?;
    let boxes = exhibit_boxes(world)?;
    let fixations = detect_fixations(trace, cfg.dispersion_m, cfg.min_duration_s);
    let (metrics, warnings) = compute_metrics(&fixations, &boxes, &log.presentations);
    let timeline = export_timeline(log, &fixations, &boxes);
    Ok(Analysis {
        fixations,
        metrics,
        warnings,
        timeline,
    })
}
