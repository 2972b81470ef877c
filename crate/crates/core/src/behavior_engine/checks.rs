//! Invariant checks over an [`EventLog`].

use super::{EventLog, Phase};
use crate::tour_model::ActionKind;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub element: u32,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "element {}: {}", self.element, self.message)
    }
}

/// Completion barrier: every execution that ends in element `i` ends
/// strictly before any execution of element `i + 1` starts.
pub fn verify_barrier(log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    for x in &log.executions {
        if x.end < x.start {
            out.push(Violation {
                element: x.element,
                message: format!("{} ends at {} before its start {}", x.action.kind(), x.end, x.start),
            });
        }
    }
    for w in log.elements.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.t_start <= a.t_end {
            out.push(Violation {
                element: b.index,
                message: format!("starts at {} before element {} ended at {}", b.t_start, a.index, a.t_end),
            });
        }
        let end_a = log
            .executions
            .iter()
            .filter(|x| x.last_element == a.index)
            .map(|x| x.end)
            .fold(f64::NEG_INFINITY, f64::max);
        let start_b = log
            .executions
            .iter()
            .filter(|x| x.element == b.index)
            .map(|x| x.start)
            .fold(f64::INFINITY, f64::min);
        if start_b <= end_a {
            out.push(Violation {
                element: b.index,
                message: format!("an action starts at {start_b} before element {} finished at {end_a}", a.index),
            });
        }
        if end_a > a.t_end {
            out.push(Violation {
                element: a.index,
                message: format!("an action ends at {end_a} after the element span end {}", a.t_end),
            });
        }
    }
    out
}

/// Every execution starts at the start of the element it belongs to.
pub fn verify_simultaneity(log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    for span in &log.elements {
        for x in log.executions.iter().filter(|x| x.element == span.index) {
            if x.start != span.t_start {
                out.push(Violation {
                    element: span.index,
                    message: format!("{} starts at {} instead of {}", x.action.kind(), x.start, span.t_start),
                });
            }
        }
    }
    out
}

/// Visitor-tracking executions as `(start, end, first element, last element)`.
pub fn track_intervals(log: &EventLog) -> Vec<(f64, f64, u32, u32)> {
    log.executions
        .iter()
        .filter(|x| x.action.kind() == ActionKind::TrackVisitor)
        .map(|x| (x.start, x.end, x.element, x.last_element))
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContinuityError {
    #[error("elements {0} and {1} both track the visitor but are covered by {2} tracking executions")]
    NotMerged(u32, u32, usize),
    #[error("tracking stops and restarts between elements {0} and {1}")]
    Restarted(u32, u32),
    #[error("tracking execution spans element {0}, which does not track the visitor")]
    OverMerged(u32),
}

/// Checks that visitor tracking in consecutive elements was executed as
/// one continuous interval. Merging happens online in the engine; this
/// returns the log unchanged when it holds.
pub fn continuity_merge(log: &EventLog) -> Result<EventLog, ContinuityError> {
    let tracks = track_intervals(log);
    let tracked = |i: usize| log.elements[i].actions.contains(&ActionKind::TrackVisitor);
    for i in 0..log.elements.len() {
        let idx = log.elements[i].index;
        let covering = tracks.iter().filter(|t| t.2 <= idx && idx <= t.3).count();
        if covering > 0 && !tracked(i) {
            return Err(ContinuityError::OverMerged(idx));
        }
        if i + 1 == log.elements.len() || !tracked(i) || !tracked(i + 1) {
            continue;
        }
        let next = log.elements[i + 1].index;
        let spanning = tracks.iter().filter(|t| t.2 <= idx && t.3 >= next).count();
        if spanning != 1 {
            return Err(ContinuityError::NotMerged(idx, next, spanning));
        }
        let stopped = log.events.iter().any(|e| {
            e.kind == ActionKind::TrackVisitor && e.phase == Phase::Complete && e.element == Some(idx)
        });
        let started = log.events.iter().any(|e| {
            e.kind == ActionKind::TrackVisitor && e.phase == Phase::Start && e.element == Some(next)
        });
        if stopped || started {
            return Err(ContinuityError::Restarted(idx, next));
        }
    }
    Ok(log.clone())
}
