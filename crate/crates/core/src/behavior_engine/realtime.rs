//! Real-time execution on worker threads.
//!
//! Each action of an element runs on its own worker; the element barrier is
//! a scoped join. Visitor tracking runs on a persistent worker that lives
//! across consecutive tracking elements and is stopped by a flag.

use super::{ActionExecution, Condition, ElementSpan, ExecPhase};
use crate::tour_model::{ActionKind, ActionSpec, TourPlan};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

/// Executes one action. Continuous actions must return once `stop` is set.
pub trait ActionWorker: Sync {
    fn run(&self, action: &ActionSpec, stop: &AtomicBool) -> Result<(), String>;
}

/// Worker that only sleeps for each action's nominal duration, scaled.
#[derive(Debug, Clone)]
pub struct SleepWorker {
    pub time_scale: f64,
    pub laser_sec_per_rev: f64,
    pub look_s: f64,
}

impl Default for SleepWorker {
    fn default() -> Self {
        Self {
            time_scale: 1.0,
            laser_sec_per_rev: 1.0,
            look_s: 1.0,
        }
    }
}

impl ActionWorker for SleepWorker {
    fn run(&self, action: &ActionSpec, stop: &AtomicBool) -> Result<(), String> {
        let nominal = match action {
            ActionSpec::PlayAudio { duration_s, .. } => *duration_s,
            ActionSpec::PointLaser { revolutions, .. } => *revolutions as f64 * self.laser_sec_per_rev,
            ActionSpec::LookAtExhibit { .. } => self.look_s,
            ActionSpec::BlinkEye {} => 0.0,
            ActionSpec::TrackVisitor {} => {
                while !stop.load(Ordering::Acquire) {
                    thread::sleep(Duration::from_micros(200));
                }
                return Ok(());
            }
        };
        thread::sleep(Duration::from_secs_f64(nominal * self.time_scale));
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RealtimeReport {
    pub elements: Vec<ElementSpan>,
    pub executions: Vec<ActionExecution>,
}

struct Shared {
    origin: Instant,
    executions: Mutex<Vec<ActionExecution>>,
}

impl Shared {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }

    fn finish(&self, slot: usize, result: Result<(), String>, last_element: u32) -> f64 {
        let end = self.now();
        let mut xs = self.executions.lock().expect("execution log lock");
        let x = &mut xs[slot];
        x.end = end;
        x.last_element = last_element;
        match result {
            Ok(()) => x.phase = ExecPhase::Completed,
            Err(reason) => {
                x.phase = ExecPhase::Aborted;
                x.reason = Some(reason);
            }
        }
        end
    }

    fn open(&self, action: &ActionSpec, element: u32, start: f64) -> usize {
        let mut xs = self.executions.lock().expect("execution log lock");
        xs.push(ActionExecution {
            action: action.clone(),
            element,
            last_element: element,
            phase: ExecPhase::Running,
            start,
            end: start,
            reason: None,
        });
        xs.len() - 1
    }
}

/// Runs `plan` with real threads. Times are wall-clock seconds since start.
pub fn run_realtime<W: ActionWorker>(plan: &TourPlan, worker: &W, condition: Condition) -> RealtimeReport {
    let shared = Shared {
        origin: Instant::now(),
        executions: Mutex::new(Vec::new()),
    };
    let stop = AtomicBool::new(false);
    let track_action = ActionSpec::TrackVisitor {};
    let mut elements = Vec::new();

    thread::scope(|outer| {
        let mut tracker: Option<(thread::ScopedJoinHandle<'_, ()>, usize)> = None;
        let mut prev_end = f64::NEG_INFINITY;
        for (pos, el) in plan.elements.iter().enumerate() {
            let mut start = shared.now();
            while start <= prev_end {
                start = shared.now();
            }
            let runnable: Vec<&ActionSpec> = el
                .actions
                .iter()
                .filter(|a| condition == Condition::Full || !a.kind().is_embodied())
                .collect();

            let mut ends = Vec::new();
            thread::scope(|inner| {
                let mut handles = Vec::new();
                for a in &runnable {
                    if a.kind() == ActionKind::TrackVisitor {
                        if tracker.is_none() {
                            stop.store(false, Ordering::Release);
                            let slot = shared.open(a, el.index, start);
                            let (shared, stop, worker, track_action) = (&shared, &stop, worker, &track_action);
                            let h = outer.spawn(move || {
                                let r = worker.run(track_action, stop);
                                shared.finish(slot, r, u32::MAX);
                            });
                            tracker = Some((h, slot));
                        }
                        continue;
                    }
                    let slot = shared.open(a, el.index, start);
                    let (shared, stop, index) = (&shared, &stop, el.index);
                    handles.push(inner.spawn(move || shared.finish(slot, worker.run(a, stop), index)));
                }
                for h in handles {
                    ends.push(h.join().expect("action worker panicked"));
                }
            });
            let mut end = ends.into_iter().fold(start, f64::max);

            let next_tracks = condition == Condition::Full
                && plan.elements.get(pos + 1).is_some_and(|n| n.has(ActionKind::TrackVisitor));
            if let Some((_, slot)) = &tracker {
                shared.executions.lock().expect("execution log lock")[*slot].last_element = el.index;
            }
            if !next_tracks {
                if let Some((h, slot)) = tracker.take() {
                    stop.store(true, Ordering::Release);
                    h.join().expect("tracking worker panicked");
                    let mut xs = shared.executions.lock().expect("execution log lock");
                    xs[slot].last_element = el.index;
                    end = end.max(xs[slot].end);
                }
            }
            let kinds = runnable.iter().map(|a| a.kind()).collect();
            elements.push(ElementSpan {
                index: el.index,
                t_start: start,
                t_end: end,
                exhibit: el.exhibit.clone(),
                actions: kinds,
            });
            prev_end = end;
        }
    });

    RealtimeReport {
        elements,
        executions: shared.executions.into_inner().expect("execution log lock"),
    }
}
