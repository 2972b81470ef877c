//! Parametric visitor gaze model.
//!
//! The visitor either follows the robot (gaze off the wall), is cued to an
//! exhibit by a deictic action and settles on it after a reaction latency,
//! or searches: it scans the stop's exhibits in order of decreasing area,
//! dwelling on each label, and settles on the target once it has read the
//! target's own label.

use crate::tour_model::WallRect;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisitorConfig {
    pub latency_mean: f64,
    pub latency_sd: f64,
    /// Time spent on each label while searching, s.
    pub label_dwell: f64,
    /// Spread of where each fixation lands around its aim point, m.
    pub landing_sigma: f64,
    /// Per-sample gaze tremor, m.
    pub tremor_sigma: f64,
    /// Range of intervals between refixations on the same target, s.
    pub refixation_interval: [f64; 2],
    /// Chance per gaze sample of glancing at the robot's head while it
    /// tracks the visitor.
    pub distraction_prob: f64,
    pub distraction_duration: f64,
    /// Standing spot in the robot's body frame at a stop (forward, left), m.
    pub stand_offset: [f64; 2],
    pub walk_speed: f64,
    /// Open intervals `(t0, t1)` during which the face is hidden from the
    /// robot: visible at `t0`, visible again at `t1`.
    pub occlusions: Vec<[f64; 2]>,
}

impl Default for VisitorConfig {
    fn default() -> Self {
        Self {
            latency_mean: 0.5,
            latency_sd: 0.1,
            label_dwell: 1.2,
            landing_sigma: 0.02,
            tremor_sigma: 0.002,
            refixation_interval: [0.6, 1.6],
            distraction_prob: 2e-4,
            distraction_duration: 0.4,
            stand_offset: [1.5, 0.6],
            walk_speed: 0.6,
            occlusions: Vec::new(),
        }
    }
}

impl VisitorConfig {
    pub fn face_hidden(&self, t: f64) -> bool {
        self.occlusions.iter().any(|o| t > o[0] && t < o[1])
    }
}

/// One gaze sample in wall coordinates. Off-wall samples carry NaN
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub on_wall: bool,
}

impl GazeSample {
    pub fn off_wall(t: f64) -> Self {
        Self {
            t,
            u: f64::NAN,
            v: f64::NAN,
            on_wall: false,
        }
    }
}

/// An exhibit as the visitor sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub center: (f64, f64),
    pub label: Option<(f64, f64)>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Aim {
    Robot,
    Look(f64, f64),
    Settle { target: String, at: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    from: f64,
    aim: Aim,
}

#[derive(Debug, Clone)]
pub struct VisitorGazeModel {
    cfg: VisitorConfig,
    wall: WallRect,
    rng: ChaCha8Rng,
    plan: Vec<Segment>,
    active: usize,
    landing: (f64, f64),
    next_refix: f64,
    glance_until: f64,
    tracking: bool,
}

fn gauss(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).expect("finite sd").sample(rng)
    } else {
        0.0
    }
}

impl VisitorGazeModel {
    pub fn new(cfg: VisitorConfig, wall: WallRect, rng: ChaCha8Rng) -> Self {
        Self {
            cfg,
            wall,
            rng,
            plan: vec![Segment {
                from: f64::NEG_INFINITY,
                aim: Aim::Robot,
            }],
            active: 0,
            landing: (0.0, 0.0),
            next_refix: f64::INFINITY,
            glance_until: f64::NEG_INFINITY,
            tracking: false,
        }
    }

    pub fn config(&self) -> &VisitorConfig {
        &self.cfg
    }

    fn replace_from(&mut self, t: f64, segments: Vec<Segment>) {
        self.plan.retain(|s| s.from < t);
        if self.plan.is_empty() {
            self.plan.push(Segment {
                from: f64::NEG_INFINITY,
                aim: Aim::Robot,
            });
        }
        self.active = self.active.min(self.plan.len() - 1);
        self.plan.extend(segments);
    }

    /// Gaze returns to the robot from `t` on.
    pub fn follow_robot(&mut self, t: f64) {
        self.replace_from(t, vec![Segment { from: t, aim: Aim::Robot }]);
    }

    fn settled_on(&self, target: &str) -> bool {
        matches!(self.plan.last(), Some(Segment { aim: Aim::Settle { target: id, .. }, .. }) if id == target)
    }

    /// A deictic cue toward `target` at `t`: gaze settles on it after the
    /// reaction latency.
    pub fn cue(&mut self, t: f64, target: &Candidate) {
        if self.settled_on(&target.id) {
            return;
        }
        let latency = gauss(&mut self.rng, self.cfg.latency_sd) + self.cfg.latency_mean;
        let at = t + latency.max(0.05);
        self.replace_from(
            at,
            vec![Segment {
                from: at,
                aim: Aim::Settle {
                    target: target.id.clone(),
                    at: target.center,
                },
            }],
        );
    }

    /// Uncued presentation of `target` at `t` among the stop's `candidates`.
    pub fn search(&mut self, t: f64, target: &Candidate, candidates: &[Candidate]) {
        if self.settled_on(&target.id) {
            return;
        }
        let mut order: Vec<&Candidate> = candidates.iter().collect();
        order.sort_by(|a, b| b.area.total_cmp(&a.area).then_with(|| a.id.cmp(&b.id)));
        let dwell = self.cfg.label_dwell;
        let mut segs = Vec::new();
        let mut at = t;
        for c in order.iter().take_while(|c| c.id != target.id) {
            let (u, v) = c.label.unwrap_or(c.center);
            segs.push(Segment { from: at, aim: Aim::Look(u, v) });
            at += dwell;
        }
        if let Some((u, v)) = target.label {
            segs.push(Segment { from: at, aim: Aim::Look(u, v) });
            at += dwell;
        }
        segs.push(Segment {
            from: at,
            aim: Aim::Settle {
                target: target.id.clone(),
                at: target.center,
            },
        });
        self.replace_from(t, segs);
    }

    pub fn set_tracking(&mut self, on: bool) {
        self.tracking = on;
    }

    /// The gaze sample at time `t`. Calls must come in increasing `t`.
    pub fn sample(&mut self, t: f64) -> GazeSample {
        let idx = self.plan.iter().rposition(|s| s.from <= t).unwrap_or(0);
        if idx != self.active {
            self.active = idx;
            self.refixate(t);
        }
        let (aim, settled) = match &self.plan[idx].aim {
            Aim::Robot => return GazeSample::off_wall(t),
            Aim::Look(u, v) => ((*u, *v), false),
            Aim::Settle { at, .. } => (*at, true),
        };
        if t >= self.next_refix {
            self.refixate(t);
        }
        if settled
            && self.tracking
            && self.cfg.distraction_prob > 0.0
            && t >= self.glance_until
            && self.rng.random::<f64>() < self.cfg.distraction_prob
        {
            self.glance_until = t + self.cfg.distraction_duration;
        }
        if t < self.glance_until {
            return GazeSample::off_wall(t);
        }
        let s = self.cfg.tremor_sigma;
        let u = aim.0 + self.landing.0 + gauss(&mut self.rng, s);
        let v = aim.1 + self.landing.1 + gauss(&mut self.rng, s);
        if self.wall.contains(u, v) {
            GazeSample { t, u, v, on_wall: true }
        } else {
            GazeSample::off_wall(t)
        }
    }

    fn refixate(&mut self, t: f64) {
        let s = self.cfg.landing_sigma;
        self.landing = (gauss(&mut self.rng, s), gauss(&mut self.rng, s));
        let [lo, hi] = self.cfg.refixation_interval;
        self.next_refix = t + if hi > lo { self.rng.random_range(lo..hi) } else { lo.max(1e-3) };
    }
}
