//! Tour manager and action manager.
//!
//! The engine walks a [`TourPlan`] element by element on a deterministic
//! discrete-event clock kept in integer microseconds. All actions of an
//! element start at the same instant; the next element is dispatched only
//! after every action of the current one has ended. Visitor tracking that
//! runs in consecutive elements is kept as a single execution.

mod blink;
mod checks;
mod engine;
mod realtime;
mod tracker;

pub use blink::{calibrate, untruncate, Blink, BlinkCause, BlinkParams, BlinkSchedule};
pub use checks::{continuity_merge, track_intervals, verify_barrier, verify_simultaneity, ContinuityError, Violation};
pub use engine::run_tour;
pub use realtime::{run_realtime, ActionWorker, RealtimeReport, SleepWorker};
pub use tracker::{HeadAim, TrackNote, TrackOutput, TrackPhase, Tracker};

use crate::geometry::{KalmanParams, Pose2};
use crate::tour_model::{ActionKind, ActionSpec};
use crate::world_sim::{GazeSample, Registry, SimConfig, VisitorConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Full,
    AudioOnly,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Full => "full",
            Condition::AudioOnly => "audio_only",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Condition::Full),
            "audio_only" | "audio-only" => Ok(Condition::AudioOnly),
            other => Err(format!("unknown condition '{other}' (expected full or audio-only)")),
        }
    }
}

/// Phase transition recorded by an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Start,
    Complete,
    Abort,
    /// Removed by the audio-only condition.
    Suppressed,
    /// Tracking lost the face for too long; head forward.
    Fallback,
    Resume,
    /// Laser circle moved to a detected centroid.
    Handoff,
    /// A blink.
    Fire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub element: Option<u32>,
    pub kind: ActionKind,
    pub exhibit: Option<String>,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presentation {
    pub exhibit: String,
    pub t_start: f64,
    pub t_end: f64,
}

impl Presentation {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "arg", rename_all = "snake_case")]
pub enum TourState {
    Idle,
    Navigating(String),
    Introducing(u32),
    Done,
}

impl TourState {
    /// Allowed successor states.
    pub fn may_follow(&self, prev: &TourState) -> bool {
        use TourState::*;
        matches!(
            (prev, self),
            (Idle, Navigating(_) | Introducing(_))
                | (Navigating(_), Introducing(_))
                | (Introducing(_), Navigating(_) | Introducing(_) | Done)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub t: f64,
    #[serde(flatten)]
    pub state: TourState,
}

/// Time span of one executed element and the action kinds it ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSpan {
    pub index: u32,
    pub t_start: f64,
    pub t_end: f64,
    pub exhibit: Option<String>,
    pub actions: Vec<ActionKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecPhase {
    Pending,
    Running,
    Completed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionExecution {
    pub action: ActionSpec,
    /// Element the execution started in.
    pub element: u32,
    /// Element the execution ended in. Differs from `element` only for
    /// visitor tracking kept across elements.
    pub last_element: u32,
    pub phase: ExecPhase,
    pub start: f64,
    pub end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub tour_id: String,
    pub condition: Condition,
    pub seed: u64,
    pub events: Vec<Event>,
    pub presentations: Vec<Presentation>,
    pub states: Vec<StateRecord>,
    pub elements: Vec<ElementSpan>,
    pub executions: Vec<ActionExecution>,
}

impl EventLog {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("event log serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Time of the final `Done` state, if the tour finished.
    pub fn duration(&self) -> Option<f64> {
        self.states
            .iter()
            .rev()
            .find(|s| s.state == TourState::Done)
            .map(|s| s.t)
    }

    pub fn presentation<'a>(&'a self, exhibit: &'a str) -> impl Iterator<Item = &'a Presentation> {
        self.presentations.iter().filter(move |p| p.exhibit == exhibit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub laser_sec_per_rev: f64,
    pub laser_samples_per_rev: usize,
    /// Laser circle radius as a fraction of the exhibit's smaller side.
    pub laser_radius_factor: f64,
    /// Detector latency after the head has reached an exhibit, s.
    pub look_detection_latency: f64,
    /// Face absence after which the head returns forward, s.
    pub fallback_timeout: f64,
    /// Delay between an element's barrier and the next dispatch, s.
    pub dispatch_gap: f64,
    pub nav_timeout: f64,
    pub max_duration: f64,
    pub blink: BlinkParams,
    pub kalman: KalmanParams,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            laser_sec_per_rev: 1.0,
            laser_samples_per_rev: 36,
            laser_radius_factor: 0.25,
            look_detection_latency: 0.3,
            fallback_timeout: 2.0,
            dispatch_gap: 0.001,
            nav_timeout: 300.0,
            max_duration: 7200.0,
            blink: BlinkParams::default(),
            kalman: KalmanParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub engine: EngineConfig,
    pub sim: SimConfig,
    pub visitor: VisitorConfig,
    /// Registered exhibit coordinates. Exhibits missing here fall back to
    /// the world file centers.
    pub registry: Registry,
    /// Robot start pose; defaults to the dock next to the first stop.
    pub start: Option<Pose2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserSample {
    pub t: f64,
    pub element: u32,
    pub exhibit: String,
    pub rev: u32,
    pub point: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadSample {
    pub t: f64,
    pub yaw: f64,
    pub pitch: f64,
    pub phase: TrackPhase,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub log: EventLog,
    pub gaze: Vec<GazeSample>,
    pub laser: Vec<LaserSample>,
    /// Head commands issued by visitor tracking.
    pub head: Vec<HeadSample>,
    /// Registry after in-tour relocalization.
    pub registry: Registry,
    pub aborted: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("world: {0}")]
    World(#[from] crate::world_sim::WorldError),
    #[error("nav point '{nav_point}' is unreachable; tour aborted at t = {t:.3} s")]
    Unreachable {
        nav_point: String,
        t: f64,
        partial: Box<RunOutcome>,
    },
}

/// RNG streams derived from one master seed.
pub mod streams {
    pub const BLINK: u64 = 0;
    pub const SENSORS: u64 = 1;
    pub const VISITOR: u64 = 2;
    pub const SURVEY: u64 = 3;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
