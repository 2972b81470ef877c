//! Domain types for tour scripts, exhibits, actions and compiled tour plans.
//!
//! A [`TourPlan`] is an ordered queue of [`SentenceElement`]s. Each element
//! binds one narration sentence to a navigation point and a set of actions
//! that the behavior engine starts simultaneously.

mod io;
mod repair;
mod validate;

pub use io::{
    load_plan, load_world, parse_plan, parse_world, plan_to_string, save_plan, save_world,
    world_to_string, PlanError,
};
pub use repair::{sanity_check_repair, RepairEntry, RepairError, RepairKind, RepairReport};
pub use validate::{validate_against_world, validate_plan, validate_world, Offense, ValidationError};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Floor pose used to present an exhibit: position in meters, heading in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavPoint {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Axis-aligned rectangle in wall-plane coordinates `(u, v)`, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallRect {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl WallRect {
    pub fn centered(u: f64, v: f64, width: f64, height: f64) -> Self {
        Self {
            u_min: u - width / 2.0,
            v_min: v - height / 2.0,
            u_max: u + width / 2.0,
            v_max: v + height / 2.0,
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.u_min + self.u_max) / 2.0, (self.v_min + self.v_max) / 2.0)
    }

    pub fn area(&self) -> f64 {
        (self.u_max - self.u_min) * (self.v_max - self.v_min)
    }
}

/// A framed picture hanging on the gallery wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhibit {
    pub id: String,
    /// World-frame center, meters.
    pub center: [f64; 3],
    pub width: f64,
    pub height: f64,
    /// Unit wall normal pointing into the room.
    pub normal: [f64; 3],
    pub nav_point: NavPoint,
    pub label_box: Option<WallRect>,
}

impl Exhibit {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// The exhibit layout of a gallery. This is the content of a world file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub exhibits: Vec<Exhibit>,
}

impl World {
    pub fn exhibit(&self, id: &str) -> Option<&Exhibit> {
        self.exhibits.iter().find(|e| e.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.exhibit(id).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    PlayAudio,
    BlinkEye,
    TrackVisitor,
    LookAtExhibit,
    PointLaser,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::PlayAudio,
        ActionKind::BlinkEye,
        ActionKind::TrackVisitor,
        ActionKind::LookAtExhibit,
        ActionKind::PointLaser,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::PlayAudio => "PlayAudio",
            ActionKind::BlinkEye => "BlinkEye",
            ActionKind::TrackVisitor => "TrackVisitor",
            ActionKind::LookAtExhibit => "LookAtExhibit",
            ActionKind::PointLaser => "PointLaser",
        }
    }

    /// Deictic actions direct the visitor toward an exhibit.
    pub fn is_deictic(self) -> bool {
        matches!(self, ActionKind::LookAtExhibit | ActionKind::PointLaser)
    }

    /// Actions removed in the audio-only condition.
    pub fn is_embodied(self) -> bool {
        matches!(
            self,
            ActionKind::TrackVisitor | ActionKind::LookAtExhibit | ActionKind::PointLaser
        )
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One co-speech action and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", deny_unknown_fields)]
pub enum ActionSpec {
    PlayAudio {
        text: String,
        duration_s: f64,
    },
    BlinkEye {},
    TrackVisitor {},
    LookAtExhibit {
        exhibit_id: String,
        #[serde(default, skip_serializing_if = "is_false")]
        relocalize: bool,
    },
    PointLaser {
        exhibit_id: String,
        revolutions: u32,
    },
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl ActionSpec {
    pub fn kind(&self) -> ActionKind {
        match self {
            ActionSpec::PlayAudio { .. } => ActionKind::PlayAudio,
            ActionSpec::BlinkEye {} => ActionKind::BlinkEye,
            ActionSpec::TrackVisitor {} => ActionKind::TrackVisitor,
            ActionSpec::LookAtExhibit { .. } => ActionKind::LookAtExhibit,
            ActionSpec::PointLaser { .. } => ActionKind::PointLaser,
        }
    }

    pub fn exhibit_id(&self) -> Option<&str> {
        match self {
            ActionSpec::LookAtExhibit { exhibit_id, .. } | ActionSpec::PointLaser { exhibit_id, .. } => {
                Some(exhibit_id)
            }
            _ => None,
        }
    }

    pub fn play_audio(text: impl Into<String>, duration_s: f64) -> Self {
        ActionSpec::PlayAudio {
            text: text.into(),
            duration_s,
        }
    }

    pub fn look_at(exhibit_id: impl Into<String>) -> Self {
        ActionSpec::LookAtExhibit {
            exhibit_id: exhibit_id.into(),
            relocalize: false,
        }
    }

    pub fn point_laser(exhibit_id: impl Into<String>, revolutions: u32) -> Self {
        ActionSpec::PointLaser {
            exhibit_id: exhibit_id.into(),
            revolutions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentenceType {
    Arrival,
    Narration,
    Departure,
}

impl SentenceType {
    pub fn is_transition(self) -> bool {
        !matches!(self, SentenceType::Narration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceElement {
    pub index: u32,
    pub text: String,
    pub sentence_type: SentenceType,
    pub nav_point: String,
    pub exhibit: Option<String>,
    pub actions: Vec<ActionSpec>,
}

impl SentenceElement {
    pub fn has(&self, kind: ActionKind) -> bool {
        self.actions.iter().any(|a| a.kind() == kind)
    }

    pub fn audio_duration(&self) -> Option<f64> {
        self.actions.iter().find_map(|a| match a {
            ActionSpec::PlayAudio { duration_s, .. } => Some(*duration_s),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TourPlan {
    pub tour_id: String,
    /// Name of the world file the plan was compiled against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhibits_ref: Option<String>,
    pub elements: Vec<SentenceElement>,
}

impl TourPlan {
    pub fn total_audio_s(&self) -> f64 {
        self.elements.iter().filter_map(|e| e.audio_duration()).sum()
    }
}
