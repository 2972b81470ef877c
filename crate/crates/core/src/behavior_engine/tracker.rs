//! Visitor face tracking for the head.

use crate::geometry::{kalman_step, FaceTrack, KalmanParams, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackPhase {
    /// No face seen yet in this execution.
    Bootstrap,
    Tracking,
    /// Face lost, coasting on the filter.
    Predicting,
    /// Face lost for longer than the timeout; head forward.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadAim {
    /// Point the head at a world point.
    At(Vec3),
    Forward,
    /// Leave the head where it is.
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackNote {
    Fallback,
    Resume,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOutput {
    pub aim: HeadAim,
    pub phase: TrackPhase,
    pub note: Option<TrackNote>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    params: KalmanParams,
    timeout_us: u64,
    track: Option<FaceTrack>,
    phase: TrackPhase,
    last_seen_us: u64,
}

impl Tracker {
    pub fn new(params: KalmanParams, timeout_s: f64, now_us: u64) -> Self {
        Self {
            params,
            timeout_us: (timeout_s * 1e6).round() as u64,
            track: None,
            phase: TrackPhase::Bootstrap,
            last_seen_us: now_us,
        }
    }

    pub fn phase(&self) -> TrackPhase {
        self.phase
    }

    pub fn track(&self) -> Option<&FaceTrack> {
        self.track.as_ref()
    }

    /// One control tick. `hint` is a coarse visitor position (costmap diff)
    /// used before the first face detection.
    pub fn tick(&mut self, now_us: u64, face: Option<Vec3>, hint: Option<Vec3>) -> TrackOutput {
        let t = now_us as f64 / 1e6;
        if let Some(m) = face {
            let note = (self.phase == TrackPhase::Fallback).then_some(TrackNote::Resume);
            let next = match self.track.take() {
                Some(tr) if self.phase != TrackPhase::Fallback && t > tr.stamp => {
                    let mut tr = kalman_step(&tr, t - tr.stamp, Some(m));
                    tr.last_seen = t;
                    tr
                }
                _ => FaceTrack::new(m, t, self.params),
            };
            let aim = HeadAim::At(next.position());
            self.track = Some(next);
            self.phase = TrackPhase::Tracking;
            self.last_seen_us = now_us;
            return TrackOutput {
                aim,
                phase: self.phase,
                note,
            };
        }

        let Some(tr) = self.track.take() else {
            let aim = hint.map_or(HeadAim::Hold, HeadAim::At);
            return TrackOutput {
                aim,
                phase: TrackPhase::Bootstrap,
                note: None,
            };
        };
        if now_us.saturating_sub(self.last_seen_us) > self.timeout_us {
            let note = (self.phase != TrackPhase::Fallback).then_some(TrackNote::Fallback);
            self.phase = TrackPhase::Fallback;
            self.track = Some(tr);
            return TrackOutput {
                aim: HeadAim::Forward,
                phase: self.phase,
                note,
            };
        }
        let tr = if t > tr.stamp { kalman_step(&tr, t - tr.stamp, None) } else { tr };
        let aim = HeadAim::At(tr.position());
        self.track = Some(tr);
        self.phase = TrackPhase::Predicting;
        TrackOutput {
            aim,
            phase: self.phase,
            note: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TICK: u64 = 100_000;

    fn face() -> Vec3 {
        Vec3::new(2.0, 0.5, 1.6)
    }

    #[test]
    fn falls_back_on_first_tick_past_timeout() {
        let mut tr = Tracker::new(KalmanParams::default(), 2.0, 0);
        let hidden = |k: u64| k > 100 && k < 150;
        let mut fallback_at = None;
        let mut resume_at = None;
        for k in 0..200 {
            let out = tr.tick(k * TICK, (!hidden(k)).then(face), None);
            match out.note {
                Some(TrackNote::Fallback) => fallback_at = Some(k),
                Some(TrackNote::Resume) => resume_at = Some(k),
                None => {}
            }
            if (101..=120).contains(&k) {
                assert!(matches!(out.aim, HeadAim::At(_)), "tick {k}");
            }
            if (121..150).contains(&k) {
                assert_eq!(out.aim, HeadAim::Forward, "tick {k}");
            }
        }
        assert_eq!(fallback_at, Some(121));
        assert_eq!(resume_at, Some(150));
    }

    #[test]
    fn bootstrap_uses_hint_then_face() {
        let mut tr = Tracker::new(KalmanParams::default(), 2.0, 0);
        let hint = Vec3::new(1.0, 1.0, 1.6);
        assert_eq!(tr.tick(0, None, Some(hint)).aim, HeadAim::At(hint));
        assert_eq!(tr.tick(TICK, None, None).aim, HeadAim::Hold);
        let out = tr.tick(2 * TICK, Some(face()), Some(hint));
        assert_eq!(out.phase, TrackPhase::Tracking);
        assert_eq!(out.aim, HeadAim::At(face()));
    }

    #[test]
    fn no_fallback_during_bootstrap() {
        let mut tr = Tracker::new(KalmanParams::default(), 2.0, 0);
        for k in 0..100 {
            assert_eq!(tr.tick(k * TICK, None, None).note, None);
        }
    }
}
