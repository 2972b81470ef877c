//! Pre-tour survey that registers exhibit coordinates from detections.

use super::{layout::stops_of, PanTilt, WorldModel};
use crate::geometry::{Pose2, Vec3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Registered exhibit coordinates, world frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub coords: BTreeMap<String, [f64; 3]>,
}

impl Registry {
    pub fn ids(&self) -> BTreeSet<String> {
        self.coords.keys().cloned().collect()
    }

    pub fn get(&self, id: &str) -> Option<Vec3> {
        self.coords.get(id).map(|&c| Vec3::from(c))
    }

    pub fn insert(&mut self, id: &str, p: Vec3) {
        self.coords.insert(id.to_string(), [p.x, p.y, p.z]);
    }

    pub fn remove(&mut self, id: &str) -> Option<[f64; 3]> {
        self.coords.remove(id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyPose {
    pub pose: Pose2,
    /// Head angles to hold while the detector runs.
    pub head: Vec<PanTilt>,
}

/// Survey poses grouped by the stop they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyStop {
    pub stop: String,
    pub poses: Vec<SurveyPose>,
}

/// Distance from the wall at which the survey views each exhibit, m.
const SURVEY_DISTANCE: f64 = 3.0;

/// One level, frontal view per exhibit, grouped by stop in world order.
/// A level camera keeps the image plane parallel to the wall, so pixel
/// centroids are unbiased.
pub fn default_survey(world: &WorldModel) -> Vec<SurveyStop> {
    let heading = (-world.wall.normal.y).atan2(-world.wall.normal.x);
    stops_of(&world.exhibits)
        .into_iter()
        .map(|stop| {
            let nav = world.exhibit(&stop).expect("stop is an exhibit").nav_point;
            let poses = world
                .exhibits
                .iter()
                .filter(|e| e.nav_point == nav)
                .map(|e| {
                    let c = Vec3::from(e.center);
                    let p = c + world.wall.normal * SURVEY_DISTANCE;
                    SurveyPose {
                        pose: Pose2::new(p.x, p.y, heading),
                        head: vec![PanTilt::new(0.0, 0.0)],
                    }
                })
                .collect();
            SurveyStop { stop, poses }
        })
        .collect()
}

/// Runs the detector at every survey view. Each exhibit is registered
/// from the view where its box is closest to the image center.
pub fn annotate_exhibits<R: Rng>(world: &WorldModel, survey: &[SurveyStop], rng: &mut R) -> Registry {
    let mut best: BTreeMap<String, (f64, Vec3)> = BTreeMap::new();
    for view in survey.iter().flat_map(|s| &s.poses) {
        for &head in &view.head {
            let camera = world.head_camera_at(&view.pose, head);
            for mut det in world.detect_exhibits(&camera, rng) {
                let depth = world.depth_patch(&camera, det.bbox, rng);
                det.centroid = crate::geometry::exhibit_centroid(&depth, det.bbox, &camera).ok();
                let Some(c) = det.centroid else { continue };
                let (bu, bv) = det.bbox.center();
                let off = (bu - camera.cx).hypot(bv - camera.cy);
                let slot = best.entry(det.exhibit_id).or_insert((f64::INFINITY, c));
                if off < slot.0 {
                    *slot = (off, c);
                }
            }
        }
    }
    let mut reg = Registry::default();
    for (id, (_, c)) in best {
        reg.insert(&id, c);
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::super::{bundled_world, SensorNoise, SimConfig};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn world(noise: SensorNoise) -> WorldModel {
        let cfg = SimConfig {
            noise,
            ..Default::default()
        };
        WorldModel::new(&bundled_world("tour1").unwrap(), cfg).unwrap()
    }

    #[test]
    fn skipping_last_stop_leaves_its_exhibits_out() {
        let w = world(SensorNoise::default());
        let mut survey = default_survey(&w);
        let last = survey.pop().unwrap();
        let reg = annotate_exhibits(&w, &survey, &mut ChaCha8Rng::seed_from_u64(3));
        let nav = w.exhibit(&last.stop).unwrap().nav_point;
        for e in &w.exhibits {
            assert_eq!(reg.coords.contains_key(&e.id), e.nav_point != nav, "{}", e.id);
        }
    }

    #[test]
    fn noiseless_registration_lies_on_the_wall() {
        let w = world(SensorNoise::NONE);
        let reg = annotate_exhibits(&w, &default_survey(&w), &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(reg.coords.len(), w.exhibits.len());
        for e in &w.exhibits {
            let p = reg.get(&e.id).unwrap();
            assert!(w.wall.signed_distance(p).abs() < 1e-6);
            assert!((p - Vec3::from(e.center)).norm() < 0.01, "{}: {}", e.id, (p - Vec3::from(e.center)).norm());
        }
    }
}
