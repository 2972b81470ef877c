//! Sensor oracles: face detector, exhibit detector with depth, and the
//! live local costmap.

use super::{PanTilt, WorldModel};
use crate::geometry::{exhibit_centroid, CameraModel, DepthImage, OccupancyGrid, PixelRect, Pose2, Vec3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct ExhibitDetection {
    pub exhibit_id: String,
    /// Detected box after jitter.
    pub bbox: PixelRect,
    /// Exact projected extent `[u_min, v_min, u_max, v_max]` before rounding.
    pub projected: [f64; 4],
    /// Centroid of the back-projected depth pixels in the box.
    pub centroid: Option<Vec3>,
}

#[derive(Debug, Clone)]
pub struct Perception {
    pub face: Option<Vec3>,
    pub exhibits: Vec<ExhibitDetection>,
    pub live_grid: OccupancyGrid,
}

fn gauss<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

impl WorldModel {
    /// Everything the robot perceives from its current state.
    pub fn sense<R: Rng>(&self, rng: &mut R) -> Perception {
        let camera = self.head_camera();
        let face = self.sense_face(&camera, rng);
        let mut exhibits = self.detect_exhibits(&camera, rng);
        for d in &mut exhibits {
            let depth = self.depth_patch(&camera, d.bbox, rng);
            d.centroid = exhibit_centroid(&depth, d.bbox, &camera).ok();
        }
        Perception {
            face,
            exhibits,
            live_grid: self.live_grid(),
        }
    }

    /// Noisy world position of the visitor's face, if the face is visible
    /// and inside the camera image.
    pub fn sense_face<R: Rng>(&self, camera: &CameraModel, rng: &mut R) -> Option<Vec3> {
        if !self.visitor.face_visible {
            return None;
        }
        let face = self.visitor.face();
        let (u, v, d) = camera.project(face)?;
        if !camera.in_image(u, v) || d > self.config.face_range {
            return None;
        }
        let s = self.config.noise.face_sigma;
        Some(face + Vec3::new(gauss(rng, s), gauss(rng, s), gauss(rng, s)))
    }

    /// Boxes of all exhibits fully inside the image and within detector
    /// range. Centroids are left empty.
    pub fn detect_exhibits<R: Rng>(&self, camera: &CameraModel, rng: &mut R) -> Vec<ExhibitDetection> {
        let mut out = Vec::new();
        for e in &self.exhibits {
            let center = Vec3::from(e.center);
            if (center - camera.origin()).norm() > self.config.detector_range {
                continue;
            }
            let (u, v) = self.wall.to_wall(center);
            let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                .map(|(a, b)| self.wall.to_world(u + a * e.width / 2.0, v + b * e.height / 2.0));
            let projected: Option<Vec<(f64, f64)>> = corners
                .iter()
                .map(|&c| camera.project(c).map(|(pu, pv, _)| (pu, pv)))
                .collect();
            let Some(pts) = projected else { continue };
            if pts.iter().any(|&(pu, pv)| !camera.in_image(pu, pv)) {
                continue;
            }
            let ext = [
                pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
                pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
                pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
                pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
            ];
            let j = self.config.noise.bbox_jitter_px;
            let (w, h) = (camera.width as f64 - 1.0, camera.height as f64 - 1.0);
            let u_min = (ext[0] + gauss(rng, j)).ceil().clamp(0.0, w);
            let v_min = (ext[1] + gauss(rng, j)).ceil().clamp(0.0, h);
            let u_max = (ext[2] + gauss(rng, j)).floor().clamp(u_min, w);
            let v_max = (ext[3] + gauss(rng, j)).floor().clamp(v_min, h);
            out.push(ExhibitDetection {
                exhibit_id: e.id.clone(),
                bbox: PixelRect {
                    u_min: u_min as u32,
                    v_min: v_min as u32,
                    u_max: u_max as u32,
                    v_max: v_max as u32,
                },
                projected: ext,
                centroid: None,
            });
        }
        out
    }

    /// Depth image that is valid only inside `bbox`, sampled from the wall
    /// plane with per-pixel noise.
    pub fn depth_patch<R: Rng>(&self, camera: &CameraModel, bbox: PixelRect, rng: &mut R) -> DepthImage {
        let mut img = DepthImage::filled(camera.width, camera.height, 0.0);
        let s = self.config.noise.depth_sigma;
        for v in bbox.v_min..=bbox.v_max {
            for u in bbox.u_min..=bbox.u_max {
                let ray = camera.pixel_ray(u as f64, v as f64);
                if let Some((_, d)) = self.wall.intersect(camera.origin(), ray) {
                    img.set(u, v, d + gauss(rng, s));
                }
            }
        }
        img
    }

    /// Detection of one exhibit from an arbitrary base pose and head angles,
    /// with its depth centroid.
    pub fn detect_from<R: Rng>(
        &self,
        pose: &Pose2,
        head: PanTilt,
        exhibit_id: &str,
        rng: &mut R,
    ) -> Option<(ExhibitDetection, DepthImage, CameraModel)> {
        let camera = self.head_camera_at(pose, head);
        let mut det = self
            .detect_exhibits(&camera, rng)
            .into_iter()
            .find(|d| d.exhibit_id == exhibit_id)?;
        let depth = self.depth_patch(&camera, det.bbox, rng);
        det.centroid = exhibit_centroid(&depth, det.bbox, &camera).ok();
        Some((det, depth, camera))
    }
}
