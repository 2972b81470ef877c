use super::{GeometryError, Vec3};
use nalgebra::{Isometry3, Point3};

/// Pinhole camera with its pose in the world. The pose maps optical-frame
/// points (z forward, x right, y down) into the world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub pose: Isometry3<f64>,
}

impl CameraModel {
    /// Intrinsics from a field of view in degrees.
    pub fn from_fov(width: u32, height: u32, hfov_deg: f64, vfov_deg: f64) -> Self {
        let cx = width as f64 / 2.0;
        let cy = height as f64 / 2.0;
        Self {
            fx: cx / (hfov_deg.to_radians() / 2.0).tan(),
            fy: cy / (vfov_deg.to_radians() / 2.0).tan(),
            cx,
            cy,
            width,
            height,
            pose: Isometry3::identity(),
        }
    }

    pub fn with_pose(mut self, pose: Isometry3<f64>) -> Self {
        self.pose = pose;
        self
    }

    /// Optical-frame point for pixel `(u, v)` at depth `d`.
    pub fn back_project(&self, u: f64, v: f64, d: f64) -> Vec3 {
        Vec3::new((u - self.cx) * d / self.fx, (v - self.cy) * d / self.fy, d)
    }

    /// Pixel coordinates and depth of a world point, if it lies in front.
    pub fn project(&self, world: Vec3) -> Option<(f64, f64, f64)> {
        let p = self.pose.inverse_transform_point(&Point3::from(world));
        (p.z > 1e-9).then(|| (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy, p.z))
    }

    /// World-frame ray direction through pixel `(u, v)`, scaled so its
    /// optical z component is 1 (the ray parameter then equals depth).
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vec3 {
        self.pose.rotation * self.back_project(u, v, 1.0)
    }

    pub fn origin(&self) -> Vec3 {
        self.pose.translation.vector
    }

    pub fn in_image(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }
}

/// Depth image, meters along the optical axis. Zero, negative or
/// non-finite entries are invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl DepthImage {
    pub fn filled(width: u32, height: u32, depth: f64) -> Self {
        Self {
            width,
            height,
            data: vec![depth; (width * height) as usize],
        }
    }

    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.data[(v * self.width + u) as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, d: f64) {
        self.data[(v * self.width + u) as usize] = d;
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub u_min: u32,
    pub v_min: u32,
    pub u_max: u32,
    pub v_max: u32,
}

impl PixelRect {
    pub fn center(&self) -> (f64, f64) {
        (
            (self.u_min + self.u_max) as f64 / 2.0,
            (self.v_min + self.v_max) as f64 / 2.0,
        )
    }
}

/// Mean of the world points back-projected from every valid depth pixel
/// inside `bbox`.
pub fn exhibit_centroid(
    depth: &DepthImage,
    bbox: PixelRect,
    camera: &CameraModel,
) -> Result<Vec3, GeometryError> {
    if bbox.u_min > bbox.u_max
        || bbox.v_min > bbox.v_max
        || bbox.u_max >= depth.width
        || bbox.v_max >= depth.height
    {
        return Err(GeometryError::BoxOutsideImage);
    }
    let mut sum = Vec3::zeros();
    let mut count = 0usize;
    for v in bbox.v_min..=bbox.v_max {
        for u in bbox.u_min..=bbox.u_max {
            let d = depth.get(u, v);
            if d.is_finite() && d > 0.0 {
                let p = camera.back_project(u as f64, v as f64, d);
                sum += camera.pose.transform_point(&Point3::from(p)).coords;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(GeometryError::NoDepth);
    }
    Ok(sum / count as f64)
}
