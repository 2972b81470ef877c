use super::{GeometryError, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub min: f64,
    pub max: f64,
}

impl JointLimits {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn clamp(&self, v: f64) -> (f64, bool) {
        if v < self.min {
            (self.min, true)
        } else if v > self.max {
            (self.max, true)
        } else {
            (v, false)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanTiltLimits {
    pub yaw: JointLimits,
    pub pitch: JointLimits,
}

impl PanTiltLimits {
    pub const UNLIMITED: PanTiltLimits = PanTiltLimits {
        yaw: JointLimits::new(-std::f64::consts::PI, std::f64::consts::PI),
        pitch: JointLimits::new(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
    };
}

/// Joint angles for a two-axis gimbal. `clamped` is set when either joint
/// hit its limit, in which case the ray no longer passes through the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanTiltTarget {
    /// Left positive.
    pub yaw: f64,
    /// Up positive.
    pub pitch: f64,
    pub clamped: bool,
}

impl PanTiltTarget {
    pub const FORWARD: PanTiltTarget = PanTiltTarget {
        yaw: 0.0,
        pitch: 0.0,
        clamped: false,
    };
}

/// Solves yaw/pitch so the gimbal's forward ray passes through `target`,
/// expressed in the pivot frame (x forward, y left, z up).
pub fn pan_tilt_ik(target: Vec3, limits: &PanTiltLimits) -> Result<PanTiltTarget, GeometryError> {
    let planar = target.x.hypot(target.y);
    if planar == 0.0 && target.z == 0.0 {
        return Err(GeometryError::DegenerateTarget);
    }
    let yaw = target.y.atan2(target.x);
    let pitch = target.z.atan2(planar);
    let (yaw, cy) = limits.yaw.clamp(yaw);
    let (pitch, cp) = limits.pitch.clamp(pitch);
    Ok(PanTiltTarget {
        yaw,
        pitch,
        clamped: cy || cp,
    })
}

/// Unit ray of the gimbal at the given joint angles.
pub fn forward_ray(yaw: f64, pitch: f64) -> Vec3 {
    Vec3::new(pitch.cos() * yaw.cos(), pitch.cos() * yaw.sin(), pitch.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn ik(x: f64, y: f64, z: f64) -> PanTiltTarget {
        pan_tilt_ik(Vec3::new(x, y, z), &PanTiltLimits::UNLIMITED).unwrap()
    }

    #[test]
    fn forward_axis() {
        let t = ik(1.0, 0.0, 0.0);
        assert_eq!((t.yaw, t.pitch), (0.0, 0.0));
    }

    #[test]
    fn pure_left() {
        let t = ik(0.0, 1.0, 0.0);
        assert!((t.yaw - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(t.pitch, 0.0);
    }

    #[test]
    fn diagonal_up_left() {
        let t = ik(1.0, 1.0, 2f64.sqrt());
        assert!((t.yaw - FRAC_PI_4).abs() < 1e-15);
        assert!((t.pitch - FRAC_PI_4).abs() < 1e-15);
        let ray = forward_ray(t.yaw, t.pitch);
        let dir = Vec3::new(1.0, 1.0, 2f64.sqrt()).normalize();
        assert!(ray.angle(&dir) < 1e-9);
    }

    #[test]
    fn origin_is_degenerate() {
        assert_eq!(
            pan_tilt_ik(Vec3::zeros(), &PanTiltLimits::UNLIMITED),
            Err(GeometryError::DegenerateTarget)
        );
    }

    #[test]
    fn clamping_is_reported() {
        let limits = PanTiltLimits {
            yaw: JointLimits::new(-1.0, 1.0),
            pitch: JointLimits::new(-0.5, 0.5),
        };
        let t = pan_tilt_ik(Vec3::new(0.0, 1.0, 0.0), &limits).unwrap();
        assert!(t.clamped);
        assert_eq!(t.yaw, 1.0);
        let t = pan_tilt_ik(Vec3::new(1.0, 0.1, 0.1), &limits).unwrap();
        assert!(!t.clamped);
    }
}
