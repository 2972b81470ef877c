use super::{wrap_angle, JointLimits, PanTiltLimits, Vec3};
use serde::{Deserialize, Serialize};

/// Planar robot pose; `theta` is the heading of the body x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    /// Expresses a world point in the body frame.
    pub fn to_body(&self, p: Vec3) -> Vec3 {
        let (s, c) = self.theta.sin_cos();
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        Vec3::new(c * dx + s * dy, -s * dx + c * dy, p.z)
    }

    pub fn to_world(&self, p: Vec3) -> Vec3 {
        let (s, c) = self.theta.sin_cos();
        Vec3::new(
            self.x + c * p.x - s * p.y,
            self.y + s * p.x + c * p.y,
            p.z,
        )
    }

    /// Rotates a body-frame direction into the world frame.
    pub fn rotate(&self, d: Vec3) -> Vec3 {
        let (s, c) = self.theta.sin_cos();
        Vec3::new(c * d.x - s * d.y, s * d.x + c * d.y, d.z)
    }

    pub fn distance(&self, other: &Pose2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Mounting points and joint ranges of the head and the laser gimbal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotGeometry {
    /// Head pan/tilt pivot height above the floor, m.
    pub head_pivot_height: f64,
    /// Laser gimbal origin in the body frame (forward, left, up), m.
    pub laser_origin: [f64; 3],
    pub head_limits: PanTiltLimits,
    pub laser_limits: PanTiltLimits,
    /// Body-frame azimuth sector `(min, max)` in degrees that the chassis
    /// blocks for the laser. Open interval.
    pub laser_blocked_deg: (f64, f64),
}

impl Default for RobotGeometry {
    fn default() -> Self {
        let deg = std::f64::consts::PI / 180.0;
        Self {
            head_pivot_height: 1.2,
            laser_origin: [0.0, 0.15, 0.9],
            head_limits: PanTiltLimits {
                yaw: JointLimits::new(-170.0 * deg, 170.0 * deg),
                pitch: JointLimits::new(-30.0 * deg, 45.0 * deg),
            },
            laser_limits: PanTiltLimits::UNLIMITED,
            laser_blocked_deg: (-150.0, -30.0),
        }
    }
}

impl RobotGeometry {
    pub fn head_pivot(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.head_pivot_height)
    }

    pub fn laser_pivot(&self) -> Vec3 {
        Vec3::from(self.laser_origin)
    }

    /// A world point expressed relative to the head pivot, body axes.
    pub fn in_head_frame(&self, pose: &Pose2, p: Vec3) -> Vec3 {
        pose.to_body(p) - self.head_pivot()
    }

    pub fn in_laser_frame(&self, pose: &Pose2, p: Vec3) -> Vec3 {
        pose.to_body(p) - self.laser_pivot()
    }
}

/// True iff the target's body-frame azimuth lies outside the blocked sector.
/// Sector boundaries count as reachable.
pub fn laser_reachable(target: Vec3, robot: &Pose2, geometry: &RobotGeometry) -> bool {
    let b = robot.to_body(target);
    let az = wrap_angle(b.y.atan2(b.x));
    let (lo, hi) = geometry.laser_blocked_deg;
    let (lo, hi) = (lo.to_radians(), hi.to_radians());
    const EPS: f64 = 1e-9;
    !(az > lo + EPS && az < hi - EPS)
}
