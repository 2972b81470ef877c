//! Numeric kernels shared by the engine and the simulator.
//!
//! Frames: the world frame has `z` up. The robot body frame has `x`
//! forward, `y` left, `z` up, with its origin on the floor under the base.
//! Camera optical frames have `z` forward, `x` right, `y` down.

mod astar;
mod camera;
mod grid;
mod ik;
mod kalman;
mod mounts;
mod plane;

pub use astar::{astar_plan, GridPath};
pub use camera::{exhibit_centroid, CameraModel, DepthImage, PixelRect};
pub use grid::{visitor_from_costmap_diff, CellState, GridCell, OccupancyGrid, VISITOR_FACE_HEIGHT};
pub use ik::{forward_ray, pan_tilt_ik, JointLimits, PanTiltLimits, PanTiltTarget};
pub use kalman::{kalman_step, FaceTrack, KalmanParams};
pub use mounts::{laser_reachable, Pose2, RobotGeometry};
pub use plane::{circular_path, plane_normal_svd, PlaneFit, WallFrame};

pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("target coincides with the pivot origin")]
    DegenerateTarget,
    #[error("degenerate point patch: {0}")]
    DegeneratePatch(&'static str),
    #[error("no valid depth inside the bounding box")]
    NoDepth,
    #[error("bounding box lies outside the image")]
    BoxOutsideImage,
    #[error("grid resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(f64, f64),
    #[error("start or goal cell is not free")]
    BlockedEndpoint,
    #[error("goal is unreachable from start")]
    UnreachableGoal,
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}
