//! Deterministic gallery simulator: a single gallery wall with framed
//! exhibits, a robot with a pan/tilt head and a laser gimbal, and one
//! visitor whose gaze is modeled parametrically.
//!
//! Simulation time is kept in integer microseconds by the engine; the
//! kinematic integrator here works on seconds.

mod annotate;
mod layout;
mod sense;
mod visitor;

pub use annotate::{annotate_exhibits, default_survey, Registry, SurveyPose, SurveyStop};
pub use layout::{bundled_script, bundled_world, bundled_world_text, stops_of, BUNDLED_TOURS};
pub use sense::{ExhibitDetection, Perception};
pub use visitor::{Candidate, GazeSample, VisitorConfig, VisitorGazeModel};

use crate::geometry::{
    astar_plan, wrap_angle, CameraModel, CellState, GeometryError, OccupancyGrid, Pose2, RobotGeometry,
    Vec3, WallFrame, VISITOR_FACE_HEIGHT,
};
use crate::tour_model::{Exhibit, NavPoint, WallRect, World};
use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 360,
            hfov_deg: 69.0,
            vfov_deg: 42.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorNoise {
    /// Face position noise per axis, m.
    pub face_sigma: f64,
    /// Depth noise per pixel, m.
    pub depth_sigma: f64,
    /// Bounding box edge jitter, pixels.
    pub bbox_jitter_px: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            face_sigma: 0.02,
            depth_sigma: 0.005,
            bbox_jitter_px: 2.0,
        }
    }
}

impl SensorNoise {
    pub const NONE: SensorNoise = SensorNoise {
        face_sigma: 0.0,
        depth_sigma: 0.0,
        bbox_jitter_px: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Control tick, s.
    pub tick_s: f64,
    pub gaze_rate_hz: f64,
    /// Base translation speed, m/s.
    pub base_speed: f64,
    /// In-place rotation speed, rad/s.
    pub base_turn_rate: f64,
    /// Head and laser servo slew rate, rad/s.
    pub slew_rate: f64,
    pub grid_resolution: f64,
    /// Obstacle inflation used for path planning, m.
    pub inflation: f64,
    /// Side of the square live local grid, m.
    pub local_window: f64,
    pub visitor_radius: f64,
    /// Room margin around the exhibits and nav points, m.
    pub room_margin: f64,
    /// Room depth from the gallery wall, m.
    pub room_depth: f64,
    /// Extra static obstacles, `[x_min, y_min, x_max, y_max]` in m.
    pub obstacles: Vec<[f64; 4]>,
    /// Robot start pose relative to the first stop, world `(dx, dy)`.
    pub dock_offset: [f64; 2],
    pub camera: CameraConfig,
    pub noise: SensorNoise,
    /// Maximum exhibit detection distance, m.
    pub detector_range: f64,
    /// Maximum face detection distance, m.
    pub face_range: f64,
    pub robot: RobotGeometry,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick_s: 0.1,
            gaze_rate_hz: 50.0,
            base_speed: 0.5,
            base_turn_rate: 1.0,
            slew_rate: 2.0,
            grid_resolution: 0.1,
            inflation: 0.25,
            local_window: 4.0,
            visitor_radius: 0.25,
            room_margin: 1.5,
            room_depth: 6.0,
            obstacles: Vec::new(),
            dock_offset: [1.5, 0.0],
            camera: CameraConfig::default(),
            noise: SensorNoise::default(),
            detector_range: 4.0,
            face_range: 6.0,
            robot: RobotGeometry::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("world has no exhibits")]
    Empty,
    #[error("exhibit '{0}' is {1:.3e} m off the gallery wall plane")]
    OffWall(String, f64),
    #[error("exhibit '{0}' normal differs from the gallery wall normal")]
    Normal(String),
}

/// Servo angles of a pan/tilt unit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PanTilt {
    pub yaw: f64,
    pub pitch: f64,
}

impl PanTilt {
    pub const fn new(yaw: f64, pitch: f64) -> Self {
        Self { yaw, pitch }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub pose: Pose2,
    pub head: PanTilt,
    pub laser: PanTilt,
    /// Remaining waypoints, world `(x, y)`.
    pub path: VecDeque<(f64, f64)>,
    /// Heading to turn to once the path is done.
    pub goal_heading: Option<f64>,
}

impl RobotState {
    pub fn is_idle(&self) -> bool {
        self.path.is_empty() && self.goal_heading.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisitorState {
    pub x: f64,
    pub y: f64,
    pub face_visible: bool,
    pub walk_target: Option<(f64, f64)>,
    pub speed: f64,
}

impl VisitorState {
    pub fn face(&self) -> Vec3 {
        Vec3::new(self.x, self.y, VISITOR_FACE_HEIGHT)
    }
}

/// Per-step servo targets. `None` leaves a servo where it is.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RobotCommand {
    pub head: Option<PanTilt>,
    pub laser: Option<PanTilt>,
}

#[derive(Debug, Clone)]
pub struct WorldModel {
    pub exhibits: Vec<Exhibit>,
    pub wall: WallFrame,
    /// Extent of the gallery wall in wall coordinates.
    pub wall_extent: WallRect,
    pub static_grid: OccupancyGrid,
    /// Static grid with obstacles inflated, used for planning.
    pub planning_grid: OccupancyGrid,
    pub robot: RobotState,
    pub visitor: VisitorState,
    /// Simulated time, s.
    pub clock: f64,
    pub config: SimConfig,
}

fn exhibit_normal(e: &Exhibit) -> Vec3 {
    Vec3::from(e.normal)
}

impl WorldModel {
    /// Builds the simulated gallery for `world`. The first exhibit defines
    /// the wall plane; every other exhibit must lie on it within 1e-6 m.
    pub fn new(world: &World, config: SimConfig) -> Result<Self, WorldError> {
        let first = world.exhibits.first().ok_or(WorldError::Empty)?;
        let wall = WallFrame::new(Vec3::from(first.center), exhibit_normal(first));
        for e in &world.exhibits {
            let d = wall.signed_distance(Vec3::from(e.center));
            if d.abs() > 1e-6 {
                return Err(WorldError::OffWall(e.id.clone(), d));
            }
            if (exhibit_normal(e) - wall.normal).norm() > 1e-6 {
                return Err(WorldError::Normal(e.id.clone()));
            }
        }

        let mut u_lo = f64::INFINITY;
        let mut u_hi = f64::NEG_INFINITY;
        let mut v_hi: f64 = 0.0;
        for e in &world.exhibits {
            let (u, v) = wall.to_wall(Vec3::from(e.center));
            u_lo = u_lo.min(u - e.width / 2.0);
            u_hi = u_hi.max(u + e.width / 2.0);
            v_hi = v_hi.max(v + e.height / 2.0);
            let (nu, _) = wall.to_wall(Vec3::new(e.nav_point.x, e.nav_point.y, 0.0));
            u_lo = u_lo.min(nu);
            u_hi = u_hi.max(nu);
        }
        let dock_u = {
            let n = &first.nav_point;
            wall.to_wall(Vec3::new(n.x + config.dock_offset[0], n.y + config.dock_offset[1], 0.0)).0
        };
        u_lo = u_lo.min(dock_u) - config.room_margin;
        u_hi = u_hi.max(dock_u) + config.room_margin;
        let wall_extent = WallRect {
            u_min: u_lo,
            v_min: 0.0,
            u_max: u_hi,
            v_max: v_hi + 1.0,
        };

        let static_grid = build_static_grid(&wall, &wall_extent, &config);
        let planning_grid = static_grid.inflate(config.inflation);
        let dock = dock_pose(first.nav_point, &config);
        let robot = RobotState {
            pose: dock,
            head: PanTilt::default(),
            laser: PanTilt::default(),
            path: VecDeque::new(),
            goal_heading: None,
        };
        let spot = visitor_spot(&first.nav_point, &VisitorConfig::default());
        Ok(Self {
            exhibits: world.exhibits.clone(),
            wall,
            wall_extent,
            static_grid,
            planning_grid,
            robot,
            visitor: VisitorState {
                x: spot.0,
                y: spot.1,
                face_visible: true,
                walk_target: None,
                speed: 0.6,
            },
            clock: 0.0,
            config,
        })
    }

    pub fn exhibit(&self, id: &str) -> Option<&Exhibit> {
        self.exhibits.iter().find(|e| e.id == id)
    }

    /// Wall-plane bounding box of an exhibit.
    pub fn exhibit_box(&self, e: &Exhibit) -> WallRect {
        let (u, v) = self.wall.to_wall(Vec3::from(e.center));
        WallRect::centered(u, v, e.width, e.height)
    }

    /// Places the robot (idle, servos centered) at `pose`.
    pub fn place_robot(&mut self, pose: Pose2) {
        self.robot.pose = pose;
        self.robot.path.clear();
        self.robot.goal_heading = None;
    }

    pub fn place_visitor(&mut self, x: f64, y: f64) {
        self.visitor.x = x;
        self.visitor.y = y;
        self.visitor.walk_target = None;
    }

    /// Plans an A* route on the inflated static map to `goal` and hands it
    /// to the base follower.
    pub fn plan_route(&mut self, goal: NavPoint) -> Result<(), GeometryError> {
        let grid = &self.planning_grid;
        let start = grid
            .world_to_cell(self.robot.pose.x, self.robot.pose.y)
            .ok_or(GeometryError::BlockedEndpoint)?;
        let end = grid.world_to_cell(goal.x, goal.y).ok_or(GeometryError::BlockedEndpoint)?;
        let path = astar_plan(grid, start, end)?;
        let mut waypoints: Vec<(f64, f64)> = simplify(&path.cells)
            .into_iter()
            .skip(1)
            .map(|c| grid.cell_center(c))
            .collect();
        // End exactly on the nav point instead of its cell center.
        waypoints.pop();
        waypoints.push((goal.x, goal.y));
        self.robot.path = waypoints.into();
        self.robot.goal_heading = Some(goal.heading);
        Ok(())
    }

    /// Camera model of the head camera for a given base pose and head angles.
    pub fn head_camera_at(&self, pose: &Pose2, head: PanTilt) -> CameraModel {
        let c = &self.config.camera;
        let origin = pose.to_world(self.config.robot.head_pivot());
        CameraModel::from_fov(c.width, c.height, c.hfov_deg, c.vfov_deg)
            .with_pose(optical_pose(origin, pose.theta + head.yaw, head.pitch))
    }

    pub fn head_camera(&self) -> CameraModel {
        self.head_camera_at(&self.robot.pose, self.robot.head)
    }

    /// World position of the robot's head pivot.
    pub fn head_position(&self) -> Vec3 {
        self.robot.pose.to_world(self.config.robot.head_pivot())
    }

    /// Advances the kinematics by `dt` seconds.
    pub fn step(&mut self, cmd: &RobotCommand, dt: f64) {
        let slew = self.config.slew_rate * dt;
        if let Some(target) = cmd.head {
            self.robot.head = slew_toward(self.robot.head, target, slew);
        }
        if let Some(target) = cmd.laser {
            self.robot.laser = slew_toward(self.robot.laser, target, slew);
        }
        self.drive(dt);
        self.walk_visitor(dt);
        self.clock += dt;
    }

    fn drive(&mut self, dt: f64) {
        const HEADING_TOL: f64 = 1e-6;
        const POS_TOL: f64 = 1e-9;
        let speed = self.config.base_speed;
        let turn = self.config.base_turn_rate;
        let mut budget = dt;
        let robot = &mut self.robot;
        while budget > 1e-12 {
            if let Some(&(wx, wy)) = robot.path.front() {
                let (dx, dy) = (wx - robot.pose.x, wy - robot.pose.y);
                let dist = dx.hypot(dy);
                if dist < POS_TOL {
                    robot.path.pop_front();
                    continue;
                }
                let err = wrap_angle(dy.atan2(dx) - robot.pose.theta);
                if err.abs() > HEADING_TOL {
                    let used = (err.abs() / turn).min(budget);
                    robot.pose.theta = wrap_angle(robot.pose.theta + err.signum() * used * turn);
                    budget -= used;
                    continue;
                }
                let used = (dist / speed).min(budget);
                let frac = used * speed / dist;
                if frac >= 1.0 - 1e-12 {
                    robot.pose.x = wx;
                    robot.pose.y = wy;
                    robot.path.pop_front();
                } else {
                    robot.pose.x += dx * frac;
                    robot.pose.y += dy * frac;
                }
                budget -= used;
            } else if let Some(h) = robot.goal_heading {
                let err = wrap_angle(h - robot.pose.theta);
                if err.abs() <= HEADING_TOL {
                    robot.pose.theta = h;
                    robot.goal_heading = None;
                    continue;
                }
                let used = (err.abs() / turn).min(budget);
                robot.pose.theta = wrap_angle(robot.pose.theta + err.signum() * used * turn);
                budget -= used;
            } else {
                break;
            }
        }
    }

    fn walk_visitor(&mut self, dt: f64) {
        let v = &mut self.visitor;
        if let Some((tx, ty)) = v.walk_target {
            let (dx, dy) = (tx - v.x, ty - v.y);
            let dist = dx.hypot(dy);
            let step = v.speed * dt;
            if dist <= step {
                v.x = tx;
                v.y = ty;
                v.walk_target = None;
            } else {
                v.x += dx / dist * step;
                v.y += dy / dist * step;
            }
        }
    }

    /// The live local grid around the robot: the static map inside the
    /// window plus the visitor's footprint.
    pub fn live_grid(&self) -> OccupancyGrid {
        let p = &self.robot.pose;
        let mut g = self.static_grid.window(p.x, p.y, self.config.local_window);
        g.stamp_disc(self.visitor.x, self.visitor.y, self.config.visitor_radius, CellState::Occupied);
        g
    }
}

pub fn dock_pose(first: NavPoint, config: &SimConfig) -> Pose2 {
    Pose2::new(
        first.x + config.dock_offset[0],
        first.y + config.dock_offset[1],
        first.heading,
    )
}

/// Where the visitor stands while a stop is presented: offset in the
/// robot's body frame at the nav pose.
pub fn visitor_spot(nav: &NavPoint, cfg: &VisitorConfig) -> (f64, f64) {
    let pose = Pose2::new(nav.x, nav.y, nav.heading);
    let p = pose.to_world(Vec3::new(cfg.stand_offset[0], cfg.stand_offset[1], 0.0));
    (p.x, p.y)
}

fn build_static_grid(wall: &WallFrame, extent: &WallRect, cfg: &SimConfig) -> OccupancyGrid {
    // Room corners: along the wall over the extent, and `room_depth` into the room.
    let corners = [
        wall.to_world(extent.u_min, 0.0),
        wall.to_world(extent.u_max, 0.0),
        wall.to_world(extent.u_min, 0.0) + wall.normal * cfg.room_depth,
        wall.to_world(extent.u_max, 0.0) + wall.normal * cfg.room_depth,
    ];
    let res = cfg.grid_resolution;
    let pad = 2.0 * res;
    let x0 = corners.iter().map(|c| c.x).fold(f64::INFINITY, f64::min) - pad;
    let y0 = corners.iter().map(|c| c.y).fold(f64::INFINITY, f64::min) - pad;
    let x1 = corners.iter().map(|c| c.x).fold(f64::NEG_INFINITY, f64::max) + pad;
    let y1 = corners.iter().map(|c| c.y).fold(f64::NEG_INFINITY, f64::max) + pad;
    let x0 = (x0 / res).floor() * res;
    let y0 = (y0 / res).floor() * res;
    let cols = ((x1 - x0) / res).ceil() as usize;
    let rows = ((y1 - y0) / res).ceil() as usize;
    let mut g = OccupancyGrid::new([x0, y0], res, rows, cols, CellState::Free);
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = g.cell_center((r, c));
            let p = Vec3::new(x, y, 0.0);
            let depth = wall.signed_distance(p);
            let (u, _) = wall.to_wall(p);
            let inside = depth > 0.0 && depth < cfg.room_depth && u > extent.u_min && u < extent.u_max;
            let blocked = cfg
                .obstacles
                .iter()
                .any(|o| x >= o[0] && x <= o[2] && y >= o[1] && y <= o[3]);
            if !inside || blocked {
                g.set((r, c), CellState::Occupied);
            }
        }
    }
    g
}

/// Drops intermediate cells on straight runs.
fn simplify(cells: &[(usize, usize)]) -> Vec<(usize, usize)> {
    if cells.len() < 3 {
        return cells.to_vec();
    }
    let dir = |a: (usize, usize), b: (usize, usize)| (b.0 as isize - a.0 as isize, b.1 as isize - a.1 as isize);
    let mut out = vec![cells[0]];
    for w in cells.windows(3) {
        if dir(w[0], w[1]) != dir(w[1], w[2]) {
            out.push(w[1]);
        }
    }
    out.push(*cells.last().unwrap());
    out
}

fn slew_toward(cur: PanTilt, target: PanTilt, max_step: f64) -> PanTilt {
    let mv = |c: f64, t: f64| c + (t - c).clamp(-max_step, max_step);
    PanTilt::new(mv(cur.yaw, target.yaw), mv(cur.pitch, target.pitch))
}

/// Optical-frame pose for a camera at `origin` looking along world azimuth
/// `azimuth` and elevation `pitch`.
pub fn optical_pose(origin: Vec3, azimuth: f64, pitch: f64) -> Isometry3<f64> {
    let (sa, ca) = azimuth.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let z = Vec3::new(cp * ca, cp * sa, sp);
    let x = Vec3::new(sa, -ca, 0.0);
    let y = z.cross(&x);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    Isometry3::from_parts(Translation3::from(origin), UnitQuaternion::from_rotation_matrix(&rot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::forward_ray;

    fn world() -> WorldModel {
        WorldModel::new(&bundled_world("tour1").unwrap(), SimConfig::default()).unwrap()
    }

    #[test]
    fn idle_step_only_advances_clock() {
        let mut w = world();
        let before = (w.robot.clone(), w.visitor.clone());
        w.step(&RobotCommand::default(), 0.1);
        assert_eq!((w.robot.clone(), w.visitor.clone()), before);
        assert!((w.clock - 0.1).abs() < 1e-12);
    }

    #[test]
    fn head_slews_at_rate() {
        let mut w = world();
        let cmd = RobotCommand {
            head: Some(PanTilt::new(std::f64::consts::FRAC_PI_2, 0.0)),
            laser: None,
        };
        w.step(&cmd, 0.1);
        assert!((w.robot.head.yaw - 0.2).abs() < 1e-12);
    }

    #[test]
    fn one_meter_takes_two_seconds() {
        let mut w = world();
        let p = w.robot.pose;
        w.robot.path.push_back((p.x + p.theta.cos(), p.y + p.theta.sin()));
        let mut ticks = 0;
        while !w.robot.is_idle() {
            w.step(&RobotCommand::default(), 0.1);
            ticks += 1;
        }
        assert!((19..=21).contains(&ticks), "ticks {ticks}");
    }

    #[test]
    fn camera_looks_along_head_ray() {
        let w = world();
        let pose = Pose2::new(1.0, 2.0, 0.3);
        let cam = w.head_camera_at(&pose, PanTilt::new(0.4, -0.2));
        let ahead = cam.origin() + forward_ray(0.7, -0.2) * 2.0;
        let (u, v, d) = cam.project(ahead).unwrap();
        assert!((u - cam.cx).abs() < 1e-9 && (v - cam.cy).abs() < 1e-9);
        assert!((d - 2.0).abs() < 1e-9);
        // Up in the world is up in the image (smaller v).
        let (_, v_up, _) = cam.project(ahead + Vec3::z() * 0.1).unwrap();
        assert!(v_up < cam.cy);
    }

    #[test]
    fn routes_reach_every_stop() {
        let mut w = world();
        for stop in stops_of(&w.exhibits) {
            let nav = w.exhibit(&stop).unwrap().nav_point;
            w.plan_route(nav).unwrap();
            for _ in 0..2000 {
                if w.robot.is_idle() {
                    break;
                }
                w.step(&RobotCommand::default(), 0.1);
            }
            assert!(w.robot.is_idle());
            assert!((w.robot.pose.x - nav.x).abs() < 1e-9 && (w.robot.pose.y - nav.y).abs() < 1e-9);
            assert!((w.robot.pose.theta - nav.heading).abs() < 1e-9);
        }
    }

    #[test]
    fn off_wall_exhibit_is_rejected() {
        let mut world = bundled_world("tour1").unwrap();
        world.exhibits[1].center[1] += 0.01;
        assert!(matches!(
            WorldModel::new(&world, SimConfig::default()),
            Err(WorldError::OffWall(..))
        ));
    }
}
