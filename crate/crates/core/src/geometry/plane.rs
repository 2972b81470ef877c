use super::{GeometryError, Vec3};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub normal: Vec3,
    pub centroid: Vec3,
    /// Singular values of the centered point matrix, descending.
    pub singular_values: [f64; 3],
}

/// Fits a plane through `points` by SVD of the centered 3xN matrix. The
/// normal is the left singular vector of the smallest singular value,
/// oriented so it points toward `toward` (usually the robot base).
pub fn plane_normal_svd(points: &[Vec3], toward: Vec3) -> Result<PlaneFit, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegeneratePatch("fewer than three points"));
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n;
    let m = DMatrix::from_fn(3, points.len(), |r, c| points[c][r] - centroid[r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = order.map(|i| svd.singular_values[i]);

    let scale = sv[0].max(f64::MIN_POSITIVE);
    const REL: f64 = 1e-9;
    if sv[1] <= REL * scale {
        return Err(GeometryError::DegeneratePatch("points are collinear"));
    }
    if sv[1] - sv[2] <= REL * scale {
        return Err(GeometryError::DegeneratePatch("no dominant plane"));
    }

    let c = u.column(order[2]);
    let mut normal = Vec3::new(c[0], c[1], c[2]).normalize();
    if normal.dot(&(toward - centroid)) < 0.0 {
        normal = -normal;
    }
    Ok(PlaneFit {
        normal,
        centroid,
        singular_values: sv,
    })
}

/// In-plane basis used by [`circular_path`]: `u = n x z` (or `n x x` when
/// the normal is vertical), `v = n x u`.
fn circle_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let mut u = normal.cross(&Vec3::z());
    if u.norm() < 1e-9 {
        u = normal.cross(&Vec3::x());
    }
    let u = u.normalize();
    let v = normal.cross(&u);
    (u, v)
}

/// `k * samples_per_rev` points on the circle of `radius` around `center`
/// in the plane with unit `normal`, with the angle increasing monotonically.
pub fn circular_path(
    center: Vec3,
    normal: Vec3,
    radius: f64,
    samples_per_rev: usize,
    revolutions: u32,
) -> Vec<Vec3> {
    assert!(radius > 0.0 && samples_per_rev >= 3 && revolutions >= 1);
    let normal = normal.normalize();
    let (u, v) = circle_basis(&normal);
    let total = samples_per_rev * revolutions as usize;
    (0..total)
        .map(|j| {
            let theta = std::f64::consts::TAU * (j % samples_per_rev) as f64 / samples_per_rev as f64;
            center + (u * theta.cos() + v * theta.sin()) * radius
        })
        .collect()
}

/// A planar wall with a 2D coordinate system: `u` runs horizontally along
/// the wall, `v` runs up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallFrame {
    pub origin: Vec3,
    pub normal: Vec3,
    pub u_axis: Vec3,
    pub v_axis: Vec3,
}

impl WallFrame {
    /// Builds the frame for a vertical wall through `point` with `normal`.
    /// The wall origin is the projection of the world origin's floor point.
    pub fn new(point: Vec3, normal: Vec3) -> Self {
        let normal = normal.normalize();
        let u_axis = normal.cross(&Vec3::z()).normalize();
        let v_axis = u_axis.cross(&normal);
        let origin = -normal * (-point).dot(&normal);
        Self {
            origin,
            normal,
            u_axis,
            v_axis,
        }
    }

    pub fn to_wall(&self, p: Vec3) -> (f64, f64) {
        let d = p - self.origin;
        (d.dot(&self.u_axis), d.dot(&self.v_axis))
    }

    pub fn to_world(&self, u: f64, v: f64) -> Vec3 {
        self.origin + self.u_axis * u + self.v_axis * v
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.origin).dot(&self.normal)
    }

    /// Intersects the ray `origin + t * dir`, `t > 0`, with the wall.
    pub fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<(Vec3, f64)> {
        let denom = dir.dot(&self.normal);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = -self.signed_distance(origin) / denom;
        (t > 0.0).then(|| (origin + dir * t, t))
    }
}
