//! Constant-velocity Kalman filter for the visitor's face position.

use super::Vec3;
use nalgebra::{Matrix3, Matrix3x6, Matrix6, Vector6};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KalmanParams {
    /// White-acceleration process noise, m/s^2.
    pub q: f64,
    /// Measurement noise standard deviation, m.
    pub r: f64,
    /// Velocity variance assigned when a track is created, (m/s)^2.
    pub initial_velocity_var: f64,
}

impl Default for KalmanParams {
    fn default() -> Self {
        Self {
            q: 0.5,
            r: 0.05,
            initial_velocity_var: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceTrack {
    /// `[px, py, pz, vx, vy, vz]`.
    pub state: Vector6<f64>,
    pub covariance: Matrix6<f64>,
    /// Time the state refers to, s.
    pub stamp: f64,
    /// Time of the last accepted measurement, s.
    pub last_seen: f64,
    pub params: KalmanParams,
}

impl FaceTrack {
    /// Starts a track at a first detection.
    pub fn new(position: Vec3, t: f64, params: KalmanParams) -> Self {
        let mut state = Vector6::zeros();
        state.fixed_rows_mut::<3>(0).copy_from(&position);
        let mut covariance = Matrix6::zeros();
        let pv = params.r * params.r;
        for i in 0..3 {
            covariance[(i, i)] = pv;
            covariance[(i + 3, i + 3)] = params.initial_velocity_var;
        }
        Self {
            state,
            covariance,
            stamp: t,
            last_seen: t,
            params,
        }
    }

    pub fn position(&self) -> Vec3 {
        self.state.fixed_rows::<3>(0).into_owned()
    }

    pub fn velocity(&self) -> Vec3 {
        self.state.fixed_rows::<3>(3).into_owned()
    }
}

/// Predicts `dt` seconds ahead and, when a finite measurement is given,
/// fuses it. Non-finite measurements are ignored.
pub fn kalman_step(track: &FaceTrack, dt: f64, measurement: Option<Vec3>) -> FaceTrack {
    assert!(dt > 0.0, "kalman_step requires dt > 0");
    let p = &track.params;
    let mut f = Matrix6::identity();
    for i in 0..3 {
        f[(i, i + 3)] = dt;
    }
    let q2 = p.q * p.q;
    let mut q = Matrix6::zeros();
    for i in 0..3 {
        q[(i, i)] = q2 * dt.powi(4) / 4.0;
        q[(i, i + 3)] = q2 * dt.powi(3) / 2.0;
        q[(i + 3, i)] = q2 * dt.powi(3) / 2.0;
        q[(i + 3, i + 3)] = q2 * dt * dt;
    }

    let mut state = f * track.state;
    let mut cov = f * track.covariance * f.transpose() + q;
    let stamp = track.stamp + dt;
    let mut last_seen = track.last_seen;

    if let Some(z) = measurement.filter(|z| z.iter().all(|c| c.is_finite())) {
        let h = Matrix3x6::<f64>::identity();
        let r = Matrix3::identity() * (p.r * p.r);
        let innovation = z - h * state;
        let s = h * cov * h.transpose() + r;
        let s_inv = s
            .try_inverse()
            .expect("innovation covariance is positive definite");
        let k = cov * h.transpose() * s_inv;
        state += k * innovation;
        // Joseph form keeps the covariance symmetric positive semi-definite.
        let i_kh = Matrix6::identity() - k * h;
        cov = i_kh * cov * i_kh.transpose() + k * r * k.transpose();
        last_seen = stamp;
    }
    cov = (cov + cov.transpose()) * 0.5;

    FaceTrack {
        state,
        covariance: cov,
        stamp,
        last_seen,
        params: *p,
    }
}
