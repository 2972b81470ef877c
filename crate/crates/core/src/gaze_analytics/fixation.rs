//! Dispersion-threshold fixation identification (I-DT).

use crate::world_sim::GazeSample;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationRecord {
    pub t_start: f64,
    /// Time of the last sample in the fixation.
    pub t_end: f64,
    /// Mean wall-plane point `(u, v)`, m.
    pub centroid: [f64; 2],
    /// Largest pairwise distance between member samples, m.
    pub dispersion: f64,
}

impl FixationRecord {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

fn dist(a: &GazeSample, b: &GazeSample) -> f64 {
    (a.u - b.u).hypot(a.v - b.v)
}

fn usable(s: &GazeSample) -> bool {
    s.on_wall && s.u.is_finite() && s.v.is_finite()
}

/// Maximal windows whose diameter stays within `threshold` and that last
/// at least `min_duration`. Off-wall samples end a window.
pub fn detect_fixations(trace: &[GazeSample], threshold: f64, min_duration: f64) -> Vec<FixationRecord> {
    let n = trace.len();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < n {
        if !usable(&trace[i]) {
            i += 1;
            continue;
        }
        // Grow to the minimum duration.
        let mut j = i;
        let mut diameter: f64 = 0.0;
        while trace[j].t - trace[i].t < min_duration - 1e-9 {
            j += 1;
            if j >= n {
                break 'outer;
            }
            if !usable(&trace[j]) {
                i = j + 1;
                continue 'outer;
            }
            for k in i..j {
                diameter = diameter.max(dist(&trace[k], &trace[j]));
            }
        }
        if diameter > threshold {
            i += 1;
            continue;
        }
        // Extend while the diameter holds.
        while j + 1 < n && usable(&trace[j + 1]) {
            let reach = (i..=j).map(|k| dist(&trace[k], &trace[j + 1])).fold(0.0, f64::max);
            if reach.max(diameter) > threshold {
                break;
            }
            diameter = diameter.max(reach);
            j += 1;
        }
        let m = (j - i + 1) as f64;
        let (su, sv) = trace[i..=j].iter().fold((0.0, 0.0), |(a, b), s| (a + s.u, b + s.v));
        out.push(FixationRecord {
            t_start: trace[i].t,
            t_end: trace[j].t,
            centroid: [su / m, sv / m],
            dispersion: diameter,
        });
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(t: f64, u: f64, v: f64) -> GazeSample {
        GazeSample { t, u, v, on_wall: true }
    }

    fn run(from: f64, to: f64, u: f64, v: f64) -> Vec<GazeSample> {
        let n = ((to - from) / 0.02).round() as usize;
        (0..=n).map(|k| at(from + k as f64 * 0.02, u, v)).collect()
    }

    #[test]
    fn stationary_second_is_one_fixation() {
        let f = detect_fixations(&run(0.0, 1.0, 2.0, 1.5), 0.05, 0.1);
        assert_eq!(f.len(), 1);
        assert!((f[0].duration() - 1.0).abs() < 1e-12);
        assert_eq!(f[0].centroid, [2.0, 1.5]);
        assert_eq!(f[0].dispersion, 0.0);
    }

    #[test]
    fn saccade_splits_clusters() {
        let mut trace = run(0.0, 0.5, 1.0, 1.0);
        trace.push(at(0.52, 1.5, 1.2));
        trace.extend(run(0.54, 1.2, 2.0, 1.4));
        let f = detect_fixations(&trace, 0.05, 0.1);
        assert_eq!(f.len(), 2);
        let close = |c: [f64; 2], e: [f64; 2]| (c[0] - e[0]).hypot(c[1] - e[1]) < 1e-12;
        assert!(close(f[0].centroid, [1.0, 1.0]));
        assert!(close(f[1].centroid, [2.0, 1.4]));
        assert!(f[0].t_end < f[1].t_start);
    }

    #[test]
    fn fast_motion_has_no_fixations() {
        let trace: Vec<_> = (0..200).map(|k| at(k as f64 * 0.02, k as f64 * 0.05, 1.0)).collect();
        assert!(detect_fixations(&trace, 0.05, 0.1).is_empty());
    }

    #[test]
    fn off_wall_breaks_window() {
        let mut trace = run(0.0, 0.3, 1.0, 1.0);
        trace.push(GazeSample::off_wall(0.32));
        trace.extend(run(0.34, 0.6, 1.0, 1.0));
        let f = detect_fixations(&trace, 0.05, 0.1);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].t_end, 0.3);
        assert_eq!(f[1].t_start, 0.34);
    }

    #[test]
    fn short_run_is_rejected() {
        assert!(detect_fixations(&run(0.0, 0.06, 1.0, 1.0), 0.05, 0.1).is_empty());
        assert!(detect_fixations(&[], 0.05, 0.1).is_empty());
    }
}
