use super::FixationRecord;
use crate::behavior_engine::Presentation;
use crate::tour_model::WallRect;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhibitMetrics {
    pub exhibit: String,
    /// Time to first fixation from presentation start, s.
    pub tff: Option<f64>,
    /// Total fixation duration within the presentation, s.
    pub tfd: f64,
    /// Average fixation duration, s.
    pub afd: Option<f64>,
    /// TFD over presentation duration.
    pub r_tfd: f64,
    /// First start and last end of the presentation.
    pub presentation: [f64; 2],
    /// Total presentation time, s.
    pub presentation_s: f64,
    pub n_fixations: usize,
}

/// Per-exhibit TFF, TFD, AFD and R-TFD.
///
/// A fixation counts for an exhibit when its centroid lies in the
/// exhibit's wall box and it overlaps one of the exhibit's presentation
/// intervals; only the overlapping part is counted. When an exhibit is
/// presented in several intervals, presentation time is their sum and TFF
/// is measured in presentation time. Exhibits without a presentation are
/// skipped and reported in the second return value.
pub fn compute_metrics(
    fixations: &[FixationRecord],
    boxes: &[(String, WallRect)],
    presentations: &[Presentation],
) -> (Vec<ExhibitMetrics>, Vec<String>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (id, rect) in boxes {
        let intervals: Vec<&Presentation> = presentations.iter().filter(|p| &p.exhibit == id).collect();
        if intervals.is_empty() {
            warnings.push(format!("exhibit '{id}' has no presentation interval; skipped"));
            continue;
        }
        let valid: Vec<&FixationRecord> = fixations
            .iter()
            .filter(|f| rect.contains(f.centroid[0], f.centroid[1]))
            .collect();
        let mut tff = None;
        let mut tfd = 0.0;
        let mut count = 0;
        let mut elapsed = 0.0;
        for iv in &intervals {
            for f in &valid {
                let lo = f.t_start.max(iv.t_start);
                let hi = f.t_end.min(iv.t_end);
                if hi <= lo {
                    continue;
                }
                tfd += hi - lo;
                count += 1;
                // Onset is the fixation start when inside the interval, else the clip start.
                let onset = elapsed + (lo - iv.t_start);
                if tff.is_none_or(|t| onset < t) {
                    tff = Some(onset);
                }
            }
            elapsed += iv.duration();
        }
        let duration = elapsed;
        out.push(ExhibitMetrics {
            exhibit: id.clone(),
            tff,
            tfd,
            afd: (count > 0).then(|| tfd / count as f64),
            r_tfd: if duration > 0.0 { tfd / duration } else { 0.0 },
            presentation: [intervals[0].t_start, intervals[intervals.len() - 1].t_end],
            presentation_s: duration,
            n_fixations: count,
        });
    }
    (out, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix(a: f64, b: f64, u: f64) -> FixationRecord {
        FixationRecord {
            t_start: a,
            t_end: b,
            centroid: [u, 1.0],
            dispersion: 0.0,
        }
    }

    fn boxes() -> Vec<(String, WallRect)> {
        vec![("e".into(), WallRect::centered(0.0, 1.0, 1.0, 1.0))]
    }

    fn pres(a: f64, b: f64) -> Vec<Presentation> {
        vec![Presentation {
            exhibit: "e".into(),
            t_start: a,
            t_end: b,
        }]
    }

    #[test]
    fn single_fixation() {
        let (m, _) = compute_metrics(&[fix(2.0, 3.0, 0.0)], &boxes(), &pres(0.0, 10.0));
        let m = &m[0];
        assert_eq!((m.tff, m.tfd, m.afd, m.r_tfd), (Some(2.0), 1.0, Some(1.0), 0.1));
    }

    #[test]
    fn two_fixations() {
        let (m, _) = compute_metrics(&[fix(1.0, 2.0, 0.0), fix(4.0, 6.0, 0.0)], &boxes(), &pres(0.0, 10.0));
        let m = &m[0];
        assert_eq!((m.tff, m.tfd, m.afd, m.r_tfd), (Some(1.0), 3.0, Some(1.5), 0.3));
        assert_eq!(m.n_fixations, 2);
    }

    #[test]
    fn no_valid_fixations() {
        let (m, _) = compute_metrics(&[fix(1.0, 2.0, 5.0)], &boxes(), &pres(0.0, 10.0));
        let m = &m[0];
        assert_eq!((m.tff, m.tfd, m.afd, m.r_tfd), (None, 0.0, None, 0.0));
    }

    #[test]
    fn straddling_fixation_is_clipped() {
        let (m, _) = compute_metrics(&[fix(-1.0, 2.0, 0.0), fix(9.0, 12.0, 0.0)], &boxes(), &pres(0.0, 10.0));
        let m = &m[0];
        assert_eq!(m.tff, Some(0.0));
        assert_eq!(m.tfd, 3.0);
    }

    #[test]
    fn missing_presentation_is_skipped_with_warning() {
        let mut b = boxes();
        b.push(("other".into(), WallRect::centered(5.0, 1.0, 1.0, 1.0)));
        let (m, w) = compute_metrics(&[], &b, &pres(0.0, 10.0));
        assert_eq!(m.len(), 1);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("other"));
    }
}
