use super::ExhibitMetrics;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Better {
    A,
    B,
    Tie,
}

impl Better {
    fn label(self) -> &'static str {
        match self {
            Better::A => "a better",
            Better::B => "b better",
            Better::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `a - b` when both are present.
    pub delta: Option<f64>,
    pub better: Better,
}

impl MetricDelta {
    /// An absent value ranks worst.
    fn new(a: Option<f64>, b: Option<f64>, lower_is_better: bool) -> Self {
        let key = |x: Option<f64>| match (x, lower_is_better) {
            (Some(v), true) => -v,
            (Some(v), false) => v,
            (None, _) => f64::NEG_INFINITY,
        };
        let better = match key(a).partial_cmp(&key(b)) {
            Some(std::cmp::Ordering::Greater) => Better::A,
            Some(std::cmp::Ordering::Less) => Better::B,
            _ => Better::Tie,
        };
        Self {
            a,
            b,
            delta: a.zip(b).map(|(x, y)| x - y),
            better,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub exhibit: String,
    pub tff: MetricDelta,
    pub tfd: MetricDelta,
    pub r_tfd: MetricDelta,
    pub afd: MetricDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("exhibit sets differ: only in a {only_a:?}, only in b {only_b:?}")]
pub struct MismatchError {
    pub only_a: Vec<String>,
    pub only_b: Vec<String>,
}

/// Side-by-side metrics with deltas `a - b`. TFF is better when lower, the
/// others when higher. Rows follow the order of `a`.
pub fn compare_conditions(
    a: &[ExhibitMetrics],
    b: &[ExhibitMetrics],
    label_a: &str,
    label_b: &str,
) -> Result<Comparison, MismatchError> {
    let ids_a: BTreeSet<&str> = a.iter().map(|m| m.exhibit.as_str()).collect();
    let ids_b: BTreeSet<&str> = b.iter().map(|m| m.exhibit.as_str()).collect();
    if ids_a != ids_b {
        return Err(MismatchError {
            only_a: ids_a.difference(&ids_b).map(|s| s.to_string()).collect(),
            only_b: ids_b.difference(&ids_a).map(|s| s.to_string()).collect(),
        });
    }
    let rows = a
        .iter()
        .map(|ma| {
            let mb = b.iter().find(|m| m.exhibit == ma.exhibit).expect("same exhibit sets");
            ComparisonRow {
                exhibit: ma.exhibit.clone(),
                tff: MetricDelta::new(ma.tff, mb.tff, true),
                tfd: MetricDelta::new(Some(ma.tfd), Some(mb.tfd), false),
                r_tfd: MetricDelta::new(Some(ma.r_tfd), Some(mb.r_tfd), false),
                afd: MetricDelta::new(ma.afd, mb.afd, false),
            }
        })
        .collect();
    Ok(Comparison {
        label_a: label_a.into(),
        label_b: label_b.into(),
        rows,
    })
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn signed(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:+.2}"))
}

impl Comparison {
    /// Markdown table with columns TFF, TFD (R-TFD), AFD per condition.
    pub fn to_markdown(&self) -> String {
        let (a, b) = (&self.label_a, &self.label_b);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "| Exhibit | TFF {a} | TFF {b} | ΔTFF | TFD (R-TFD) {a} | TFD (R-TFD) {b} | ΔTFD | AFD {a} | AFD {b} | ΔAFD |"
        );
        let _ = writeln!(s, "|---|---:|---:|---|---:|---:|---|---:|---:|---|");
        for r in &self.rows {
            let tfd = |x: Option<f64>, ratio: Option<f64>| format!("{} ({})", num(x), num(ratio));
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} ({}) | {} | {} | {} ({}) | {} | {} | {} ({}) |",
                r.exhibit,
                num(r.tff.a),
                num(r.tff.b),
                signed(r.tff.delta),
                r.tff.better.label(),
                tfd(r.tfd.a, r.r_tfd.a),
                tfd(r.tfd.b, r.r_tfd.b),
                signed(r.tfd.delta),
                r.tfd.better.label(),
                num(r.afd.a),
                num(r.afd.b),
                signed(r.afd.delta),
                r.afd.better.label(),
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(id: &str, tff: Option<f64>, tfd: f64) -> ExhibitMetrics {
        ExhibitMetrics {
            exhibit: id.into(),
            tff,
            tfd,
            afd: Some(tfd / 2.0),
            r_tfd: tfd / 10.0,
            presentation: [0.0, 10.0],
            presentation_s: 10.0,
            n_fixations: 2,
        }
    }

    #[test]
    fn self_comparison_has_zero_deltas() {
        let a = vec![m("x", Some(1.0), 3.0), m("y", None, 0.0)];
        let c = compare_conditions(&a, &a, "full", "audio").unwrap();
        for r in &c.rows {
            for d in [&r.tfd, &r.r_tfd] {
                assert_eq!(d.delta, Some(0.0));
                assert_eq!(d.better, Better::Tie);
            }
        }
        assert_eq!(c.rows[0].tff.delta, Some(0.0));
    }

    #[test]
    fn lower_tff_wins() {
        let c = compare_conditions(&[m("duncan", Some(2.02), 3.0)], &[m("duncan", Some(6.92), 3.0)], "a", "b").unwrap();
        let d = &c.rows[0].tff;
        assert!((d.delta.unwrap() - -4.90).abs() < 1e-9);
        assert_eq!(d.better, Better::A);
        assert!(c.to_markdown().contains("-4.90 (a better)"));
    }

    #[test]
    fn disjoint_sets_are_an_error() {
        let e = compare_conditions(&[m("x", None, 0.0)], &[m("y", None, 0.0)], "a", "b").unwrap_err();
        assert_eq!(e.only_a, ["x"]);
        assert_eq!(e.only_b, ["y"]);
    }
}
