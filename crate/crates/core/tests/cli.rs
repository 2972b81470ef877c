use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn docent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docent"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compile_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&docent(d, &["compile", "--script", "tour2", "--world", "tour2", "--out", "a.json"])), 0);
    assert_eq!(code(&docent(d, &["compile", "--script", "tour2", "--world", "tour2", "--out", "b.json"])), 0);
    assert_eq!(fs::read(d.join("a.json")).unwrap(), fs::read(d.join("b.json")).unwrap());
    let lint = docent(d, &["compile", "--script", "tour2", "--world", "tour2", "--lint-only"]);
    assert_eq!(code(&lint), 0);
}

#[test]
fn unknown_tag_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "@stop duncan\nThis is [ghost_exhibit] here.\n").unwrap();
    let o = docent(dir.path(), &["compile", "--script", "s.txt", "--world", "tour1", "--out", "p.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ghost_exhibit"));
    assert!(!dir.path().join("p.json").exists());
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = docent(dir.path(), &["run", "--plan", "nope.json", "--world", "tour1", "--out", "r"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn run_rerun_analyze_compare() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&docent(d, &["compile", "--script", "tour1", "--world", "tour1", "--out", "plan.json"])), 0);
    let full = docent(d, &["run", "--plan", "plan.json", "--world", "tour1", "--seed", "7", "--out", "full"]);
    assert_eq!(code(&full), 0, "{}", stderr(&full));
    let text = String::from_utf8_lossy(&full.stdout);
    let secs: f64 = text.trim().trim_start_matches("duration: ").trim_end_matches(" s").parse().unwrap();
    assert!((secs - 300.0).abs() <= 30.0, "{secs}");

    let audio = docent(
        d,
        &["run", "--plan", "plan.json", "--world", "tour1", "--seed", "7", "--condition", "audio-only", "--out", "audio"],
    );
    assert_eq!(code(&audio), 0);
    let log = fs::read_to_string(d.join("audio/events.json")).unwrap();
    let log: serde_json::Value = serde_json::from_str(&log).unwrap();
    for x in log["executions"].as_array().unwrap() {
        let kind = x["action"]["kind"].as_str().unwrap();
        assert!(!["LookAtExhibit", "PointLaser", "TrackVisitor"].contains(&kind), "{kind}");
    }

    assert_eq!(code(&docent(d, &["rerun", "--run", "full", "--out", "again"])), 0);
    for f in ["events.json", "gaze.csv", "manifest.json", "plan.repaired.json"] {
        assert_eq!(fs::read(d.join("full").join(f)).unwrap(), fs::read(d.join("again").join(f)).unwrap(), "{f}");
    }

    assert_eq!(code(&docent(d, &["analyze", "--run", "full", "--out", "an"])), 0);
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("an/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["exhibits"].as_array().unwrap().len(), 6);
    assert!(d.join("an/timeline.json").exists());

    let same = docent(
        d,
        &["analyze", "--events", "full/events.json", "--gaze", "full/gaze.csv", "--world", "tour1", "--out", "an2"],
    );
    assert_eq!(code(&same), 0);
    assert_eq!(fs::read(d.join("an/metrics.json")).unwrap(), fs::read(d.join("an2/metrics.json")).unwrap());

    let cmp = docent(d, &["compare", "--a", "full", "--b", "audio", "--out", "cmp"]);
    assert_eq!(code(&cmp), 0);
    let table = fs::read_to_string(d.join("cmp/comparison.md")).unwrap();
    assert!(table.starts_with("| Exhibit | TFF"));
    assert!(d.join("cmp/timeline_a.json").exists() && d.join("cmp/timeline_b.json").exists());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("cmp/comparison.json")).unwrap()).unwrap();
    for row in report["rows"].as_array().unwrap() {
        assert!(row["tff"]["delta"].as_f64().unwrap() < 0.0, "{row}");
    }

    let selfcmp = docent(d, &["compare", "--a", "full", "--b", "full", "--out", "selfcmp"]);
    assert_eq!(code(&selfcmp), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("selfcmp/comparison.json")).unwrap()).unwrap();
    for row in report["rows"].as_array().unwrap() {
        for m in ["tff", "tfd", "r_tfd", "afd"] {
            assert_eq!(row[m]["delta"].as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn time_base_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&docent(d, &["compile", "--script", "tour1", "--world", "tour1", "--out", "plan.json"])), 0);
    assert_eq!(code(&docent(d, &["run", "--plan", "plan.json", "--world", "tour1", "--out", "r"])), 0);
    let shifted: String = fs::read_to_string(d.join("r/gaze.csv"))
        .unwrap()
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                return format!("{line}\n");
            }
            let (t, rest) = line.split_once(',').unwrap();
            format!("{},{rest}\n", t.parse::<f64>().unwrap() + 1000.0)
        })
        .collect();
    fs::write(d.join("late.csv"), shifted).unwrap();
    let o = docent(d, &["analyze", "--events", "r/events.json", "--gaze", "late.csv", "--world", "tour1", "--out", "x"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn registry_and_config_are_honored() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&docent(d, &["annotate", "--world", "tour1", "--seed", "3", "--out", "reg.json"])), 0);
    let mut reg: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("reg.json")).unwrap()).unwrap();
    assert_eq!(reg["coords"].as_object().unwrap().len(), 6);
    reg["coords"].as_object_mut().unwrap().remove("hw");
    fs::write(d.join("reg.json"), reg.to_string()).unwrap();
    fs::write(d.join("cfg.json"), r#"{"compiler": {"speaking_rate_wps": 3.0}}"#).unwrap();
    assert_eq!(
        code(&docent(d, &["compile", "--script", "tour1", "--world", "tour1", "--config", "cfg.json", "--out", "p.json"])),
        0
    );
    let o = docent(d, &["run", "--plan", "p.json", "--world", "tour1", "--registry", "reg.json", "--out", "r"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let secs: f64 = String::from_utf8_lossy(&o.stdout)
        .trim()
        .trim_start_matches("duration: ")
        .trim_end_matches(" s")
        .parse()
        .unwrap();
    assert!(secs < 200.0, "{secs}");
    let repaired = fs::read_to_string(d.join("r/plan.repaired.json")).unwrap();
    assert!(repaired.contains("\"relocalize\": true"));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["registry_supplied"], true);
}

#[test]
fn bad_condition_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = docent(dir.path(), &["run", "--plan", "p.json", "--world", "tour1", "--out", "r", "--condition", "loud"]);
    assert_eq!(code(&o), 2);
}
