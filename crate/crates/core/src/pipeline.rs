//! End-to-end wiring: compile, annotate, repair, run, analyze, compare.

use crate::behavior_engine::{run_tour, stream_rng, streams, Condition, EngineConfig, EventLog, RunError, RunOptions, RunOutcome};
use crate::gaze_analytics::{
    analyze, compare_conditions, read_trace, write_trace, Analysis, AnalysisConfig, AnalysisError, Comparison,
    ExhibitMetrics, MismatchError,
};
use crate::script_compiler::{pattern_lint, CompileError, CompilerBackend, CompilerConfig, RawScript, RuleBackend};
use crate::tour_model::{
    load_world, parse_plan, parse_world, plan_to_string, sanity_check_repair, world_to_string, PlanError,
    RepairError, RepairReport, TourPlan, ValidationError, World,
};
use crate::world_sim::{
    annotate_exhibits, bundled_script, bundled_world, default_survey, GazeSample, Registry, SimConfig, VisitorConfig, WorldError,
    WorldModel,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

/// Every tunable parameter, grouped by module. Missing fields take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub compiler: CompilerConfig,
    pub sim: SimConfig,
    pub engine: EngineConfig,
    pub visitor: VisitorConfig,
    pub analysis: AnalysisConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum DocentError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(String),
}

impl DocentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            DocentError::Validation(_) => 2,
            DocentError::Runtime(_) => 3,
            DocentError::Io(_) => 4,
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        DocentError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<PlanError> for DocentError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Io { .. } => DocentError::Io(e.to_string()),
            _ => DocentError::Validation(e.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for DocentError {
            fn from(e: $t) -> Self {
                DocentError::Validation(e.to_string())
            }
        }
    )*};
}
validation_from!(CompileError, ValidationError, RepairError, AnalysisError, MismatchError);

impl From<WorldError> for DocentError {
    fn from(e: WorldError) -> Self {
        DocentError::Runtime(e.to_string())
    }
}

pub type Result<T, E = DocentError> = std::result::Result<T, E>;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| DocentError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| DocentError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| DocentError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types always serialize");
    s.push('\n');
    s
}

fn from_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| DocentError::Validation(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        from_json(path)
    }

    /// Digest of every parameter that affects a run.
    pub fn digest(&self) -> String {
        sha256_hex(to_json(self).as_bytes())
    }
}

/// A path, or the name of a bundled layout (`tour1`, `tour2`).
pub fn resolve_world(spec: &str) -> Result<World> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Ok(w) = bundled_world(spec) {
            return Ok(w);
        }
    }
    Ok(load_world(path)?)
}

/// A path, or the name of a bundled script.
pub fn resolve_script(spec: &str) -> Result<String> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(s) = bundled_script(spec) {
            return Ok(s.to_string());
        }
    }
    read_text(path)
}

pub fn world_hash(world: &World) -> String {
    sha256_hex(world_to_string(world).as_bytes())
}

/// Compiles with the rule backend; any lint finding is an error.
pub fn compile(script_text: &str, default_id: &str, world: &World, cfg: &CompilerConfig) -> Result<TourPlan> {
    let script = RawScript::parse(script_text, default_id);
    let plan = RuleBackend::new(cfg.clone()).compile(&script, world)?;
    let findings = pattern_lint(&plan);
    if !findings.is_empty() {
        let list: Vec<String> = findings.iter().map(|f| f.to_string()).collect();
        return Err(DocentError::Validation(list.join("; ")));
    }
    Ok(plan)
}

/// Pre-tour survey with the seed's survey stream.
pub fn annotate(world: &World, sim: &SimConfig, seed: u64) -> Result<Registry> {
    let model = WorldModel::new(world, sim.clone())?;
    let survey = default_survey(&model);
    let mut rng = stream_rng(seed, streams::SURVEY);
    Ok(annotate_exhibits(&model, &survey, &mut rng))
}

pub struct RunProduct {
    pub plan: TourPlan,
    pub repair: RepairReport,
    pub registry: Registry,
    pub outcome: RunOutcome,
}

/// Repairs `plan` against the registry (surveyed when absent) and runs it.
/// An unreachable stop returns the partial outcome next to the error.
pub fn run(
    plan: &TourPlan,
    world: &World,
    condition: Condition,
    seed: u64,
    cfg: &Config,
    registry: Option<Registry>,
) -> std::result::Result<RunProduct, (DocentError, Option<Box<RunProduct>>)> {
    let registry = match registry {
        Some(r) => r,
        None => annotate(world, &cfg.sim, seed).map_err(|e| (e, None))?,
    };
    let (repaired, repair) =
        sanity_check_repair(plan, &registry.ids(), world).map_err(|e| (DocentError::from(e), None))?;
    let opts = RunOptions {
        engine: cfg.engine.clone(),
        sim: cfg.sim.clone(),
        visitor: cfg.visitor.clone(),
        registry: registry.clone(),
        start: None,
    };
    match run_tour(&repaired, world, condition, seed, opts) {
        Ok(outcome) => Ok(RunProduct {
            plan: repaired,
            repair,
            registry,
            outcome,
        }),
        Err(RunError::Unreachable { nav_point, t, partial }) => Err((
            DocentError::Runtime(format!("nav point '{nav_point}' unreachable at t = {t:.3} s; tour aborted")),
            Some(Box::new(RunProduct {
                plan: repaired,
                repair,
                registry,
                outcome: *partial,
            })),
        )),
        Err(RunError::Plan(m)) => Err((DocentError::Validation(m), None)),
        Err(RunError::World(e)) => Err((e.into(), None)),
    }
}

pub const EVENTS_FILE: &str = "events.json";
pub const GAZE_FILE: &str = "gaze.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
/// The plan as given.
pub const PLAN_FILE: &str = "plan.json";
/// The plan after the sanity check, as executed.
pub const REPAIRED_PLAN_FILE: &str = "plan.repaired.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

pub const WORLD_FILE: &str = "world.json";
/// Present only when the registry was supplied rather than surveyed.
pub const REGISTRY_FILE: &str = "registry.json";

/// Everything needed to reproduce a run directory. The directory holds its
/// own copies of the plan, world and supplied registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tour_id: String,
    pub condition: Condition,
    pub seed: u64,
    /// Hash of the plan as given, before repair.
    pub plan_sha256: String,
    /// Hash of the world's canonical form.
    pub world_sha256: String,
    pub registry_supplied: bool,
    /// Digest over the configuration and any supplied registry.
    pub param_digest: String,
    pub config: Config,
    pub duration_s: Option<f64>,
    pub aborted: bool,
    /// Files in the run directory, relative to it.
    pub artifacts: Vec<Artifact>,
}

pub struct RunInputs<'a> {
    pub plan: &'a TourPlan,
    pub world: &'a World,
    pub registry: Option<Registry>,
    pub condition: Condition,
    pub seed: u64,
    pub config: &'a Config,
}

fn param_digest(cfg: &Config, registry: Option<&Registry>) -> String {
    let mut text = to_json(cfg);
    if let Some(r) = registry {
        text.push_str(&to_json(r));
    }
    sha256_hex(text.as_bytes())
}

pub fn load_registry(path: &Path) -> Result<Registry> {
    from_json(path)
}

/// Runs and writes the run directory: `plan.json`, `plan.repaired.json`,
/// `world.json`, `events.json`, `gaze.csv`, `manifest.json` and, when
/// supplied, `registry.json`. Partial artifacts are written when the tour
/// aborts, and the error is returned afterwards.
pub fn run_to_dir(inputs: &RunInputs, out: &Path) -> Result<RunManifest> {
    let supplied = inputs.registry.clone();
    let digest = param_digest(inputs.config, supplied.as_ref());
    let (product, error) = match run(inputs.plan, inputs.world, inputs.condition, inputs.seed, inputs.config, supplied.clone()) {
        Ok(p) => (p, None),
        Err((e, Some(partial))) => (*partial, Some(e)),
        Err((e, None)) => return Err(e),
    };
    fs::create_dir_all(out).map_err(|e| DocentError::io(out, e))?;

    let mut gaze = Vec::new();
    write_trace(&mut gaze, &product.outcome.gaze).map_err(|e| DocentError::io(&out.join(GAZE_FILE), e))?;
    let mut files = vec![
        (PLAN_FILE, plan_to_string(inputs.plan).into_bytes()),
        (REPAIRED_PLAN_FILE, plan_to_string(&product.plan).into_bytes()),
        (WORLD_FILE, world_to_string(inputs.world).into_bytes()),
        (EVENTS_FILE, product.outcome.log.to_json().into_bytes()),
        (GAZE_FILE, gaze),
    ];
    if let Some(r) = &supplied {
        files.push((REGISTRY_FILE, to_json(r).into_bytes()));
    }
    let mut artifacts = Vec::new();
    for (name, bytes) in &files {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| DocentError::io(&path, e))?;
        artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = RunManifest {
        tour_id: inputs.plan.tour_id.clone(),
        condition: inputs.condition,
        seed: inputs.seed,
        plan_sha256: artifacts[0].sha256.clone(),
        world_sha256: artifacts[2].sha256.clone(),
        registry_supplied: supplied.is_some(),
        param_digest: digest,
        config: inputs.config.clone(),
        duration_s: product.outcome.log.duration(),
        aborted: product.outcome.aborted,
        artifacts,
    };
    write_text(&out.join(MANIFEST_FILE), &to_json(&manifest))?;
    match error {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

/// Re-runs the run stored in `run_dir` into `out`, after checking that the
/// stored inputs still match the manifest.
pub fn rerun_manifest(run_dir: &Path, out: &Path) -> Result<RunManifest> {
    let m = load_manifest(run_dir)?;
    let plan = parse_plan(&read_text(&run_dir.join(PLAN_FILE))?)?;
    let world = load_world(run_dir.join(WORLD_FILE))?;
    let registry = if m.registry_supplied {
        Some(load_registry(&run_dir.join(REGISTRY_FILE))?)
    } else {
        None
    };
    if sha256_hex(plan_to_string(&plan).as_bytes()) != m.plan_sha256 || world_hash(&world) != m.world_sha256 {
        return Err(DocentError::Validation(format!(
            "{}: stored plan or world does not match the manifest",
            run_dir.display()
        )));
    }
    if param_digest(&m.config, registry.as_ref()) != m.param_digest {
        return Err(DocentError::Validation(format!(
            "{}: parameter digest does not match the manifest",
            run_dir.display()
        )));
    }
    run_to_dir(
        &RunInputs {
            plan: &plan,
            world: &world,
            registry,
            condition: m.condition,
            seed: m.seed,
            config: &m.config,
        },
        out,
    )
}

/// Event log and gaze trace of a run directory.
pub fn load_run(dir: &Path) -> Result<(EventLog, Vec<GazeSample>)> {
    load_pair(&dir.join(EVENTS_FILE), &dir.join(GAZE_FILE))
}

pub fn load_pair(events: &Path, gaze: &Path) -> Result<(EventLog, Vec<GazeSample>)> {
    let log = EventLog::from_json(&read_text(events)?)
        .map_err(|e| DocentError::Validation(format!("{}: {e}", events.display())))?;
    let file = fs::File::open(gaze).map_err(|e| DocentError::io(gaze, e))?;
    let trace = read_trace(file).map_err(|e| DocentError::Validation(format!("{}: {e}", gaze.display())))?;
    Ok((log, trace))
}

pub fn load_manifest(dir: &Path) -> Result<RunManifest> {
    from_json(&dir.join(MANIFEST_FILE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub tour_id: String,
    pub condition: Condition,
    pub seed: u64,
    pub exhibits: Vec<ExhibitMetrics>,
    pub warnings: Vec<String>,
}

pub fn analyze_run(log: &EventLog, trace: &[GazeSample], world: &World, cfg: &AnalysisConfig) -> Result<(MetricsFile, Analysis)> {
    let analysis = analyze(log, trace, world, cfg)?;
    let metrics = MetricsFile {
        tour_id: log.tour_id.clone(),
        condition: log.condition,
        seed: log.seed,
        exhibits: analysis.metrics.clone(),
        warnings: analysis.warnings.clone(),
    };
    Ok((metrics, analysis))
}

/// Writes `metrics.json`, `fixations.json` and `timeline.json` into `out`.
pub fn analyze_to_dir(run_dir: &Path, world: &World, cfg: &AnalysisConfig, out: &Path) -> Result<MetricsFile> {
    analyze_files(&run_dir.join(EVENTS_FILE), &run_dir.join(GAZE_FILE), world, cfg, out)
}

pub fn analyze_files(events: &Path, gaze: &Path, world: &World, cfg: &AnalysisConfig, out: &Path) -> Result<MetricsFile> {
    let (log, trace) = load_pair(events, gaze)?;
    let (metrics, analysis) = analyze_run(&log, &trace, world, cfg)?;
    write_text(&out.join("metrics.json"), &to_json(&metrics))?;
    write_text(&out.join("fixations.json"), &to_json(&analysis.fixations))?;
    write_text(&out.join("timeline.json"), &to_json(&analysis.timeline))?;
    Ok(metrics)
}

/// Analyzes two run directories and writes the comparison report
/// (`comparison.md`, `comparison.json`) plus each run's timeline.
pub fn compare_to_dir(a: &Path, b: &Path, world: Option<&World>, cfg: &AnalysisConfig, out: &Path) -> Result<Comparison> {
    let mut sides = Vec::new();
    for (dir, tag) in [(a, "a"), (b, "b")] {
        let w = match world {
            Some(w) => w.clone(),
            None => load_world(dir.join(WORLD_FILE))?,
        };
        let (log, trace) = load_run(dir)?;
        let (metrics, analysis) = analyze_run(&log, &trace, &w, cfg)?;
        write_text(&out.join(format!("timeline_{tag}.json")), &to_json(&analysis.timeline))?;
        write_text(&out.join(format!("metrics_{tag}.json")), &to_json(&metrics))?;
        let label = format!("{} s{}", log.condition.as_str(), log.seed);
        sides.push((metrics, label));
    }
    let (ma, la) = &sides[0];
    let (mb, lb) = &sides[1];
    let (la, lb) = if la == lb {
        ("a".to_string(), "b".to_string())
    } else {
        (la.clone(), lb.clone())
    };
    let cmp = compare_conditions(&ma.exhibits, &mb.exhibits, &la, &lb)?;
    write_text(&out.join("comparison.md"), &cmp.to_markdown())?;
    write_text(&out.join("comparison.json"), &to_json(&cmp))?;
    Ok(cmp)
}

/// Parses a world document from text, for callers that hold it in memory.
pub fn world_from_text(text: &str) -> Result<World> {
    Ok(parse_world(text)?)
}
