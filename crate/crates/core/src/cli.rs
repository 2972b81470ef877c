//! Command-line front end. Exit codes: 0 success, 2 validation, 3 runtime, 4 I/O.

use crate::behavior_engine::Condition;
use crate::pipeline::{self, Config, DocentError, Result, RunInputs};
use crate::script_compiler::{CompilerBackend, DisabledTransport, ExternalModelBackend, RawScript};
use crate::tour_model::{load_plan, load_world, plan_to_string};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "docent", version, about = "Compile, run and analyze co-speech robot tours")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file overriding module defaults (sections: compiler, sim, engine, visitor, analysis).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Backend {
    Rules,
    /// Prompt-and-validate backend; needs a model transport, none ships here.
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConditionArg {
    Full,
    #[value(alias = "audio_only")]
    AudioOnly,
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Full => Condition::Full,
            ConditionArg::AudioOnly => Condition::AudioOnly,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a raw script into a tour plan.
    Compile {
        /// Script file, or a bundled tour name (tour1, tour2).
        #[arg(long)]
        script: String,
        /// World file, or a bundled tour name.
        #[arg(long)]
        world: String,
        #[arg(long, value_enum, default_value = "rules")]
        backend: Backend,
        /// Plan output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Words per second used to size speech (default 1.18).
        #[arg(long)]
        speaking_rate: Option<f64>,
        /// Arrival sentence; `{stop}` is replaced by the stop name.
        #[arg(long)]
        arrival_template: Option<String>,
        /// Sentence spoken when leaving a stop.
        #[arg(long)]
        departure_template: Option<String>,
        /// Compile and lint without writing the plan.
        #[arg(long)]
        lint_only: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Survey the gallery and write registered exhibit coordinates.
    Annotate {
        #[arg(long)]
        world: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a plan in the simulated gallery and write a run directory.
    Run {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        world: String,
        #[arg(long, value_enum, default_value = "full")]
        condition: ConditionArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Registered coordinates from `annotate`; the survey runs when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce a run directory from its manifest.
    Rerun {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fixations, per-exhibit metrics and timeline for one run.
    Analyze {
        /// Run directory; supplies events, gaze and world.
        #[arg(long, required_unless_present_all = ["events", "gaze"])]
        run: Option<PathBuf>,
        #[arg(long, requires = "gaze")]
        events: Option<PathBuf>,
        #[arg(long, requires = "events")]
        gaze: Option<PathBuf>,
        /// Required with --events/--gaze; overrides the run's copy otherwise.
        #[arg(long)]
        world: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare two runs side by side.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        world: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn config(common: &Common) -> Result<Config> {
    common.config.as_deref().map_or_else(|| Ok(Config::default()), Config::load)
}

fn stem(spec: &str) -> String {
    Path::new(spec)
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s).to_string())
        .unwrap_or_else(|| "tour".into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| DocentError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| DocentError::Io(format!("{}: {e}", path.display())))
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compile {
            script,
            world,
            backend,
            out,
            speaking_rate,
            arrival_template,
            departure_template,
            lint_only,
            common,
        } => {
            let mut cfg = config(&common)?.compiler;
            if let Some(r) = speaking_rate {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(DocentError::Validation(format!("--speaking-rate must be positive, got {r}")));
                }
                cfg.speaking_rate_wps = r;
            }
            if let Some(t) = arrival_template {
                cfg.arrival_template = t;
            }
            if let Some(t) = departure_template {
                cfg.departure_template = t;
            }
            let w = pipeline::resolve_world(&world)?;
            let text = pipeline::resolve_script(&script)?;
            let plan = match backend {
                Backend::Rules => pipeline::compile(&text, &stem(&script), &w, &cfg)?,
                Backend::External => {
                    let b = ExternalModelBackend::new(DisabledTransport, cfg);
                    b.compile(&RawScript::parse(&text, &stem(&script)), &w)?
                }
            };
            if lint_only {
                eprintln!("{}: {} elements, no findings", plan.tour_id, plan.elements.len());
                return Ok(());
            }
            let doc = plan_to_string(&plan);
            match out {
                Some(p) => write(&p, &doc),
                None => {
                    print!("{doc}");
                    Ok(())
                }
            }
        }
        Command::Annotate { world, seed, out, common } => {
            let cfg = config(&common)?;
            let w = pipeline::resolve_world(&world)?;
            let reg = pipeline::annotate(&w, &cfg.sim, seed)?;
            let mut doc = serde_json::to_string_pretty(&reg).expect("registry serializes");
            doc.push('\n');
            write(&out, &doc)?;
            eprintln!("registered {} exhibits", reg.coords.len());
            Ok(())
        }
        Command::Run {
            plan,
            world,
            condition,
            seed,
            out,
            registry,
            common,
        } => {
            let cfg = config(&common)?;
            let plan = load_plan(&plan)?;
            let w = pipeline::resolve_world(&world)?;
            let registry = registry.as_deref().map(pipeline::load_registry).transpose()?;
            let m = pipeline::run_to_dir(
                &RunInputs {
                    plan: &plan,
                    world: &w,
                    registry,
                    condition: condition.into(),
                    seed,
                    config: &cfg,
                },
                &out,
            )?;
            println!("duration: {:.3} s", m.duration_s.unwrap_or(f64::NAN));
            Ok(())
        }
        Command::Rerun { run, out } => {
            let m = pipeline::rerun_manifest(&run, &out)?;
            println!("duration: {:.3} s", m.duration_s.unwrap_or(f64::NAN));
            Ok(())
        }
        Command::Analyze {
            run,
            events,
            gaze,
            world,
            out,
            common,
        } => {
            let cfg = config(&common)?;
            let metrics = match (run, events, gaze) {
                (Some(dir), _, _) => {
                    let w = match world {
                        Some(spec) => pipeline::resolve_world(&spec)?,
                        None => load_world(dir.join(pipeline::WORLD_FILE))?,
                    };
                    pipeline::analyze_to_dir(&dir, &w, &cfg.analysis, &out)?
                }
                (None, Some(events), Some(gaze)) => {
                    let spec = world.ok_or_else(|| {
                        DocentError::Validation("--world is required with --events and --gaze".into())
                    })?;
                    let w = pipeline::resolve_world(&spec)?;
                    pipeline::analyze_files(&events, &gaze, &w, &cfg.analysis, &out)?
                }
                _ => unreachable!("clap enforces --run or --events with --gaze"),
            };
            for warning in &metrics.warnings {
                eprintln!("warning: {warning}");
            }
            println!("{} exhibits analyzed", metrics.exhibits.len());
            Ok(())
        }
        Command::Compare { a, b, world, out, common } => {
            let cfg = config(&common)?;
            let w = world.as_deref().map(pipeline::resolve_world).transpose()?;
            let cmp = pipeline::compare_to_dir(&a, &b, w.as_ref(), &cfg.analysis, &out)?;
            print!("{}", cmp.to_markdown());
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
