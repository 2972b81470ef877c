//! C ABI over the docent pipeline.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`DocentStatus`]; on failure the message is available from
//! [`docent_last_error`] on the same thread. Strings returned to the
//! caller are owned by the caller and released with [`docent_string_free`].

use docent::behavior_engine::Condition;
use docent::gaze_analytics::write_trace;
use docent::pipeline::{self, Config, DocentError, RunProduct};
use docent::tour_model::{parse_plan, plan_to_string, TourPlan, World};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

/// Result of every fallible call. Nonzero codes match the CLI exit codes
/// where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocentStatus {
    Ok = 0,
    /// Bad plan, script, world or configuration.
    Validation = 2,
    /// The simulation could not finish, e.g. an unreachable stop.
    Runtime = 3,
    Io = 4,
    /// Null pointer or non UTF-8 string argument.
    InvalidArgument = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocentCondition {
    Full = 0,
    AudioOnly = 1,
}

impl From<DocentCondition> for Condition {
    fn from(c: DocentCondition) -> Self {
        match c {
            DocentCondition::Full => Condition::Full,
            DocentCondition::AudioOnly => Condition::AudioOnly,
        }
    }
}

/// Gallery layout.
pub struct DocentWorld {
    world: World,
}

/// Compiled tour plan.
pub struct DocentPlan {
    plan: TourPlan,
}

/// Finished (or aborted) simulated tour.
pub struct DocentRun {
    product: RunProduct,
    config: Config,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DocentStatus, String);

impl From<DocentError> for Failure {
    fn from(e: DocentError) -> Self {
        let status = match e {
            DocentError::Validation(_) => DocentStatus::Validation,
            DocentError::Runtime(_) => DocentStatus::Runtime,
            DocentError::Io(_) => DocentStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DocentStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DocentStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DocentStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            DocentStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn config(p: *const c_char) -> Result<Config, Failure> {
    if p.is_null() {
        return Ok(Config::default());
    }
    serde_json::from_str(text(p, "config_json")?)
        .map_err(|e| Failure(DocentStatus::Validation, format!("config: {e}")))
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next docent call on the same thread.
#[no_mangle]
pub extern "C" fn docent_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn docent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn docent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a world from a JSON file path or a bundled layout name
/// (`tour1`, `tour2`).
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_world_load(spec: *const c_char, out: *mut *mut DocentWorld) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let world = pipeline::resolve_world(text(spec, "spec")?)?;
        *out = Box::into_raw(Box::new(DocentWorld { world }));
        Ok(())
    })
}

/// Parses a world from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_world_from_json(json: *const c_char, out: *mut *mut DocentWorld) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let world = pipeline::world_from_text(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(DocentWorld { world }));
        Ok(())
    })
}

/// Number of exhibits in the world.
///
/// # Safety
/// `world` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn docent_world_exhibit_count(world: *const DocentWorld) -> usize {
    world.as_ref().map_or(0, |w| w.world.exhibits.len())
}

/// # Safety
/// `world` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn docent_world_free(world: *mut DocentWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Compiles a tagged script into a plan with the rule backend.
/// `config_json` may be null for defaults.
///
/// # Safety
/// String arguments must be NUL-terminated; `world` must be a live handle;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_plan_compile(
    script: *const c_char,
    tour_id: *const c_char,
    world: *const DocentWorld,
    config_json: *const c_char,
    out: *mut *mut DocentPlan,
) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let cfg = config(config_json)?;
        let world = handle(world, "world")?;
        let plan = pipeline::compile(text(script, "script")?, text(tour_id, "tour_id")?, &world.world, &cfg.compiler)?;
        *out = Box::into_raw(Box::new(DocentPlan { plan }));
        Ok(())
    })
}

/// Parses and validates a plan from its JSON form.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_plan_from_json(json: *const c_char, out: *mut *mut DocentPlan) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let plan = parse_plan(text(json, "json")?).map_err(DocentError::from)?;
        *out = Box::into_raw(Box::new(DocentPlan { plan }));
        Ok(())
    })
}

/// Canonical JSON for the plan. Free with `docent_string_free`.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_plan_to_json(plan: *const DocentPlan, out: *mut *mut c_char) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = owned(plan_to_string(&handle(plan, "plan")?.plan));
        Ok(())
    })
}

/// Number of sentence elements in the plan.
///
/// # Safety
/// `plan` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn docent_plan_element_count(plan: *const DocentPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.elements.len())
}

/// # Safety
/// `plan` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn docent_plan_free(plan: *mut DocentPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Runs a plan in the simulated gallery. The registry is surveyed from
/// the world with the same seed. When a stop is unreachable the call
/// returns `DOCENT_STATUS_RUNTIME` and still stores the partial run in
/// `out`, which the caller must free.
///
/// # Safety
/// Handles must be live; `config_json` is null or NUL-terminated; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_run(
    plan: *const DocentPlan,
    world: *const DocentWorld,
    condition: DocentCondition,
    seed: u64,
    config_json: *const c_char,
    out: *mut *mut DocentRun,
) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let cfg = config(config_json)?;
        let plan = handle(plan, "plan")?;
        let world = handle(world, "world")?;
        match pipeline::run(&plan.plan, &world.world, condition.into(), seed, &cfg, None) {
            Ok(product) => {
                *out = Box::into_raw(Box::new(DocentRun { product, config: cfg }));
                Ok(())
            }
            Err((e, partial)) => {
                if let Some(p) = partial {
                    *out = Box::into_raw(Box::new(DocentRun {
                        product: *p,
                        config: cfg,
                    }));
                }
                Err(e.into())
            }
        }
    })
}

/// Simulated tour duration in seconds; 0 for an empty log or null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn docent_run_duration(run: *const DocentRun) -> f64 {
    run.as_ref()
        .and_then(|r| r.product.outcome.log.duration())
        .unwrap_or(0.0)
}

/// Whether the run stopped before the last element.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn docent_run_aborted(run: *const DocentRun) -> bool {
    run.as_ref().is_some_and(|r| r.product.outcome.aborted)
}

/// Event log as JSON. Free with `docent_string_free`.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_run_events_json(run: *const DocentRun, out: *mut *mut c_char) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = owned(handle(run, "run")?.product.outcome.log.to_json());
        Ok(())
    })
}

/// Gaze trace as CSV (`t,u,v,on_wall`). Free with `docent_string_free`.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_run_gaze_csv(run: *const DocentRun, out: *mut *mut c_char) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mut buf = Vec::new();
        write_trace(&mut buf, &handle(run, "run")?.product.outcome.gaze)
            .map_err(|e| Failure(DocentStatus::Io, e.to_string()))?;
        *out = owned(String::from_utf8(buf).map_err(|e| Failure(DocentStatus::Io, e.to_string()))?);
        Ok(())
    })
}

/// Per-exhibit gaze metrics (TFF, TFD, AFD, R-TFD) as JSON. Free with
/// `docent_string_free`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn docent_run_metrics_json(
    run: *const DocentRun,
    world: *const DocentWorld,
    out: *mut *mut c_char,
) -> DocentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let run = handle(run, "run")?;
        let world = handle(world, "world")?;
        let outcome = &run.product.outcome;
        let (metrics, _) = pipeline::analyze_run(&outcome.log, &outcome.gaze, &world.world, &run.config.analysis)?;
        *out = owned(serde_json::to_string_pretty(&metrics).map_err(|e| Failure(DocentStatus::Io, e.to_string()))?);
        Ok(())
    })
}

/// Runs a plan and writes the full run directory (event log, gaze trace,
/// plans, world and manifest) to `out_dir`, like `docent run`.
///
/// # Safety
/// Handles must be live; strings are null (config only) or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn docent_run_to_dir(
    plan: *const DocentPlan,
    world: *const DocentWorld,
    condition: DocentCondition,
    seed: u64,
    config_json: *const c_char,
    out_dir: *const c_char,
) -> DocentStatus {
    guard(|| {
        let cfg = config(config_json)?;
        let inputs = pipeline::RunInputs {
            plan: &handle(plan, "plan")?.plan,
            world: &handle(world, "world")?.world,
            registry: None,
            condition: condition.into(),
            seed,
            config: &cfg,
        };
        pipeline::run_to_dir(&inputs, Path::new(text(out_dir, "out_dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn docent_run_free(run: *mut DocentRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
