use super::{validate_plan, validate_world, TourPlan, ValidationError, World};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column} ({locus}): {message}")]
    Parse {
        line: usize,
        column: usize,
        /// JSON path of the offending value, e.g. `elements[2].actions[0]`.
        locus: String,
        message: String,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, PlanError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let locus = err.path().to_string();
        let inner = err.into_inner();
        PlanError::Parse {
            line: inner.line(),
            column: inner.column(),
            locus,
            message: inner.to_string(),
        }
    })
}

fn read(path: &Path) -> Result<String, PlanError> {
    fs::read_to_string(path).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), PlanError> {
    fs::write(path, text).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn canonical<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plan types always serialize");
    s.push('\n');
    s
}

/// Parses and validates a plan document.
pub fn parse_plan(text: &str) -> Result<TourPlan, PlanError> {
    let plan: TourPlan = parse(text)?;
    validate_plan(&plan)?;
    Ok(plan)
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<TourPlan, PlanError> {
    parse_plan(&read(path.as_ref())?)
}

/// Canonical text form of a plan; `parse_plan` followed by this is byte-stable.
pub fn plan_to_string(plan: &TourPlan) -> String {
    canonical(plan)
}

pub fn save_plan(plan: &TourPlan, path: impl AsRef<Path>) -> Result<(), PlanError> {
    write(path.as_ref(), &plan_to_string(plan))
}

pub fn parse_world(text: &str) -> Result<World, PlanError> {
    let world: World = parse(text)?;
    validate_world(&world)?;
    Ok(world)
}

pub fn load_world(path: impl AsRef<Path>) -> Result<World, PlanError> {
    parse_world(&read(path.as_ref())?)
}

pub fn world_to_string(world: &World) -> String {
    canonical(world)
}

pub fn save_world(world: &World, path: impl AsRef<Path>) -> Result<(), PlanError> {
    write(path.as_ref(), &world_to_string(world))
}
