//! Bundled gallery layouts and tour scripts.

use crate::tour_model::{parse_world, Exhibit, PlanError, World};

pub const BUNDLED_TOURS: [&str; 2] = ["tour1", "tour2"];

const TOUR1_WORLD: &str = include_str!("../../assets/tour1.world.json");
const TOUR2_WORLD: &str = include_str!("../../assets/tour2.world.json");
const TOUR1_SCRIPT: &str = include_str!("../../assets/tour1.script.txt");
const TOUR2_SCRIPT: &str = include_str!("../../assets/tour2.script.txt");

/// World file text of a bundled tour, or `None` for an unknown name.
pub fn bundled_world_text(name: &str) -> Option<&'static str> {
    match name {
        "tour1" => Some(TOUR1_WORLD),
        "tour2" => Some(TOUR2_WORLD),
        _ => None,
    }
}

pub fn bundled_world(name: &str) -> Result<World, PlanError> {
    let text = bundled_world_text(name).ok_or_else(|| PlanError::Parse {
        line: 0,
        column: 0,
        locus: name.to_string(),
        message: "no bundled world with this name".into(),
    })?;
    parse_world(text)
}

pub fn bundled_script(name: &str) -> Option<&'static str> {
    match name {
        "tour1" => Some(TOUR1_SCRIPT),
        "tour2" => Some(TOUR2_SCRIPT),
        _ => None,
    }
}

/// Stop ids of a layout: for each distinct nav point in exhibit order, the
/// first exhibit presented from it.
pub fn stops_of(exhibits: &[Exhibit]) -> Vec<String> {
    let mut out: Vec<(String, _)> = Vec::new();
    for e in exhibits {
        if !out.iter().any(|(_, nav)| *nav == e.nav_point) {
            out.push((e.id.clone(), e.nav_point));
        }
    }
    out.into_iter().map(|(id, _)| id).collect()
}
