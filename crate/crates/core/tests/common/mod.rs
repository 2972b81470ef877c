#![allow(dead_code)]

use docent::geometry::{CellState, GridCell, OccupancyGrid, Vec3};
use docent::tour_model::{ActionSpec, SentenceElement, SentenceType, TourPlan, World};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain O(n^2) Dijkstra on the 8-connected grid with the same corner rule
/// as the planner: a diagonal step needs both orthogonal cells free.
pub fn dijkstra(grid: &OccupancyGrid, start: GridCell, goal: GridCell) -> Option<f64> {
    let n = grid.rows * grid.cols;
    let free = |r: isize, c: isize| {
        r >= 0
            && c >= 0
            && (r as usize) < grid.rows
            && (c as usize) < grid.cols
            && grid.get((r as usize, c as usize)) == CellState::Free
    };
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[start.0 * grid.cols + start.1] = 0.0;
    loop {
        let mut best = None;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && best.is_none_or(|b: usize| dist[i] < dist[b]) {
                best = Some(i);
            }
        }
        let i = best?;
        if i == goal.0 * grid.cols + goal.1 {
            return Some(dist[i]);
        }
        done[i] = true;
        let (r, c) = ((i / grid.cols) as isize, (i % grid.cols) as isize);
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                if (dr, dc) == (0, 0) || !free(r + dr, c + dc) {
                    continue;
                }
                let w = if dr != 0 && dc != 0 {
                    if !free(r + dr, c) || !free(r, c + dc) {
                        continue;
                    }
                    2f64.sqrt()
                } else {
                    1.0
                };
                let j = (r + dr) as usize * grid.cols + (c + dc) as usize;
                dist[j] = dist[j].min(dist[i] + w);
            }
        }
    }
}

/// 20x20 grid with about a quarter of the cells occupied, plus two free
/// endpoints.
pub fn random_grid(seed: u64) -> (OccupancyGrid, GridCell, GridCell) {
    let mut r = rng(seed);
    let mut g = OccupancyGrid::new([0.0, 0.0], 0.1, 20, 20, CellState::Free);
    for row in 0..20 {
        for col in 0..20 {
            if r.random::<f64>() < 0.25 {
                g.set((row, col), CellState::Occupied);
            }
        }
    }
    let mut pick = || loop {
        let cell = (r.random_range(0..20), r.random_range(0..20));
        if g.get(cell) == CellState::Free {
            return cell;
        }
    };
    let (a, b) = (pick(), pick());
    (g, a, b)
}

/// Angle between two vectors, robust near zero.
pub fn angle(a: Vec3, b: Vec3) -> f64 {
    a.cross(&b).norm().atan2(a.dot(&b))
}

pub fn random_unit(r: &mut impl Rng) -> Vec3 {
    let n = Normal::new(0.0, 1.0).unwrap();
    loop {
        let v = Vec3::new(n.sample(r), n.sample(r), n.sample(r));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// Points on a square patch of side `side` around `center` in the plane
/// with `normal`, with isotropic Gaussian noise.
pub fn noisy_patch(r: &mut impl Rng, center: Vec3, normal: Vec3, side: f64, count: usize, sigma: f64) -> Vec<Vec3> {
    let helper = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = normal.cross(&helper).normalize();
    let v = normal.cross(&u);
    let noise = Normal::new(0.0, sigma).unwrap();
    (0..count)
        .map(|_| {
            let a = r.random_range(-side / 2.0..side / 2.0);
            let b = r.random_range(-side / 2.0..side / 2.0);
            center + u * a + v * b + Vec3::new(noise.sample(r), noise.sample(r), noise.sample(r))
        })
        .collect()
}

/// Sum of squared distances of `points` to the plane through their mean.
pub fn plane_residual(points: &[Vec3], normal: Vec3) -> f64 {
    let n = normal.normalize();
    let mean = points.iter().fold(Vec3::zeros(), |a, p| a + p) / points.len() as f64;
    points.iter().map(|p| (p - mean).dot(&n).powi(2)).sum()
}

/// Exhibits grouped by their shared nav point, in world order.
pub fn stops(world: &World) -> Vec<(String, Vec<String>)> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for e in &world.exhibits {
        match out.iter_mut().find(|(s, _)| world.exhibit(s).unwrap().nav_point == e.nav_point) {
            Some((_, list)) => list.push(e.id.clone()),
            None => out.push((e.id.clone(), vec![e.id.clone()])),
        }
    }
    out
}

/// A valid plan over `world`: every element has one PlayAudio and, at
/// random, tracking, a deictic pair, a lone look or laser, or nothing.
pub fn random_plan(seed: u64, world: &World, len: usize) -> TourPlan {
    let mut r = rng(seed);
    let stops = stops(world);
    let mut stop = 0;
    let mut elements = Vec::new();
    for index in 0..len as u32 {
        if index > 0 && r.random::<f64>() < 0.2 {
            stop = (stop + 1) % stops.len();
        }
        let (nav, exhibits) = &stops[stop];
        let exhibit = exhibits.choose(&mut r).unwrap().clone();
        let mut actions = vec![ActionSpec::play_audio(
            format!("sentence {index}"),
            (r.random_range(0.5..4.0f64) * 1000.0).round() / 1000.0,
        )];
        let mut with_exhibit = false;
        match r.random_range(0..6) {
            0 | 1 => actions.push(ActionSpec::TrackVisitor {}),
            2 => {
                actions.push(ActionSpec::look_at(exhibit.clone()));
                actions.push(ActionSpec::point_laser(exhibit.clone(), r.random_range(1..=3)));
                with_exhibit = true;
            }
            3 => {
                actions.push(ActionSpec::look_at(exhibit.clone()));
                with_exhibit = true;
            }
            4 => {
                actions.push(ActionSpec::point_laser(exhibit.clone(), 3));
                with_exhibit = true;
            }
            _ => {}
        }
        if r.random::<f64>() < 0.1 {
            actions.push(ActionSpec::BlinkEye {});
        }
        elements.push(SentenceElement {
            index,
            text: format!("Sentence number {index}."),
            sentence_type: SentenceType::Narration,
            nav_point: nav.clone(),
            exhibit: (with_exhibit || r.random::<f64>() < 0.3).then_some(exhibit),
            actions,
        });
    }
    TourPlan {
        tour_id: format!("random{seed}"),
        exhibits_ref: None,
        elements,
    }
}

const WORDS: [&str; 16] = [
    "the", "old", "hall", "was", "built", "in", "1919", "by", "students", "and", "staff", "with", "red", "brick",
    "tall", "windows",
];

/// A random sentence of 3..12 words, optionally carrying a tag.
pub fn random_sentence(r: &mut impl Rng, tag: Option<&str>) -> String {
    let n = r.random_range(3..12);
    let mut words: Vec<String> = (0..n).map(|_| WORDS.choose(r).unwrap().to_string()).collect();
    if let Some(t) = tag {
        let at = r.random_range(1..=words.len());
        words.insert(at, format!("[{t}]"));
    }
    let end = [".", "!", "?"].choose(r).unwrap();
    format!("{}{end}", words.join(" "))
}

/// A script over every stop of `world` with `per_stop` sentences per stop.
pub fn random_script(seed: u64, world: &World, per_stop: usize) -> String {
    let mut r = rng(seed);
    let mut text = format!("@tour script{seed}\n");
    for (stop, exhibits) in stops(world) {
        text.push_str(&format!("@stop {stop}\n"));
        for _ in 0..per_stop {
            let tag = (r.random::<f64>() < 0.4).then(|| exhibits.choose(&mut r).unwrap().as_str());
            text.push_str(&random_sentence(&mut r, tag));
            text.push(if r.random::<f64>() < 0.3 { '\n' } else { ' ' });
        }
        text.push('\n');
    }
    text
}

/// Non-tag words of `text`, in order.
pub fn plain_words(text: &str) -> Vec<String> {
    docent::script_compiler::speakable(text)
        .split_whitespace()
        .map(str::to_string)
        .collect()
}
