//! 8-connected A* over an occupancy grid with the octile heuristic.
//! Diagonal moves cost sqrt(2) and may not cut past an occupied corner.

use super::{GeometryError, GridCell, OccupancyGrid};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<GridCell>,
    /// Path length in cells (1 per straight step, sqrt(2) per diagonal).
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    index: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on f, prefer deeper nodes on ties, then lower index.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: GridCell, b: GridCell) -> f64 {
    let dr = a.0.abs_diff(b.0) as f64;
    let dc = a.1.abs_diff(b.1) as f64;
    let (lo, hi) = if dr < dc { (dr, dc) } else { (dc, dr) };
    hi - lo + lo * std::f64::consts::SQRT_2
}

/// Free neighbours of `cell` with their step costs.
pub(crate) fn neighbours(grid: &OccupancyGrid, cell: GridCell) -> impl Iterator<Item = (GridCell, f64)> + '_ {
    const STEPS: [(isize, isize); 8] = [
        (-1, 0),
        (1, 0),
        (0, -1),
        (0, 1),
        (-1, -1),
        (-1, 1),
        (1, -1),
        (1, 1),
    ];
    let (r, c) = (cell.0 as isize, cell.1 as isize);
    let free = move |r: isize, c: isize| grid.in_bounds(r, c) && grid.is_free((r as usize, c as usize));
    STEPS.iter().filter_map(move |&(dr, dc)| {
        let (nr, nc) = (r + dr, c + dc);
        if !free(nr, nc) {
            return None;
        }
        if dr != 0 && dc != 0 {
            if !free(r + dr, c) || !free(r, c + dc) {
                return None;
            }
            Some(((nr as usize, nc as usize), std::f64::consts::SQRT_2))
        } else {
            Some(((nr as usize, nc as usize), 1.0))
        }
    })
}

pub fn astar_plan(grid: &OccupancyGrid, start: GridCell, goal: GridCell) -> Result<GridPath, GeometryError> {
    let inside = |(r, c): GridCell| r < grid.rows && c < grid.cols;
    if !inside(start) || !inside(goal) || !grid.is_free(start) || !grid.is_free(goal) {
        return Err(GeometryError::BlockedEndpoint);
    }
    let idx = |(r, c): GridCell| r * grid.cols + c;
    let n = grid.rows * grid.cols;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();

    g[idx(start)] = 0.0;
    heap.push(Open {
        f: octile(start, goal),
        g: 0.0,
        index: idx(start),
    });

    while let Some(Open { g: gc, index, .. }) = heap.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        let cell = (index / grid.cols, index % grid.cols);
        if cell == goal {
            let mut cells = vec![cell];
            let mut cur = index;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push((cur / grid.cols, cur % grid.cols));
            }
            cells.reverse();
            return Ok(GridPath { cells, cost: gc });
        }
        for (next, step) in neighbours(grid, cell) {
            let j = idx(next);
            let cand = gc + step;
            if !closed[j] && cand < g[j] {
                g[j] = cand;
                parent[j] = index;
                heap.push(Open {
                    f: cand + octile(next, goal),
                    g: cand,
                    index: j,
                });
            }
        }
    }
    Err(GeometryError::UnreachableGoal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellState;

    #[test]
    fn straight_corridor() {
        let g = OccupancyGrid::new([0.0, 0.0], 0.1, 1, 3, CellState::Free);
        let p = astar_plan(&g, (0, 0), (0, 2)).unwrap();
        assert_eq!(p.cells, vec![(0, 0), (0, 1), (0, 2)]);
        assert_eq!(p.cost, 2.0);
    }

    #[test]
    fn enclosed_goal() {
        let mut g = OccupancyGrid::new([0.0, 0.0], 0.1, 5, 5, CellState::Free);
        for r in 1..4 {
            for c in 1..4 {
                if (r, c) != (2, 2) {
                    g.set((r, c), CellState::Occupied);
                }
            }
        }
        assert_eq!(astar_plan(&g, (0, 0), (2, 2)), Err(GeometryError::UnreachableGoal));
    }

    #[test]
    fn no_corner_cutting() {
        let mut g = OccupancyGrid::new([0.0, 0.0], 0.1, 2, 2, CellState::Free);
        g.set((0, 1), CellState::Occupied);
        let p = astar_plan(&g, (0, 0), (1, 1)).unwrap();
        assert_eq!(p.cells, vec![(0, 0), (1, 0), (1, 1)]);
        assert_eq!(p.cost, 2.0);
    }

    #[test]
    fn blocked_start() {
        let mut g = OccupancyGrid::new([0.0, 0.0], 0.1, 3, 3, CellState::Free);
        g.set((0, 0), CellState::Occupied);
        assert_eq!(astar_plan(&g, (0, 0), (2, 2)), Err(GeometryError::BlockedEndpoint));
    }
}
