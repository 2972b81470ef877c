use super::{GeometryError, Vec3};
use serde::{Deserialize, Serialize};

/// Assumed face height of a standing visitor, m.
pub const VISITOR_FACE_HEIGHT: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl From<CellState> for u8 {
    fn from(c: CellState) -> u8 {
        match c {
            CellState::Free => 0,
            CellState::Occupied => 1,
            CellState::Unknown => 2,
        }
    }
}

impl TryFrom<u8> for CellState {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(CellState::Free),
            1 => Ok(CellState::Occupied),
            2 => Ok(CellState::Unknown),
            other => Err(format!("invalid cell code {other}")),
        }
    }
}

/// `(row, col)`; rows grow along world y, columns along world x.
pub type GridCell = (usize, usize);

/// Row-major occupancy grid anchored at `origin` (world x, y of the
/// lower-left corner of cell (0, 0)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub origin: [f64; 2],
    pub resolution: f64,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(origin: [f64; 2], resolution: f64, rows: usize, cols: usize, fill: CellState) -> Self {
        assert!(resolution > 0.0);
        Self {
            origin,
            resolution,
            rows,
            cols,
            cells: vec![fill; rows * cols],
        }
    }

    pub fn get(&self, (r, c): GridCell) -> CellState {
        self.cells[r * self.cols + c]
    }

    pub fn set(&mut self, (r, c): GridCell, s: CellState) {
        self.cells[r * self.cols + c] = s;
    }

    pub fn is_free(&self, cell: GridCell) -> bool {
        self.get(cell) == CellState::Free
    }

    pub fn in_bounds(&self, r: isize, c: isize) -> bool {
        r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols
    }

    pub fn width_m(&self) -> f64 {
        self.cols as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.rows as f64 * self.resolution
    }

    pub fn cell_center(&self, (r, c): GridCell) -> (f64, f64) {
        (
            self.origin[0] + (c as f64 + 0.5) * self.resolution,
            self.origin[1] + (r as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<GridCell> {
        let c = ((x - self.origin[0]) / self.resolution).floor();
        let r = ((y - self.origin[1]) / self.resolution).floor();
        (self.in_bounds(r as isize, c as isize) && r >= 0.0 && c >= 0.0).then_some((r as usize, c as usize))
    }

    /// State at a world point; outside the grid counts as unknown.
    pub fn state_at(&self, x: f64, y: f64) -> CellState {
        self.world_to_cell(x, y).map_or(CellState::Unknown, |cell| self.get(cell))
    }

    /// Copy of the window of `size` m square centered on `(x, y)`, snapped
    /// to this grid's cell lattice.
    pub fn window(&self, x: f64, y: f64, size: f64) -> OccupancyGrid {
        let n = (size / self.resolution).round() as usize;
        let c0 = ((x - self.origin[0]) / self.resolution - n as f64 / 2.0).round();
        let r0 = ((y - self.origin[1]) / self.resolution - n as f64 / 2.0).round();
        let origin = [
            self.origin[0] + c0 * self.resolution,
            self.origin[1] + r0 * self.resolution,
        ];
        let mut out = OccupancyGrid::new(origin, self.resolution, n, n, CellState::Unknown);
        for r in 0..n {
            for c in 0..n {
                let (gr, gc) = (r0 as isize + r as isize, c0 as isize + c as isize);
                if self.in_bounds(gr, gc) {
                    out.set((r, c), self.get((gr as usize, gc as usize)));
                }
            }
        }
        out
    }

    /// Marks every cell whose center lies within `radius` of `(x, y)`.
    pub fn stamp_disc(&mut self, x: f64, y: f64, radius: f64, state: CellState) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (cx, cy) = self.cell_center((r, c));
                if (cx - x).hypot(cy - y) <= radius {
                    self.set((r, c), state);
                }
            }
        }
    }

    /// Grows occupied cells by `radius` m; unknown cells are left as they are.
    pub fn inflate(&self, radius: f64) -> OccupancyGrid {
        let k = (radius / self.resolution).ceil() as isize;
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get((r, c)) != CellState::Occupied {
                    continue;
                }
                for dr in -k..=k {
                    for dc in -k..=k {
                        let (nr, nc) = (r as isize + dr, c as isize + dc);
                        let dist = ((dr * dr + dc * dc) as f64).sqrt() * self.resolution;
                        if self.in_bounds(nr, nc) && dist <= radius + 1e-9 {
                            out.set((nr as usize, nc as usize), CellState::Occupied);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Locates the visitor as the largest 4-connected cluster of cells that are
/// occupied in the live local grid but free in the static map. Returns the
/// cluster centroid at face height, or `None` when nothing new is seen.
pub fn visitor_from_costmap_diff(
    static_map: &OccupancyGrid,
    live: &OccupancyGrid,
) -> Result<Option<Vec3>, GeometryError> {
    if (static_map.resolution - live.resolution).abs() > 1e-12 {
        return Err(GeometryError::ResolutionMismatch(static_map.resolution, live.resolution));
    }
    let diff: Vec<bool> = (0..live.rows * live.cols)
        .map(|i| {
            let cell = (i / live.cols, i % live.cols);
            if live.get(cell) != CellState::Occupied {
                return false;
            }
            let (x, y) = live.cell_center(cell);
            static_map.state_at(x, y) == CellState::Free
        })
        .collect();

    let mut seen = vec![false; diff.len()];
    let mut best: Vec<GridCell> = Vec::new();
    for start in 0..diff.len() {
        if !diff[start] || seen[start] {
            continue;
        }
        let mut cluster = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (r, c) = (i / live.cols, i % live.cols);
            cluster.push((r, c));
            for (dr, dc) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if live.in_bounds(nr, nc) {
                    let j = nr as usize * live.cols + nc as usize;
                    if diff[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if cluster.len() > best.len() {
            best = cluster;
        }
    }
    if best.is_empty() {
        return Ok(None);
    }
    let n = best.len() as f64;
    let (sx, sy) = best.iter().fold((0.0, 0.0), |(ax, ay), &cell| {
        let (x, y) = live.cell_center(cell);
        (ax + x, ay + y)
    });
    Ok(Some(Vec3::new(sx / n, sy / n, VISITOR_FACE_HEIGHT)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(n: usize) -> OccupancyGrid {
        OccupancyGrid::new([0.0, 0.0], 0.1, n, n, CellState::Free)
    }

    #[test]
    fn single_blob_centroid() {
        let s = free(40);
        let mut live = s.clone();
        for cell in [(10, 10), (10, 11), (11, 10), (11, 11)] {
            live.set(cell, CellState::Occupied);
        }
        let p = visitor_from_costmap_diff(&s, &live).unwrap().unwrap();
        assert!((p.x - 1.1).abs() < 1e-12 && (p.y - 1.1).abs() < 1e-12);
        assert_eq!(p.z, 1.6);
    }

    #[test]
    fn empty_diff_is_absent() {
        let s = free(40);
        assert_eq!(visitor_from_costmap_diff(&s, &s.clone()).unwrap(), None);
    }

    #[test]
    fn static_obstacles_are_not_visitors() {
        let mut s = free(40);
        s.set((5, 5), CellState::Occupied);
        let live = s.clone();
        assert_eq!(visitor_from_costmap_diff(&s, &live).unwrap(), None);
    }

    #[test]
    fn resolution_mismatch() {
        let s = free(40);
        let live = OccupancyGrid::new([0.0, 0.0], 0.05, 80, 80, CellState::Free);
        assert!(visitor_from_costmap_diff(&s, &live).is_err());
    }

    #[test]
    fn serializes_codes_row_major() {
        let mut g = OccupancyGrid::new([0.5, -1.0], 0.25, 2, 3, CellState::Free);
        g.set((0, 1), CellState::Occupied);
        g.set((1, 2), CellState::Unknown);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(
            json,
            r#"{"origin":[0.5,-1.0],"resolution":0.25,"rows":2,"cols":3,"cells":[0,1,0,0,0,2]}"#
        );
        let back: OccupancyGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn window_is_four_meters() {
        let g = OccupancyGrid::new([0.0, 0.0], 0.1, 50, 120, CellState::Free);
        let w = g.window(6.0, 2.0, 4.0);
        assert_eq!((w.rows, w.cols), (40, 40));
        assert!((w.width_m() - 4.0).abs() < 1e-9);
        assert!((w.origin[0] - 4.0).abs() < 1e-9 && w.origin[1].abs() < 1e-9);
    }
}
