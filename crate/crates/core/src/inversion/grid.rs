use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point, Region};

/// Square grid of test anomalies over a centered square region of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Cells per side.
    pub cells: usize,
    /// Half side of the region of interest as a fraction of the domain
    /// radius, below `1/√2` so that corner cells stay off the boundary.
    #[serde(default = "default_half_side")]
    pub half_side: f64,
}

/// Slightly inside the inscribed square.
pub const DEFAULT_HALF_SIDE: f64 = 0.65;

fn default_half_side() -> f64 {
    DEFAULT_HALF_SIDE
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { cells: 8, half_side: DEFAULT_HALF_SIDE }
    }
}

/// Cell `index = row * cells + col`, rows counted upward from `y = −h`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestGrid {
    pub cells: usize,
    /// Side length in meters.
    pub side: f64,
    /// Lower-left corner of the region of interest.
    pub origin: Point,
    pub regions: Vec<Region>,
}

impl TestGrid {
    pub fn new(radius: f64, spec: GridSpec) -> Result<Self> {
        if spec.cells == 0 {
            return Err(invalid("the grid needs at least one cell"));
        }
        if !(spec.half_side > 0.0 && spec.half_side < std::f64::consts::FRAC_1_SQRT_2) {
            return Err(invalid(format!("half side {} must lie in (0, 1/√2)", spec.half_side)));
        }
        let h = spec.half_side * radius;
        let n = spec.cells;
        let side = 2.0 * h / n as f64;
        let origin = Point::new(-h, -h);
        let mut regions = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                let x0 = origin.x + col as f64 * side;
                let y0 = origin.y + row as f64 * side;
                regions.push(Region::rectangle(x0, y0, x0 + side, y0 + side)?);
            }
        }
        Ok(Self { cells: n, side, origin, regions })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// `(row, col)` of a cell index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        (index / self.cells, index % self.cells)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cells + col
    }

    pub fn center(&self, index: usize) -> Point {
        let (row, col) = self.position(index);
        Point::new(self.origin.x + (col as f64 + 0.5) * self.side, self.origin.y + (row as f64 + 0.5) * self.side)
    }

    /// Union of the listed `(row, col)` cells.
    pub fn union_of(&self, cells: &[(usize, usize)]) -> Result<Region> {
        let mut parts = Vec::with_capacity(cells.len());
        for &(row, col) in cells {
            if row >= self.cells || col >= self.cells {
                return Err(invalid(format!("cell ({row}, {col}) is outside the {0}×{0} grid", self.cells)));
            }
            parts.push(self.regions[self.index(row, col)].clone());
        }
        Ok(Region::union(parts))
    }

    /// Euclidean distance between cell `index` and a point.
    pub fn distance_to(&self, index: usize, p: Point) -> f64 {
        let c = self.center(index);
        let dx = ((p.x - c.x).abs() - 0.5 * self.side).max(0.0);
        let dy = ((p.y - c.y).abs() - 0.5 * self.side).max(0.0);
        dx.hypot(dy)
    }
}
