//! Planar grids: dimensions, cell addressing, the agent's belief map, and
//! the shared ray-marching primitive used by both sensing and belief
//! integration (identical traversal keeps the two consistent).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::num;

/// Grid extent and metric resolution. Cells index the x-z plane; cell
/// `(x, z)` spans `[x*res, (x+1)*res) x [z*res, (z+1)*res)` in world meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
}

impl GridDims {
    pub fn new(width: usize, height: usize, resolution: f64) -> Self {
        GridDims { width, height, resolution }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.z < self.height
    }

    pub fn index(&self, c: Cell) -> usize {
        c.z * self.width + c.x
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell { x: index % self.width, z: index / self.width }
    }

    /// Center of a cell in world coordinates (y = 0).
    pub fn cell_center(&self, c: Cell) -> Vec3 {
        Vec3::new(
            (c.x as f64 + 0.5) * self.resolution,
            0.0,
            (c.z as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_to_cell(&self, p: Vec3) -> Option<Cell> {
        if p.x < 0.0 || p.z < 0.0 {
            return None;
        }
        let c = Cell {
            x: num::floor(p.x / self.resolution) as usize,
            z: num::floor(p.z / self.resolution) as usize,
        };
        self.contains(c).then_some(c)
    }

    /// World-space diagonal in meters.
    pub fn diagonal(&self) -> f64 {
        num::hypot(
            self.width as f64 * self.resolution,
            self.height as f64 * self.resolution,
        )
    }

    /// Cells whose center lies within `radius` of `center`, in index order.
    pub fn disc_cells(&self, center: Vec3, radius: f64) -> Vec<Cell> {
        let mut out = Vec::new();
        let r_cells = (radius / self.resolution) as isize + 1;
        let cc = match self.world_to_cell(center) {
            Some(c) => c,
            None => return out,
        };
        let (zx, zz) = (cc.x as isize, cc.z as isize);
        for dz in -r_cells..=r_cells {
            for dx in -r_cells..=r_cells {
                let (x, z) = (zx + dx, zz + dz);
                if x < 0 || z < 0 {
                    continue;
                }
                let c = Cell { x: x as usize, z: z as usize };
                if self.contains(c)
                    && crate::geom::euclidean_distance(self.cell_center(c), center.with_y(0.0))
                        <= radius
                {
                    out.push(c);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub z: usize,
}

impl Cell {
    pub const fn new(x: usize, z: usize) -> Self {
        Cell { x, z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Occupancy {
    Free,
    Occupied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Belief {
    Unknown,
    Free,
    Occupied,
}

/// The agent's partial occupancy knowledge, initialized all-unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefGrid {
    pub dims: GridDims,
    cells: Vec<Belief>,
}

impl BeliefGrid {
    pub fn new(dims: GridDims) -> Self {
        BeliefGrid { cells: vec![Belief::Unknown; dims.len()], dims }
    }

    pub fn get(&self, c: Cell) -> Belief {
        self.cells[self.dims.index(c)]
    }

    pub fn set(&mut self, c: Cell, b: Belief) {
        let i = self.dims.index(c);
        self.cells[i] = b;
    }

    pub fn cells(&self) -> &[Belief] {
        &self.cells
    }

    pub fn count(&self, b: Belief) -> usize {
        self.cells.iter().filter(|&&c| c == b).count()
    }
}

/// Marches a planar ray through the grid (Amanatides-Woo traversal).
/// Calls `visit(cell, t_entry)` for every cell entered while `t_entry <
/// max_t`, starting with the origin cell at t = 0; stops early when the
/// callback returns `false` or the ray exits the grid.
pub fn march_ray<F>(dims: &GridDims, origin: Vec3, dir: Vec3, max_t: f64, mut visit: F)
where
    F: FnMut(Cell, f64) -> bool,
{
    let res = dims.resolution;
    let mut cell = match dims.world_to_cell(origin) {
        Some(c) => c,
        None => return,
    };
    if !visit(cell, 0.0) {
        return;
    }

    let step_x: isize = if dir.x > 0.0 { 1 } else { -1 };
    let step_z: isize = if dir.z > 0.0 { 1 } else { -1 };
    // distance along the ray to the next x / z cell boundary
    let mut t_max_x = if dir.x != 0.0 {
        let next = if dir.x > 0.0 {
            (cell.x as f64 + 1.0) * res
        } else {
            cell.x as f64 * res
        };
        (next - origin.x) / dir.x
    } else {
        f64::INFINITY
    };
    let mut t_max_z = if dir.z != 0.0 {
        let next = if dir.z > 0.0 {
            (cell.z as f64 + 1.0) * res
        } else {
            cell.z as f64 * res
        };
        (next - origin.z) / dir.z
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dir.x != 0.0 { res / num::abs(dir.x) } else { f64::INFINITY };
    let t_delta_z = if dir.z != 0.0 { res / num::abs(dir.z) } else { f64::INFINITY };

    loop {
        let t;
        if t_max_x < t_max_z {
            t = t_max_x;
            t_max_x += t_delta_x;
            let nx = cell.x as isize + step_x;
            if nx < 0 {
                return;
            }
            cell = Cell { x: nx as usize, z: cell.z };
        } else {
            t = t_max_z;
            t_max_z += t_delta_z;
            let nz = cell.z as isize + step_z;
            if nz < 0 {
                return;
            }
            cell = Cell { x: cell.x, z: nz as usize };
        }
        if t >= max_t || !dims.contains(cell) {
            return;
        }
        if !visit(cell, t) {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> GridDims {
        GridDims::new(10, 10, 0.1)
    }

    #[test]
    fn cell_roundtrip() {
        let d = dims();
        for i in 0..d.len() {
            let c = d.cell_at(i);
            assert_eq!(d.index(c), i);
            assert_eq!(d.world_to_cell(d.cell_center(c)), Some(c));
        }
    }

    #[test]
    fn ray_straight_down_z() {
        let d = dims();
        let mut cells = Vec::new();
        march_ray(
            &d,
            Vec3::new(0.05, 0.0, 0.05),
            Vec3::new(0.0, 0.0, 1.0),
            0.42,
            |c, _| {
                cells.push(c);
                true
            },
        );
        assert_eq!(
            cells,
            (0..5).map(|z| Cell::new(0, z)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn ray_matches_fine_sampling() {
        // independent oracle: sample along the ray at res/16 increments
        let d = dims();
        let origin = Vec3::new(0.137, 0.0, 0.201);
        let dir = Vec3::new(0.6, 0.0, 0.8);
        let max_t = 1.1;
        let mut marched = Vec::new();
        march_ray(&d, origin, dir, max_t, |c, _| {
            marched.push(c);
            true
        });
        let mut sampled = Vec::new();
        let mut t = 0.0;
        while t < max_t {
            if let Some(c) = d.world_to_cell(origin + dir * t) {
                if sampled.last() != Some(&c) {
                    sampled.push(c);
                }
            }
            t += d.resolution / 16.0;
        }
        assert_eq!(marched, sampled);
    }

    #[test]
    fn disc_cell_count() {
        let d = dims();
        let cells = d.disc_cells(Vec3::new(0.5, 0.0, 0.5), 0.25);
        for c in &cells {
            assert!(
                crate::geom::euclidean_distance(d.cell_center(*c), Vec3::new(0.5, 0.0, 0.5))
                    <= 0.25
            );
        }
        // brute force over the whole grid
        let brute = (0..d.len())
            .map(|i| d.cell_at(i))
            .filter(|c| {
                crate::geom::euclidean_distance(d.cell_center(*c), Vec3::new(0.5, 0.0, 0.5))
                    <= 0.25
            })
            .count();
        assert_eq!(cells.len(), brute);
    }
}
