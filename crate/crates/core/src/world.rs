//! Ground-truth worlds: labeled occupancy grids with object instances, plus
//! the procedural rooms-and-corridors generator.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::grid::{Cell, GridDims, Occupancy};

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub id: u32,
    pub label: String,
    pub cells: Vec<Cell>,
    pub centroid: Vec3,
}

/// A complete ground-truth world. Object cells are occupied cells that carry
/// an instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub dims: GridDims,
    occ: Vec<Occupancy>,
    pub objects: Vec<ObjectSpec>,
    pub spawn_cells: Vec<Cell>,
    pub seed: u64,
    owner: Vec<Option<u32>>,
}

impl WorldSpec {
    /// Validates invariants and derives the owner map, object centroids, and
    /// spawn region.
    pub fn new(
        dims: GridDims,
        occ: Vec<Occupancy>,
        mut objects: Vec<ObjectSpec>,
        seed: u64,
    ) -> Result<Self> {
        if occ.len() != dims.len() {
            return Err(Error::InvalidInput("grid size mismatch".into()));
        }
        let mut owner = vec![None; dims.len()];
        for obj in &mut objects {
            if obj.cells.is_empty() {
                return Err(Error::InvalidInput(format!("object {} has no cells", obj.id)));
            }
            if obj.label.is_empty() {
                return Err(Error::InvalidInput(format!("object {} has empty label", obj.id)));
            }
            let mut sum = Vec3::ZERO;
            for &c in &obj.cells {
                if !dims.contains(c) {
                    return Err(Error::InvalidInput(format!(
                        "object {} cell outside grid",
                        obj.id
                    )));
                }
                owner[dims.index(c)] = Some(obj.id);
                sum = sum + dims.cell_center(c);
            }
            obj.centroid = sum * (1.0 / obj.cells.len() as f64);
        }
        let spawn_cells = derive_spawn_cells(&dims, &occ);
        Ok(WorldSpec { dims, occ, objects, spawn_cells, seed, owner })
    }

    pub fn occupancy(&self, c: Cell) -> Occupancy {
        self.occ[self.dims.index(c)]
    }

    pub fn occupancy_cells(&self) -> &[Occupancy] {
        &self.occ
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.occupancy(c) == Occupancy::Free
    }

    pub fn instance_at(&self, c: Cell) -> Option<u32> {
        self.owner[self.dims.index(c)]
    }

    pub fn object(&self, id: u32) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn free_cell_count(&self) -> usize {
        self.occ.iter().filter(|&&o| o == Occupancy::Free).count()
    }

    /// 4-connected flood fill over free cells starting from `start`.
    /// Returns a per-cell reachability mask.
    pub fn reachable_free(&self, start: Cell) -> Vec<bool> {
        flood_fill(&self.dims, &self.occ, start)
    }

    /// Every free cell reachable from every other free cell.
    pub fn is_connected(&self) -> bool {
        let first = match self.occ.iter().position(|&o| o == Occupancy::Free) {
            Some(i) => self.dims.cell_at(i),
            None => return true,
        };
        let mask = self.reachable_free(first);
        self.occ
            .iter()
            .enumerate()
            .all(|(i, &o)| o != Occupancy::Free || mask[i])
    }
}

fn derive_spawn_cells(dims: &GridDims, occ: &[Occupancy]) -> Vec<Cell> {
    let mut out = Vec::new();
    for z in 1..dims.height.saturating_sub(1) {
        for x in 1..dims.width.saturating_sub(1) {
            let clear = (-1..=1).all(|dz: isize| {
                (-1..=1).all(|dx: isize| {
                    let c = Cell::new((x as isize + dx) as usize, (z as isize + dz) as usize);
                    occ[dims.index(c)] == Occupancy::Free
                })
            });
            if clear {
                out.push(Cell::new(x, z));
            }
        }
    }
    out
}

fn flood_fill(dims: &GridDims, occ: &[Occupancy], start: Cell) -> Vec<bool> {
    let mut mask = vec![false; dims.len()];
    if !dims.contains(start) || occ[dims.index(start)] != Occupancy::Free {
        return mask;
    }
    let mut stack = vec![start];
    mask[dims.index(start)] = true;
    while let Some(c) = stack.pop() {
        for (dx, dz) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
            let (nx, nz) = (c.x as isize + dx, c.z as isize + dz);
            if nx < 0 || nz < 0 {
                continue;
            }
            let n = Cell::new(nx as usize, nz as usize);
            if dims.contains(n) {
                let i = dims.index(n);
                if !mask[i] && occ[i] == Occupancy::Free {
                    mask[i] = true;
                    stack.push(n);
                }
            }
        }
    }
    mask
}

#[derive(Debug, Clone)]
pub struct WorldGenParams {
    pub width: usize,
    pub height: usize,
    pub n_rooms: usize,
    pub n_objects: usize,
    pub label_vocabulary: Vec<String>,
    pub resolution: f64,
}

impl Default for WorldGenParams {
    fn default() -> Self {
        WorldGenParams {
            width: 64,
            height: 64,
            n_rooms: 4,
            n_objects: 3,
            label_vocabulary: vec![
                "bed".into(),
                "sofa".into(),
                "plant".into(),
                "toilet".into(),
                "chair".into(),
            ],
            resolution: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Room {
    x: usize,
    z: usize,
    w: usize,
    h: usize,
}

impl Room {
    fn center(&self) -> Cell {
        Cell::new(self.x + self.w / 2, self.z + self.h / 2)
    }
}

/// Deterministic rooms-and-corridors world generator. Free space is always
/// connected; objects sit against walls inside rooms.
pub fn generate_world(seed: u64, params: &WorldGenParams) -> Result<WorldSpec> {
    if params.width < 32 || params.height < 32 {
        return Err(Error::Generation("world must be at least 32x32 cells".into()));
    }
    if params.n_rooms < 1 {
        return Err(Error::Generation("need at least one room".into()));
    }
    if params.n_objects > 0 && params.label_vocabulary.is_empty() {
        return Err(Error::Generation("objects requested with empty vocabulary".into()));
    }
    let dims = GridDims::new(params.width, params.height, params.resolution);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occ = vec![Occupancy::Occupied; dims.len()];

    // carve rooms
    let mut rooms: Vec<Room> = Vec::new();
    let mut attempts = 0;
    while rooms.len() < params.n_rooms && attempts < params.n_rooms * 300 {
        attempts += 1;
        // shrink rooms as attempts accumulate so tight layouts still fill
        let hi = if attempts > params.n_rooms * 100 { 12 } else { 16 };
        let w = rng.gen_range(9..=hi.min(params.width - 4));
        let h = rng.gen_range(9..=hi.min(params.height - 4));
        let x = rng.gen_range(2..params.width - w - 1);
        let z = rng.gen_range(2..params.height - h - 1);
        let room = Room { x, z, w, h };
        let overlaps = rooms.iter().any(|r| {
            x < r.x + r.w + 2 && r.x < x + w + 2 && z < r.z + r.h + 2 && r.z < z + h + 2
        });
        if overlaps {
            continue;
        }
        for cz in z..z + h {
            for cx in x..x + w {
                occ[dims.index(Cell::new(cx, cz))] = Occupancy::Free;
            }
        }
        rooms.push(room);
    }
    if rooms.len() < params.n_rooms {
        return Err(Error::Generation(format!(
            "placed only {} of {} rooms",
            rooms.len(),
            params.n_rooms
        )));
    }

    // connect consecutive rooms with L-shaped corridors, 5 cells wide
    let half = 2isize;
    for i in 1..rooms.len() {
        let a = rooms[i - 1].center();
        let b = rooms[i].center();
        let carve = |occ: &mut Vec<Occupancy>, x: isize, z: isize| {
            for dz in -half..=half {
                for dx in -half..=half {
                    let (cx, cz) = (x + dx, z + dz);
                    if cx >= 1
                        && cz >= 1
                        && (cx as usize) < params.width - 1
                        && (cz as usize) < params.height - 1
                    {
                        occ[dims.index(Cell::new(cx as usize, cz as usize))] = Occupancy::Free;
                    }
                }
            }
        };
        let (ax, az) = (a.x as isize, a.z as isize);
        let (bx, bz) = (b.x as isize, b.z as isize);
        let mut x = ax;
        while x != bx {
            carve(&mut occ, x, az);
            x += (bx - ax).signum();
        }
        let mut z = az;
        while z != bz {
            carve(&mut occ, bx, z);
            z += (bz - az).signum();
        }
        carve(&mut occ, bx, bz);
    }

    // place objects against room walls; each is a 2x2 block of formerly-free
    // cells, rejected if it would disconnect free space
    let mut objects: Vec<ObjectSpec> = Vec::new();
    for obj_idx in 0..params.n_objects {
        let label = params.label_vocabulary
            [rng.gen_range(0..params.label_vocabulary.len())]
        .clone();
        let mut placed = false;
        for _ in 0..400 {
            let room = rooms[rng.gen_range(0..rooms.len())];
            let cx = room.x + rng.gen_range(0..room.w.saturating_sub(1).max(1));
            let cz = room.z + rng.gen_range(0..room.h.saturating_sub(1).max(1));
            let block = [
                Cell::new(cx, cz),
                Cell::new(cx + 1, cz),
                Cell::new(cx, cz + 1),
                Cell::new(cx + 1, cz + 1),
            ];
            if !block
                .iter()
                .all(|&c| dims.contains(c) && occ[dims.index(c)] == Occupancy::Free)
            {
                continue;
            }
            // require wall contact so objects hug room boundaries
            let against_wall = block.iter().any(|&c| {
                [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dz)| {
                    let (nx, nz) = (c.x as isize + dx, c.z as isize + dz);
                    nx < 0
                        || nz < 0
                        || !dims.contains(Cell::new(nx as usize, nz as usize))
                        || occ[dims.index(Cell::new(nx as usize, nz as usize))]
                            == Occupancy::Occupied
                })
            });
            if !against_wall {
                continue;
            }
            for &c in &block {
                occ[dims.index(c)] = Occupancy::Occupied;
            }
            let connected = {
                let first = occ.iter().position(|&o| o == Occupancy::Free);
                match first {
                    Some(i) => {
                        let mask = flood_fill(&dims, &occ, dims.cell_at(i));
                        occ.iter().enumerate().all(|(j, &o)| o != Occupancy::Free || mask[j])
                    }
                    None => false,
                }
            };
            if !connected {
                for &c in &block {
                    occ[dims.index(c)] = Occupancy::Free;
                }
                continue;
            }
            objects.push(ObjectSpec {
                id: obj_idx as u32 + 1,
                label: label.clone(),
                cells: block.to_vec(),
                centroid: Vec3::ZERO, // derived in WorldSpec::new
            });
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::Generation(format!(
                "could not place object {} ({label})",
                obj_idx + 1
            )));
        }
    }

    let world = WorldSpec::new(dims, occ, objects, seed)?;
    if world.spawn_cells.is_empty() {
        return Err(Error::Generation("no spawn cells with clearance".into()));
    }
    Ok(world)
}
