//! Grid point-goal planning. Plans run on the agent's belief: free cells
//! cost 1x to enter, unknown cells 3x (optimistic but cautious), occupied
//! cells and their 4-neighbors are impassable (the agent disc has the same
//! radius as the cell-center spacing, so it cannot stand next to a wall).
//! Moves are 8-connected with sqrt(2)-weighted diagonals and no corner
//! cutting. Ground-truth geodesic helpers live here too; the evaluator and
//! the oracle scorer share them, and those stay point-based deliberately:
//! SPL baselines and semantic distance fields measure geometry, not the
//! agent's footprint.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::config::NavConfig;
use crate::geom::{wrap_angle, Pose, Vec3};
use crate::grid::{Belief, BeliefGrid, Cell, GridDims, Occupancy};
use crate::num;
use crate::sim::Action;
use crate::world::WorldSpec;

pub const UNKNOWN_COST_FACTOR: f64 = 3.0;
const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Radius of the nearest-passable-cell search used when the requested goal
/// cell itself is believed occupied.
pub const GOAL_SNAP_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Start cell first, goal cell last.
    pub cells: Vec<Cell>,
    /// Total enter-cost in meters (includes the unknown-cell penalty).
    pub cost: f64,
}

impl Path {
    /// Metric length of the polyline through cell centers, penalty-free.
    pub fn length_m(&self, dims: &GridDims) -> f64 {
        self.cells
            .windows(2)
            .map(|w| step_len(w[0], w[1]) * dims.resolution)
            .sum()
    }
}

fn step_len(a: Cell, b: Cell) -> f64 {
    if a.x != b.x && a.z != b.z {
        SQRT_2
    } else {
        1.0
    }
}

fn enter_factor(b: Belief) -> Option<f64> {
    match b {
        Belief::Free => Some(1.0),
        Belief::Unknown => Some(UNKNOWN_COST_FACTOR),
        Belief::Occupied => None,
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

const ORTHO: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Whether the agent disc fits at the center of `c`: the cell itself and all
/// 4-neighbors must not be believed occupied (their centers lie exactly one
/// disc radius away).
pub fn disc_passable(belief: &BeliefGrid, c: Cell) -> bool {
    if belief.get(c) == Belief::Occupied {
        return false;
    }
    ORTHO.iter().all(|&(dx, dz)| {
        offset(&belief.dims, c, dx, dz)
            .map_or(true, |nb| belief.get(nb) != Belief::Occupied)
    })
}

fn offset(dims: &GridDims, c: Cell, dx: isize, dz: isize) -> Option<Cell> {
    let (x, z) = (c.x as isize + dx, c.z as isize + dz);
    if x < 0 || z < 0 {
        return None;
    }
    let n = Cell::new(x as usize, z as usize);
    dims.contains(n).then_some(n)
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    f: f64,
    idx: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed so the max-heap pops the lowest (f, idx)
        other
            .f
            .total_cmp(&self.f)
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: Cell, b: Cell, res: f64) -> f64 {
    let dx = a.x.abs_diff(b.x) as f64;
    let dz = a.z.abs_diff(b.z) as f64;
    let (lo, hi) = if dx < dz { (dx, dz) } else { (dz, dx) };
    (hi + (SQRT_2 - 1.0) * lo) * res
}

/// Snaps a goal cell the disc cannot occupy to the nearest passable cell
/// within [`GOAL_SNAP_RADIUS`] (ties broken by cell index).
pub fn snap_goal(belief: &BeliefGrid, goal: Cell) -> Option<Cell> {
    if disc_passable(belief, goal) {
        return Some(goal);
    }
    let dims = &belief.dims;
    let center = dims.cell_center(goal);
    let mut best: Option<(f64, usize)> = None;
    for c in dims.disc_cells(center, GOAL_SNAP_RADIUS) {
        if !disc_passable(belief, c) {
            continue;
        }
        let key = (
            crate::geom::euclidean_distance(dims.cell_center(c), center),
            dims.index(c),
        );
        if best.map_or(true, |b| (key.0, key.1) < b) {
            best = Some(key);
        }
    }
    best.map(|(_, idx)| dims.cell_at(idx))
}

/// A* from `start` to `goal` on the belief grid. Returns `None` when no
/// passable route exists (or the snapped goal does). The start cell's own
/// occupancy is ignored so a clipped pose can still escape.
pub fn plan(belief: &BeliefGrid, start: Cell, goal: Cell) -> Option<Path> {
    let goal = snap_goal(belief, goal)?;
    let dims = belief.dims;
    let res = dims.resolution;
    let n = dims.len();
    let start_idx = dims.index(start);
    let goal_idx = dims.index(goal);

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[start_idx] = 0.0;
    heap.push(HeapEntry { f: octile(start, goal, res), idx: start_idx });

    while let Some(HeapEntry { idx, .. }) = heap.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == goal_idx {
            break;
        }
        let c = dims.cell_at(idx);
        for (dx, dz) in NEIGHBORS {
            let Some(nb) = offset(&dims, c, dx, dz) else { continue };
            if !disc_passable(belief, nb) {
                continue;
            }
            let Some(factor) = enter_factor(belief.get(nb)) else { continue };
            if dx != 0 && dz != 0 {
                // no corner cutting: both orthogonal cells must be passable
                let side_a = offset(&dims, c, dx, 0);
                let side_b = offset(&dims, c, 0, dz);
                let ok = side_a.is_some_and(|s| belief.get(s) != Belief::Occupied)
                    && side_b.is_some_and(|s| belief.get(s) != Belief::Occupied);
                if !ok {
                    continue;
                }
            }
            let nb_idx = dims.index(nb);
            let cost = g[idx] + step_len(c, nb) * res * factor;
            if cost < g[nb_idx] {
                g[nb_idx] = cost;
                parent[nb_idx] = idx;
                heap.push(HeapEntry { f: cost + octile(nb, goal, res), idx: nb_idx });
            }
        }
    }

    if !g[goal_idx].is_finite() {
        return None;
    }
    let mut cells = vec![goal];
    let mut cur = goal_idx;
    while cur != start_idx {
        cur = parent[cur];
        cells.push(dims.cell_at(cur));
    }
    cells.reverse();
    Some(Path { cells, cost: g[goal_idx] })
}

/// Whether a full forward step from `from` along `heading` keeps the agent
/// disc clear of believed-occupied cells (unknown space is optimistically
/// clear). Mirrors the simulator's swept-disc collision model.
pub fn forward_clear(belief: &BeliefGrid, from: Vec3, heading: f64, dist: f64) -> bool {
    let dims = &belief.dims;
    let radius = dims.resolution;
    let dir = Vec3::new(num::sin(heading), 0.0, num::cos(heading));
    let to = from + dir * dist;
    let samples = (dist / (dims.resolution / 2.0)) as usize + 1;
    for i in 0..=samples {
        let p = from + (to - from) * (i as f64 / samples as f64);
        if dims.world_to_cell(p).is_none() {
            return false;
        }
        for c in dims.disc_cells(p, radius) {
            if belief.get(c) == Belief::Occupied {
                return false;
            }
        }
    }
    true
}

/// Next discrete action to make progress along `path` from `pose`. Aims at
/// the first waypoint at least one step-length ahead (so a full step cannot
/// overshoot it into a wall margin) and picks, among the discrete headings
/// whose forward sweep is clear in the belief, the one closest to the aim
/// direction; the current heading wins ties and yields MOVE_FORWARD.
/// Returns `None` when the path is exhausted or every heading is blocked.
pub fn next_action(pose: &Pose, path: &Path, belief: &BeliefGrid, cfg: &NavConfig) -> Option<Action> {
    let dims = &belief.dims;
    let lookahead = num::max(dims.resolution * 0.75, cfg.step_size);
    let target: Vec3 = path
        .cells
        .iter()
        .map(|&c| dims.cell_center(c))
        .find(|&p| crate::geom::euclidean_distance(p, pose.position.with_y(0.0)) > lookahead)
        .or_else(|| path.cells.last().map(|&c| dims.cell_center(c)))?;
    let to = target - pose.position.with_y(0.0);
    if to.norm() <= dims.resolution * 0.75 {
        return None;
    }
    let desired = num::atan2(to.x, to.z);
    let half_steps = (core::f64::consts::PI / cfg.turn_angle) as i32 + 1;
    let mut best: Option<(f64, i32)> = None;
    let mut consider = |k: i32| {
        let cand = pose.heading + k as f64 * cfg.turn_angle;
        if forward_clear(belief, pose.position, cand, cfg.step_size) {
            let off = num::abs(wrap_angle(cand - desired));
            if best.map_or(true, |(b, _)| off < b - 1e-12) {
                best = Some((off, k));
            }
        }
    };
    consider(0);
    for k in 1..=half_steps {
        consider(k);
        consider(-k);
    }
    match best? {
        (_, 0) => Some(Action::MoveForward),
        (_, k) if k > 0 => Some(Action::TurnLeft),
        _ => Some(Action::TurnRight),
    }
}

/// Remaining metric distance from `pose` to the end of `path`: straight
/// line to the first unvisited waypoint plus the polyline after it.
pub fn remaining_distance(pose: &Pose, path: &Path, dims: &GridDims) -> f64 {
    let p = pose.position.with_y(0.0);
    let lookahead = dims.resolution * 0.75;
    let nearest = path
        .cells
        .iter()
        .enumerate()
        .min_by(|a, b| {
            crate::geom::euclidean_distance(dims.cell_center(*a.1), p)
                .total_cmp(&crate::geom::euclidean_distance(dims.cell_center(*b.1), p))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    // resume after the nearest waypoint when standing on it
    let start = if crate::geom::euclidean_distance(dims.cell_center(path.cells[nearest]), p)
        <= lookahead
        && nearest + 1 < path.cells.len()
    {
        nearest + 1
    } else {
        nearest
    };
    let mut d = crate::geom::euclidean_distance(dims.cell_center(path.cells[start]), p);
    for w in path.cells[start..].windows(2) {
        d += step_len(w[0], w[1]) * dims.resolution;
    }
    d
}

/// Multi-source Dijkstra over ground-truth free space. Entries are metric
/// distances; unreachable or occupied cells hold infinity.
pub fn geodesic_field(world: &WorldSpec, sources: &[Cell]) -> Vec<f64> {
    let dims = world.dims;
    let res = dims.resolution;
    let n = dims.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if world.occupancy(s) == Occupancy::Free {
            let i = dims.index(s);
            dist[i] = 0.0;
            heap.push(HeapEntry { f: 0.0, idx: i });
        }
    }
    while let Some(HeapEntry { f, idx }) = heap.pop() {
        if f > dist[idx] {
            continue;
        }
        let c = dims.cell_at(idx);
        for (dx, dz) in NEIGHBORS {
            let Some(nb) = offset(&dims, c, dx, dz) else { continue };
            if world.occupancy(nb) != Occupancy::Free {
                continue;
            }
            if dx != 0 && dz != 0 {
                let ok = offset(&dims, c, dx, 0).is_some_and(|s| world.occupancy(s) == Occupancy::Free)
                    && offset(&dims, c, 0, dz).is_some_and(|s| world.occupancy(s) == Occupancy::Free);
                if !ok {
                    continue;
                }
            }
            let nb_idx = dims.index(nb);
            let nd = f + step_len(c, nb) * res;
            if nd < dist[nb_idx] {
                dist[nb_idx] = nd;
                heap.push(HeapEntry { f: nd, idx: nb_idx });
            }
        }
    }
    dist
}

/// Metric shortest-path distance through ground-truth free space, infinite
/// when disconnected.
pub fn geodesic_distance(world: &WorldSpec, from: Cell, to: Cell) -> f64 {
    let field = geodesic_field(world, &[from]);
    field[world.dims.index(to)]
}
