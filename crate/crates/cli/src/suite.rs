//! Deterministic benchmark suite construction: a batch of generated worlds
//! plus one episode per object-bearing world.

use anyhow::{anyhow, Result};
use frontis_core::eval::{spawn_pose, success_region, EpisodeSpec};
use frontis_core::planner::geodesic_field;
use frontis_core::world::{generate_world, WorldGenParams};
use frontis_core::WorldSpec;

#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub count: u64,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub rooms: usize,
    pub objects: usize,
    /// Minimum start-to-goal shortest-path length in meters; spawns closer
    /// than this are skipped when picking the episode start.
    pub min_sep: f64,
}

/// Spawn pick with the farthest qualifying start-to-goal path, so short or
/// infeasible episodes only appear when nothing better exists. Ties go to
/// the lowest pick index.
pub fn pick_spawn(world: &WorldSpec, goal: &str, min_sep: f64) -> Option<u64> {
    let n = world.spawn_cells.len() as u64;
    if n == 0 {
        return None;
    }
    let region = success_region(world, goal);
    let field = geodesic_field(world, &region);
    let score = |p: u64| {
        let cell = world
            .dims
            .world_to_cell(spawn_pose(world, p).unwrap().position)
            .unwrap();
        let d = if region.is_empty() { f64::INFINITY } else { field[world.dims.index(cell)] };
        if !d.is_finite() {
            return f64::NEG_INFINITY;
        }
        // anything past min_sep is equally fine
        d.min(min_sep.max(1e-9))
    };
    (0..n).max_by(|&a, &b| score(a).total_cmp(&score(b)).then(b.cmp(&a)))
}

/// Generates `count` worlds from consecutive seeds and one episode for each
/// world that carries objects. Goals cycle through the object labels.
pub fn build_suite(params: &SuiteParams) -> Result<(Vec<WorldSpec>, Vec<EpisodeSpec>)> {
    let gen = WorldGenParams {
        width: params.width,
        height: params.height,
        n_rooms: params.rooms,
        n_objects: params.objects,
        ..WorldGenParams::default()
    };
    let mut worlds = Vec::new();
    let mut episodes = Vec::new();
    for i in 0..params.count {
        let s = params.seed + i;
        let world = generate_world(s, &gen).map_err(|e| anyhow!("seed {s}: {e}"))?;
        if !world.objects.is_empty() {
            let goal = world.objects[(i as usize) % world.objects.len()].label.clone();
            let pick = pick_spawn(&world, &goal, params.min_sep).unwrap_or(i);
            episodes.push(EpisodeSpec { world_seed: s, spawn_pick: pick, goal });
        }
        worlds.push(world);
    }
    Ok((worlds, episodes))
}
