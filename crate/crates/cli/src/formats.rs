//! On-disk formats: a plain-text world format, TOML run configuration, and
//! JSONL files for suite manifests, episode results, and tick logs.
//!
//! World files look like:
//!
//! ```text
//! gridworld v1 8 3 0.1
//! ########
//! #....#.#
//! ########
//! obj 0 bed 5,1
//! seed 42
//! ```
//!
//! `#` marks occupied cells; object cells are listed separately and must be
//! occupied. Spawn cells, centroids, and the instance map are derived on
//! load, so the format round-trips losslessly.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use frontis_core::eval::{EpisodeResult, EpisodeSpec};
use frontis_core::manager::TickRecord;
use frontis_core::world::ObjectSpec;
use frontis_core::{Cell, GridDims, NavConfig, Occupancy, Vec3, WorldSpec};

pub fn world_to_string(world: &WorldSpec) -> String {
    let dims = world.dims;
    let mut out = format!("gridworld v1 {} {} {}\n", dims.width, dims.height, dims.resolution);
    for z in 0..dims.height {
        for x in 0..dims.width {
            out.push(match world.occupancy(Cell::new(x, z)) {
                Occupancy::Free => '.',
                Occupancy::Occupied => '#',
            });
        }
        out.push('\n');
    }
    for obj in &world.objects {
        out.push_str(&format!("obj {} {}", obj.id, obj.label));
        for c in &obj.cells {
            out.push_str(&format!(" {},{}", c.x, c.z));
        }
        out.push('\n');
    }
    out.push_str(&format!("seed {}\n", world.seed));
    out
}

pub fn world_from_str(text: &str) -> Result<WorldSpec> {
    let mut lines = text.lines();
    let header = lines.next().context("empty world file")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "gridworld" || parts[1] != "v1" {
        bail!("bad header: {header:?}");
    }
    let width: usize = parts[2].parse().context("width")?;
    let height: usize = parts[3].parse().context("height")?;
    let resolution: f64 = parts[4].parse().context("resolution")?;
    let dims = GridDims::new(width, height, resolution);

    let mut occ = Vec::with_capacity(dims.len());
    for z in 0..height {
        let row = lines.next().with_context(|| format!("missing row {z}"))?;
        if row.chars().count() != width {
            bail!("row {z} has wrong length");
        }
        for ch in row.chars() {
            occ.push(match ch {
                '.' => Occupancy::Free,
                '#' => Occupancy::Occupied,
                other => bail!("unexpected cell char {other:?} in row {z}"),
            });
        }
    }

    let mut objects = Vec::new();
    let mut seed = 0u64;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("obj") => {
                let id: u32 = fields.next().context("obj id")?.parse()?;
                let label = fields.next().context("obj label")?.to_string();
                let mut cells = Vec::new();
                for pair in fields {
                    let (x, z) = pair.split_once(',').context("obj cell")?;
                    let c = Cell::new(x.parse()?, z.parse()?);
                    if !dims.contains(c) {
                        bail!("object {id} cell {pair} outside grid");
                    }
                    if occ[dims.index(c)] != Occupancy::Occupied {
                        bail!("object {id} cell {pair} is not occupied");
                    }
                    cells.push(c);
                }
                objects.push(ObjectSpec { id, label, cells, centroid: Vec3::ZERO });
            }
            Some("seed") => {
                seed = fields.next().context("seed value")?.parse()?;
            }
            Some(other) => bail!("unexpected directive {other:?}"),
            None => {}
        }
    }
    WorldSpec::new(dims, occ, objects, seed).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn save_world(path: &Path, world: &WorldSpec) -> Result<()> {
    fs::write(path, world_to_string(world)).with_context(|| format!("writing {path:?}"))
}

pub fn load_world(path: &Path) -> Result<WorldSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    world_from_str(&text)
}

/// Loads run configuration from TOML. Absent keys fall back to defaults;
/// unknown keys are rejected to catch typos.
pub fn load_config(path: &Path) -> Result<NavConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    let cfg: NavConfig = toml::from_str(&text).with_context(|| format!("parsing {path:?}"))?;
    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

fn write_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {path:?}"))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{path:?} line {}", i + 1)))
        .collect()
}

pub fn write_manifest(path: &Path, episodes: &[EpisodeSpec]) -> Result<()> {
    write_jsonl(path, episodes)
}

pub fn read_manifest(path: &Path) -> Result<Vec<EpisodeSpec>> {
    read_jsonl(path)
}

pub fn write_results(path: &Path, results: &[EpisodeResult]) -> Result<()> {
    write_jsonl(path, results)
}

pub fn read_results(path: &Path) -> Result<Vec<EpisodeResult>> {
    read_jsonl(path)
}

pub fn write_log(path: &Path, records: &[TickRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_log(path: &Path) -> Result<Vec<TickRecord>> {
    read_jsonl(path)
}
