//! Frontier extraction from the belief grid and information-gain estimation.
//! This is the classical grid-based detector sitting behind the
//! [`FrontierDetector`] interface; an image-space detector can replace it
//! without touching the rest of the pipeline.

use alloc::vec;
use alloc::vec::Vec;

use crate::camera::{project, CameraModel};
use crate::geom::Vec3;
use crate::grid::{Belief, BeliefGrid, Cell};
use crate::sim::Observation;

/// A candidate exploration subgoal extracted from the belief map.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierProposal {
    pub centroid: Vec3,
    pub cells: Vec<Cell>,
    /// Normalized information gain estimate in [0, 1].
    pub gain_raw: f64,
    /// Image position when the centroid is visible in the current
    /// observation.
    pub pixel_centroid: Option<(f64, f64)>,
    pub observed_at_step: u32,
}

/// Detector slot: the default is grid-based extraction, but anything that
/// yields valid proposals against the supplied belief fits.
pub trait FrontierDetector {
    fn detect(
        &mut self,
        belief: &BeliefGrid,
        obs: &Observation,
        camera: &CameraModel,
        r_gain: f64,
        min_cluster_cells: usize,
    ) -> Vec<FrontierProposal>;
}

pub struct GridFrontierDetector;

impl FrontierDetector for GridFrontierDetector {
    fn detect(
        &mut self,
        belief: &BeliefGrid,
        obs: &Observation,
        camera: &CameraModel,
        r_gain: f64,
        min_cluster_cells: usize,
    ) -> Vec<FrontierProposal> {
        let mut proposals = extract_frontiers(belief, min_cluster_cells);
        for p in &mut proposals {
            p.gain_raw = estimate_info_gain(p.centroid, belief, r_gain);
            p.pixel_centroid = project_to_observation(p.centroid, obs, camera);
            p.observed_at_step = obs.step_index;
        }
        proposals
    }
}

pub fn is_frontier_cell(belief: &BeliefGrid, c: Cell) -> bool {
    if belief.get(c) != Belief::Free {
        return false;
    }
    [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dz)| {
        let (nx, nz) = (c.x as isize + dx, c.z as isize + dz);
        if nx < 0 || nz < 0 {
            return false;
        }
        let n = Cell::new(nx as usize, nz as usize);
        belief.dims.contains(n) && belief.get(n) == Belief::Unknown
    })
}

/// Frontier cells (free cells 4-adjacent to unknown) clustered by
/// 8-connectivity; clusters below `min_cluster_cells` are dropped. Clusters
/// come out ordered by their smallest cell index, members in index order.
pub fn extract_frontiers(belief: &BeliefGrid, min_cluster_cells: usize) -> Vec<FrontierProposal> {
    let dims = belief.dims;
    let mut frontier = vec![false; dims.len()];
    for i in 0..dims.len() {
        frontier[i] = is_frontier_cell(belief, dims.cell_at(i));
    }
    let mut visited = vec![false; dims.len()];
    let mut out = Vec::new();
    for i in 0..dims.len() {
        if !frontier[i] || visited[i] {
            continue;
        }
        // BFS over 8-connected frontier cells
        let mut members = Vec::new();
        let mut stack = vec![dims.cell_at(i)];
        visited[i] = true;
        while let Some(c) = stack.pop() {
            members.push(c);
            for dz in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dz == 0 {
                        continue;
                    }
                    let (nx, nz) = (c.x as isize + dx, c.z as isize + dz);
                    if nx < 0 || nz < 0 {
                        continue;
                    }
                    let n = Cell::new(nx as usize, nz as usize);
                    if dims.contains(n) {
                        let j = dims.index(n);
                        if frontier[j] && !visited[j] {
                            visited[j] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        if members.len() < min_cluster_cells {
            continue;
        }
        members.sort();
        let mut sum = Vec3::ZERO;
        for &c in &members {
            sum = sum + dims.cell_center(c);
        }
        let centroid = sum * (1.0 / members.len() as f64);
        out.push(FrontierProposal {
            centroid,
            cells: members,
            gain_raw: 0.0,
            pixel_centroid: None,
            observed_at_step: 0,
        });
    }
    out
}

/// Fraction of unknown cells inside the `r_gain` disc around the centroid.
pub fn estimate_info_gain(centroid: Vec3, belief: &BeliefGrid, r_gain: f64) -> f64 {
    let cells = belief.dims.disc_cells(centroid, r_gain);
    if cells.is_empty() {
        return 0.0;
    }
    let unknown = cells.iter().filter(|&&c| belief.get(c) == Belief::Unknown).count();
    unknown as f64 / cells.len() as f64
}

/// Image position of a world point under the observation's camera, or `None`
/// when out of the field of view, beyond range, or occluded.
pub fn project_to_observation(
    centroid: Vec3,
    obs: &Observation,
    camera: &CameraModel,
) -> Option<(f64, f64)> {
    let (u, v, z) = project(centroid.with_y(0.0), camera, &obs.camera_pose)?;
    if !(0.0..camera.width as f64).contains(&u) || z > camera.max_depth {
        return None;
    }
    let col = u as usize;
    // occluded when the sensed surface in this column is in front of it
    if z > obs.depths[col] + 2.0 * 0.1 {
        return None;
    }
    Some((u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pose;
    use crate::grid::GridDims;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn belief_from(rows: &[&str]) -> BeliefGrid {
        let dims = GridDims::new(rows[0].len(), rows.len(), 0.1);
        let mut b = BeliefGrid::new(dims);
        for (z, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let v = match ch {
                    '.' => Belief::Free,
                    '#' => Belief::Occupied,
                    _ => Belief::Unknown,
                };
                b.set(Cell::new(x, z), v);
            }
        }
        b
    }

    /// Independent re-derivation of the frontier-cluster definition.
    fn brute_force_clusters(belief: &BeliefGrid, min_cells: usize) -> Vec<Vec<Cell>> {
        let dims = belief.dims;
        let cells: Vec<Cell> = (0..dims.len())
            .map(|i| dims.cell_at(i))
            .filter(|&c| is_frontier_cell(belief, c))
            .collect();
        // transitive closure under 8-adjacency
        let mut labels: Vec<usize> = (0..cells.len()).collect();
        loop {
            let mut changed = false;
            for i in 0..cells.len() {
                for j in 0..cells.len() {
                    let adj = cells[i].x.abs_diff(cells[j].x) <= 1
                        && cells[i].z.abs_diff(cells[j].z) <= 1;
                    if adj && labels[j] < labels[i] {
                        labels[i] = labels[j];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<Cell>> = Default::default();
        for (i, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(cells[i]);
        }
        let mut out: Vec<Vec<Cell>> = groups
            .into_values()
            .filter(|g| g.len() >= min_cells)
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn fully_observed_room_has_no_frontiers() {
        let b = belief_from(&[
            "#####",
            "#...#",
            "#...#",
            "#####",
        ]);
        assert!(extract_frontiers(&b, 1).is_empty());
    }

    #[test]
    fn single_free_cell_in_unknown() {
        let b = belief_from(&[
            "???",
            "?.?",
            "???",
        ]);
        let f = extract_frontiers(&b, 1);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].cells, vec![Cell::new(1, 1)]);
        let c = b.dims.cell_center(Cell::new(1, 1));
        assert!(crate::geom::euclidean_distance(f[0].centroid, c) < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_beliefs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let dims = GridDims::new(16, 16, 0.1);
            let mut b = BeliefGrid::new(dims);
            for i in 0..dims.len() {
                let v = match rng.gen_range(0..3) {
                    0 => Belief::Unknown,
                    1 => Belief::Free,
                    _ => Belief::Occupied,
                };
                b.set(dims.cell_at(i), v);
            }
            for min_cells in [1, 3] {
                let mut got: Vec<Vec<Cell>> =
                    extract_frontiers(&b, min_cells).into_iter().map(|p| p.cells).collect();
                got.sort();
                assert_eq!(got, brute_force_clusters(&b, min_cells));
            }
        }
    }

    #[test]
    fn gain_saturation_and_zero() {
        let dims = GridDims::new(60, 60, 0.1);
        let mut b = BeliefGrid::new(dims);
        // one free cell in a sea of unknown: gain near 1
        let c = Cell::new(30, 30);
        b.set(c, Belief::Free);
        let g = estimate_info_gain(dims.cell_center(c), &b, 2.0);
        assert!(g > 0.99);
        // fully known disc: gain exactly 0
        let mut known = BeliefGrid::new(dims);
        for i in 0..dims.len() {
            known.set(dims.cell_at(i), Belief::Free);
        }
        assert_eq!(estimate_info_gain(dims.cell_center(c), &known, 2.0), 0.0);
    }

    #[test]
    fn gain_equals_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = GridDims::new(32, 32, 0.1);
        let mut b = BeliefGrid::new(dims);
        for i in 0..dims.len() {
            let v = match rng.gen_range(0..3) {
                0 => Belief::Unknown,
                1 => Belief::Free,
                _ => Belief::Occupied,
            };
            b.set(dims.cell_at(i), v);
        }
        let centroid = Vec3::new(1.55, 0.0, 1.63);
        let (mut unknown, mut total) = (0usize, 0usize);
        for i in 0..dims.len() {
            let c = dims.cell_at(i);
            if crate::geom::euclidean_distance(dims.cell_center(c), centroid) <= 2.0 {
                total += 1;
                if b.get(c) == Belief::Unknown {
                    unknown += 1;
                }
            }
        }
        let g = estimate_info_gain(centroid, &b, 2.0);
        assert_eq!(g, unknown as f64 / total as f64);
    }

    #[test]
    fn projection_cases() {
        let cam = CameraModel::from_fov(128, 96, 79f64.to_radians(), 3.5).unwrap();
        let pose = Pose::new(Vec3::new(1.0, 0.0, 1.0), 0.0);
        let obs = Observation {
            depths: vec![3.5; 128],
            instance_ids: vec![None; 128],
            camera_pose: pose,
            step_index: 0,
        };
        // straight ahead: principal column
        let (u, _) = project_to_observation(Vec3::new(1.0, 0.0, 3.0), &obs, &cam).unwrap();
        assert!((u - cam.cx).abs() < 1e-9);
        // behind the camera
        assert!(project_to_observation(Vec3::new(1.0, 0.0, 0.0), &obs, &cam).is_none());
        // occluded by a nearer surface
        let mut blocked = obs.clone();
        blocked.depths = vec![0.5; 128];
        assert!(project_to_observation(Vec3::new(1.0, 0.0, 3.0), &blocked, &cam).is_none());
    }

    #[test]
    fn projection_ray_passes_near_centroid() {
        let cam = CameraModel::from_fov(128, 96, 79f64.to_radians(), 3.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let obs = Observation {
            depths: vec![3.5; 128],
            instance_ids: vec![None; 128],
            camera_pose: Pose::new(Vec3::new(2.0, 0.0, 2.0), 0.4),
            step_index: 0,
        };
        for _ in 0..200 {
            let p = Vec3::new(rng.gen_range(0.0..4.0), 0.0, rng.gen_range(0.0..4.0));
            if let Some((u, _)) = project_to_observation(p, &obs, &cam) {
                let (dir, _) = crate::sim::column_ray(&cam, &obs.camera_pose, u as usize);
                let rel = p - obs.camera_pose.position;
                // perpendicular distance from the column ray to the point
                let along = rel.dot(dir);
                let perp = (rel - dir * along).norm();
                assert!(perp < 0.1, "perp {perp}");
            }
        }
    }
}
