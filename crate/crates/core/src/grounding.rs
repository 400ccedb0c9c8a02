//! Turning detections into world-frame object hypotheses: column masks from
//! a segmenter, back-projection, density clustering of repeated sightings,
//! a cooldown blocklist for rejected hypotheses, and the camera-facing
//! viewpoint construction used to approach a candidate object.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geom::{euclidean_distance, Vec3};
use crate::num;
use crate::sim::Observation;
use crate::world::WorldSpec;

/// Columns of the current observation claimed by one detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub columns: Vec<usize>,
}

pub trait Segmenter {
    /// Masks for every visible instance matching `goal`, in stable order.
    fn segment(&mut self, obs: &Observation, goal: &str) -> Vec<Mask>;
}

/// Reads instance ids straight out of the simulator observation; one mask
/// per visible instance whose label equals the goal exactly.
pub struct GroundTruthSegmenter {
    labels: BTreeMap<u32, String>,
}

impl GroundTruthSegmenter {
    pub fn new(world: &WorldSpec) -> Self {
        let labels = world
            .objects
            .iter()
            .map(|o| (o.id, o.label.clone()))
            .collect();
        GroundTruthSegmenter { labels }
    }
}

impl Segmenter for GroundTruthSegmenter {
    fn segment(&mut self, obs: &Observation, goal: &str) -> Vec<Mask> {
        let mut by_instance: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (col, id) in obs.instance_ids.iter().enumerate() {
            if let Some(id) = id {
                if self.labels.get(id).map(String::as_str) == Some(goal) {
                    by_instance.entry(*id).or_default().push(col);
                }
            }
        }
        by_instance
            .into_values()
            .map(|columns| Mask { columns })
            .collect()
    }
}

/// A candidate object location aggregated from one or more sightings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectHypothesis {
    pub position: Vec3,
    /// Total pixel-column evidence behind this hypothesis.
    pub support: usize,
    pub last_seen_step: u64,
}

/// Back-projects each mask at its observed depths and averages the hit
/// points into one hypothesis per mask. Columns at max range carry no
/// surface and are skipped; empty masks yield nothing.
pub fn detect(obs: &Observation, camera: &CameraModel, masks: &[Mask]) -> Vec<ObjectHypothesis> {
    let v_mid = camera.cy;
    let mut out = Vec::new();
    for mask in masks {
        let mut sum = Vec3::ZERO;
        let mut n = 0usize;
        for &col in &mask.columns {
            let depth = obs.depths[col];
            if depth >= camera.max_depth - 1e-9 {
                continue;
            }
            let pixel = (col as f64 + 0.5, v_mid);
            if let Ok(p) = crate::camera::back_project(pixel, depth, camera, &obs.camera_pose) {
                sum = sum + p;
                n += 1;
            }
        }
        if n > 0 {
            out.push(ObjectHypothesis {
                position: (sum * (1.0 / n as f64)).with_y(0.0),
                support: n,
                last_seen_step: obs.step_index as u64,
            });
        }
    }
    out
}

/// Density clustering with minPts = 1, which reduces to single-linkage:
/// hypotheses within `eps` of any cluster member join that cluster. Each
/// cluster collapses to a support-weighted mean with summed support.
pub fn cluster_hypotheses(hyps: &[ObjectHypothesis], eps: f64) -> Vec<ObjectHypothesis> {
    let n = hyps.len();
    let mut cluster_of = vec![usize::MAX; n];
    let mut next = 0usize;
    for i in 0..n {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        let id = next;
        next += 1;
        // breadth-first expansion over the eps-neighborhood graph
        let mut queue = vec![i];
        cluster_of[i] = id;
        while let Some(j) = queue.pop() {
            for k in 0..n {
                if cluster_of[k] == usize::MAX
                    && euclidean_distance(hyps[j].position, hyps[k].position) <= eps
                {
                    cluster_of[k] = id;
                    queue.push(k);
                }
            }
        }
    }
    let mut out: Vec<ObjectHypothesis> = Vec::with_capacity(next);
    for id in 0..next {
        let members: Vec<&ObjectHypothesis> =
            (0..n).filter(|&k| cluster_of[k] == id).map(|k| &hyps[k]).collect();
        let total: usize = members.iter().map(|h| h.support).sum();
        let mut mean = Vec3::ZERO;
        for h in &members {
            mean = mean + h.position * (h.support as f64 / total as f64);
        }
        out.push(ObjectHypothesis {
            position: mean,
            support: total,
            last_seen_step: members.iter().map(|h| h.last_seen_step).max().unwrap_or(0),
        });
    }
    out
}

/// Locations where a hypothesis was rejected; re-detections nearby are
/// suppressed until the cooldown lapses.
#[derive(Debug, Clone, Default)]
pub struct Blocklist {
    entries: Vec<(Vec3, u64)>,
}

pub const BLOCK_RADIUS: f64 = 1.0;
pub const BLOCK_COOLDOWN_STEPS: u64 = 100;

impl Blocklist {
    pub fn add(&mut self, position: Vec3, step: u64) {
        self.entries.push((position, step));
    }

    pub fn is_blocked(&self, position: Vec3, step: u64) -> bool {
        self.entries.iter().any(|&(p, s)| {
            euclidean_distance(p, position) <= BLOCK_RADIUS
                && step < s.saturating_add(BLOCK_COOLDOWN_STEPS)
        })
    }

    pub fn retain_active(&mut self, step: u64) {
        self.entries
            .retain(|&(_, s)| step < s.saturating_add(BLOCK_COOLDOWN_STEPS));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An approach pose for verifying a hypothesis: stand `r_sep` back from the
/// object along the line of sight, camera axes forming a right-handed
/// orthonormal frame with +z towards the object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub object: Vec3,
    pub position: Vec3,
    pub f_x: Vec3,
    pub f_y: Vec3,
    pub f_z: Vec3,
}

pub fn make_viewpoint(object: Vec3, robot: Vec3, r_sep: f64) -> Result<Viewpoint> {
    let to_obj = object - robot;
    if to_obj.norm() < 1e-9 {
        return Err(Error::DegenerateGeometry);
    }
    let f_z = to_obj.normalized();
    let side = Vec3::UP.cross(f_z);
    if side.norm() < 1e-9 {
        return Err(Error::DegenerateGeometry);
    }
    let f_x = side.normalized();
    let f_y = f_z.cross(f_x);
    Ok(Viewpoint {
        object,
        position: object - f_z * r_sep,
        f_x,
        f_y,
        f_z,
    })
}

impl Viewpoint {
    /// Heading that points the camera's forward axis at the object.
    pub fn heading(&self) -> f64 {
        num::atan2(self.f_z.x, self.f_z.z)
    }
}
