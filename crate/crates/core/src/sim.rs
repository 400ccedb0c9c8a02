//! Discrete-action agent, raycast sensing, belief integration, and the
//! ground-truth success oracle.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geom::{euclidean_distance, Pose, Vec3};
use crate::grid::{march_ray, Belief, BeliefGrid, Cell, Occupancy};
use crate::num;
use crate::world::WorldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    MoveForward,
    TurnLeft,
    TurnRight,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub pose: Pose,
    pub step_count: u32,
    pub path_length_so_far: f64,
    pub collided_last_step: bool,
    pub stopped: bool,
}

impl AgentState {
    pub fn at(pose: Pose) -> Self {
        AgentState {
            pose,
            step_count: 0,
            path_length_so_far: 0.0,
            collided_last_step: false,
            stopped: false,
        }
    }
}

/// One sensing snapshot: a single ray per image column. Depths are z-depths
/// in the camera frame, capped at `max_depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub depths: Vec<f64>,
    pub instance_ids: Vec<Option<u32>>,
    pub camera_pose: Pose,
    pub step_index: u32,
}

/// Ray direction and the cos of its angular offset from the optical axis,
/// for image column `col`. Shared by rendering and belief integration so the
/// two traverse identical cells.
pub fn column_ray(camera: &CameraModel, pose: &Pose, col: usize) -> (Vec3, f64) {
    let x_ndc = (col as f64 + 0.5 - camera.cx) / camera.fx;
    let cos_off = 1.0 / num::sqrt(1.0 + x_ndc * x_ndc);
    let dir_cam = Vec3::new(x_ndc, 0.0, 1.0) * cos_off; // unit length
    (pose.rotate_to_world(dir_cam), cos_off)
}

/// Advances the agent by one discrete action. MOVE_FORWARD is blocked when
/// the swept one-cell agent disc would intersect occupied space.
pub fn step(
    world: &WorldSpec,
    state: AgentState,
    action: Action,
    step_size: f64,
    turn_angle: f64,
    max_steps: u32,
) -> Result<AgentState> {
    if state.stopped || state.step_count >= max_steps {
        return Err(Error::EpisodeTerminated);
    }
    let mut next = state;
    next.step_count += 1;
    next.collided_last_step = false;
    match action {
        Action::Stop => next.stopped = true,
        Action::TurnLeft => {
            next.pose = Pose::new(state.pose.position, state.pose.heading + turn_angle)
        }
        Action::TurnRight => {
            next.pose = Pose::new(state.pose.position, state.pose.heading - turn_angle)
        }
        Action::MoveForward => {
            let target = state.pose.position + state.pose.forward() * step_size;
            if swept_disc_clear(world, state.pose.position, target) {
                next.pose = Pose::new(target, state.pose.heading);
                next.path_length_so_far += euclidean_distance(state.pose.position, target);
            } else {
                next.collided_last_step = true;
            }
        }
    }
    Ok(next)
}

fn disc_clear(world: &WorldSpec, p: Vec3) -> bool {
    let radius = world.dims.resolution;
    for c in world.dims.disc_cells(p, radius) {
        if world.occupancy(c) == Occupancy::Occupied {
            return false;
        }
    }
    // off-grid points are not clear
    world.dims.world_to_cell(p).is_some()
}

fn swept_disc_clear(world: &WorldSpec, from: Vec3, to: Vec3) -> bool {
    let dist = euclidean_distance(from, to);
    let samples = (dist / (world.dims.resolution / 2.0)) as usize + 1;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        if !disc_clear(world, from + (to - from) * t) {
            return false;
        }
    }
    true
}

/// Raycasts one column per pixel column over the camera's field of view.
pub fn render_observation(
    world: &WorldSpec,
    pose: Pose,
    camera: &CameraModel,
    step_index: u32,
) -> Result<Observation> {
    let cell = world
        .dims
        .world_to_cell(pose.position)
        .ok_or_else(|| Error::InvalidPose("pose outside grid".into()))?;
    if world.occupancy(cell) != Occupancy::Free {
        return Err(Error::InvalidPose("pose on occupied cell".into()));
    }
    let w = camera.width as usize;
    let mut depths = Vec::with_capacity(w);
    let mut ids = Vec::with_capacity(w);
    for col in 0..w {
        let (dir, cos_off) = column_ray(camera, &pose, col);
        let max_t = camera.max_depth / cos_off;
        let mut hit: Option<(Cell, f64)> = None;
        march_ray(&world.dims, pose.position, dir, max_t, |c, t| {
            if world.occupancy(c) == Occupancy::Occupied {
                hit = Some((c, t));
                false
            } else {
                true
            }
        });
        match hit {
            Some((c, t)) if t * cos_off <= camera.max_depth => {
                depths.push(num::max(t * cos_off, 1e-9));
                ids.push(world.instance_at(c));
            }
            _ => {
                depths.push(camera.max_depth);
                ids.push(None);
            }
        }
    }
    Ok(Observation { depths, instance_ids: ids, camera_pose: pose, step_index })
}

/// Folds an observation into the belief grid: ray cells before the hit become
/// FREE, the hit cell OCCUPIED. Idempotent for repeated observations.
pub fn integrate_observation(belief: &mut BeliefGrid, obs: &Observation, camera: &CameraModel) {
    let pose = obs.camera_pose;
    for (col, &depth) in obs.depths.iter().enumerate() {
        let (dir, cos_off) = column_ray(camera, &pose, col);
        let is_hit = depth < camera.max_depth - 1e-12;
        let t_end = depth / cos_off;
        let mut last: Option<Cell> = None;
        march_ray(
            &belief.dims.clone(),
            pose.position,
            dir,
            t_end + belief.dims.resolution * 2.0,
            |c, t| {
                if t <= t_end + 1e-12 {
                    if t < t_end - 1e-12 {
                        belief.set(c, Belief::Free);
                        true
                    } else {
                        last = Some(c);
                        false
                    }
                } else {
                    false
                }
            },
        );
        if is_hit {
            if let Some(c) = last {
                belief.set(c, Belief::Occupied);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessCheck {
    pub success: bool,
    pub matched_instance: Option<u32>,
}

/// Ground-truth success oracle: the stop position must be within 1.0 m of a
/// surface cell of a matching instance (nearest point of the cell's extent,
/// not its center) with an unoccluded line of sight to it (in-place turning
/// reduces to line-of-sight existence in 2D).
pub fn success_check(world: &WorldSpec, pose: Pose, goal_label: &str) -> SuccessCheck {
    let res = world.dims.resolution;
    for obj in world.objects.iter().filter(|o| o.label == goal_label) {
        for &c in &obj.cells {
            let center = world.dims.cell_center(c);
            let p = pose.position.with_y(0.0);
            let nx = num::clamp(p.x, c.x as f64 * res, (c.x + 1) as f64 * res);
            let nz = num::clamp(p.z, c.z as f64 * res, (c.z + 1) as f64 * res);
            if euclidean_distance(p, Vec3::new(nx, 0.0, nz)) > 1.0 {
                continue;
            }
            if first_occupied_hit_is(world, pose.position, center, obj.id) {
                return SuccessCheck { success: true, matched_instance: Some(obj.id) };
            }
        }
    }
    SuccessCheck { success: false, matched_instance: None }
}

/// Marches from `from` toward `to`; true when the first occupied cell
/// encountered belongs to instance `id` (the object itself is visible).
fn first_occupied_hit_is(world: &WorldSpec, from: Vec3, to: Vec3, id: u32) -> bool {
    let delta = to.with_y(0.0) - from.with_y(0.0);
    let dist = delta.norm();
    if dist < 1e-12 {
        return true;
    }
    let dir = delta * (1.0 / dist);
    let mut result = false;
    march_ray(&world.dims, from, dir, dist + world.dims.resolution, |c, _| {
        if world.occupancy(c) == Occupancy::Occupied {
            result = world.instance_at(c) == Some(id);
            false
        } else {
            true
        }
    });
    result
}
