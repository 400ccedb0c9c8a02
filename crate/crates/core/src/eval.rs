//! Episode execution and benchmark metrics: runs the full perceive / decide
//! / act loop against the simulator and reports success, SPL, coverage, and
//! a failure classification.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::CameraModel;
use crate::config::NavConfig;
use crate::error::{Error, Result};
use crate::frontier::{FrontierDetector, FrontierProposal, GridFrontierDetector};
use crate::geom::{wrap_angle, Pose, Vec3};
use crate::grid::{Belief, BeliefGrid, Cell, Occupancy};
use crate::grounding::{detect, Segmenter};
use crate::manager::{Decision, Manager, Phase, TickRecord};
use crate::num;
use crate::planner;
use crate::scoring::{assign_labels, SemanticScorer};
use crate::sim::{self, Action, AgentState};
use crate::world::WorldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    /// Stopped at a verified target that is not actually the goal object.
    FalsePositive,
    /// Step budget exhausted while still exploring.
    ReachMaxSteps,
    /// Committed to a target it could never path to.
    StuckCannotReach,
    /// Frontier store exhausted without ever committing.
    NoFrontiers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    pub failure: Option<FailureMode>,
    pub steps: u32,
    /// Meters actually traveled.
    pub path_length: f64,
    /// Ground-truth shortest path from start to the success region.
    pub shortest_path: f64,
    pub spl: f64,
    /// Fraction of reachable free space believed free at the end.
    pub coverage: f64,
    pub final_position: Vec3,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub log: Vec<TickRecord>,
}

/// Floor applied to the shortest path so SPL stays defined when the agent
/// spawns inside the success region.
pub const SHORTEST_PATH_FLOOR: f64 = 1e-3;

/// Success-weighted path-length ratio for one episode.
pub fn compute_spl(success: bool, shortest: f64, actual: f64) -> f64 {
    if !success {
        return 0.0;
    }
    let shortest = num::max(shortest, SHORTEST_PATH_FLOOR);
    shortest / num::max(shortest, actual)
}

/// Free cells from which stopping counts as success: within 1 m of a goal
/// instance cell and with the instance itself as the first surface on the
/// sight line.
pub fn success_region(world: &WorldSpec, goal: &str) -> Vec<Cell> {
    let dims = world.dims;
    let mut out = Vec::new();
    for i in 0..dims.len() {
        let c = dims.cell_at(i);
        if world.occupancy(c) != Occupancy::Free {
            continue;
        }
        let pose = Pose::new(dims.cell_center(c), 0.0);
        if sim::success_check(world, pose, goal).success {
            out.push(c);
        }
    }
    out
}

/// Ground-truth shortest distance from `start` to the success region, or
/// infinity when the episode is infeasible.
pub fn shortest_path_to_goal(world: &WorldSpec, start: Cell, goal: &str) -> f64 {
    let region = success_region(world, goal);
    if region.is_empty() {
        return f64::INFINITY;
    }
    let field = planner::geodesic_field(world, &region);
    field[world.dims.index(start)]
}

/// Fraction of the free cells reachable from `start` that the belief has
/// resolved (free or occupied both count as explored for free cells the
/// sensor can only see as free; in practice resolved means not unknown).
pub fn coverage(belief: &BeliefGrid, world: &WorldSpec, start: Cell) -> f64 {
    let reachable = world.reachable_free(start);
    let total = reachable.iter().filter(|&&r| r).count();
    if total == 0 {
        return 0.0;
    }
    let known = reachable
        .iter()
        .enumerate()
        .filter(|&(i, &r)| r && belief.get(belief.dims.cell_at(i)) != Belief::Unknown)
        .count();
    known as f64 / total as f64
}

fn turn_towards(heading: f64, desired: f64) -> Action {
    if wrap_angle(desired - heading) >= 0.0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

fn plan_to(belief: &BeliefGrid, pose: &Pose, goal: Vec3) -> Option<planner::Path> {
    let start = belief.dims.world_to_cell(pose.position)?;
    let goal_cell = belief.dims.world_to_cell(goal)?;
    planner::plan(belief, start, goal_cell)
}

/// Runs one episode to termination. Fails fast with `InvalidInput` when the
/// goal is unreachable from the start (infeasible episodes are excluded
/// from benchmarks rather than scored).
pub fn run_episode(
    world: &WorldSpec,
    start: Pose,
    goal: &str,
    cfg: &NavConfig,
    camera: &CameraModel,
    scorer: &mut dyn SemanticScorer,
    segmenter: &mut dyn Segmenter,
    keep_log: bool,
) -> Result<EpisodeResult> {
    cfg.validate()?;
    let start_cell = world
        .dims
        .world_to_cell(start.position)
        .ok_or_else(|| Error::InvalidPose("start outside grid".into()))?;
    let shortest = shortest_path_to_goal(world, start_cell, goal);
    if !shortest.is_finite() {
        return Err(Error::InvalidInput(alloc::format!(
            "goal '{goal}' unreachable from start"
        )));
    }

    let mut belief = BeliefGrid::new(world.dims);
    let mut manager = Manager::new(cfg.clone());
    let mut detector = GridFrontierDetector;
    let mut agent = AgentState::at(start);
    let mut failure: Option<FailureMode> = None;
    let mut success = false;
    let mut target_path_missing = false;

    'episode: while agent.step_count < cfg.max_steps && !agent.stopped {
        let step = agent.step_count;
        let obs = sim::render_observation(world, agent.pose, camera, step)?;
        sim::integrate_observation(&mut belief, &obs, camera);

        // object grounding runs every frame; frontier detection and scoring
        // only on prediction-interval steps (the store persists in between)
        let masks = segmenter.segment(&obs, goal);
        let hyps = detect(&obs, camera, &masks);
        manager.observe_detections(&hyps);

        let scoring_step = step % cfg.prediction_interval == 0;
        let scored = if scoring_step {
            let proposals =
                detector.detect(&belief, &obs, camera, cfg.r_gain, cfg.min_cluster_cells);
            score_proposals(&proposals, &obs, scorer, goal)
        } else {
            Vec::new()
        };

        // decisions that do not consume a sim step (verification) resolve
        // inside this loop; everything else breaks out with an action
        let action = loop {
            let decision = manager.tick(&belief, &agent.pose, &scored, step);
            match decision {
                Decision::Stop { success: committed } => {
                    if committed {
                        success = sim::success_check(world, agent.pose, goal).success;
                        if !success {
                            failure = Some(FailureMode::FalsePositive);
                        }
                    } else {
                        failure = Some(FailureMode::NoFrontiers);
                    }
                    break 'episode;
                }
                Decision::Verify { .. } => {
                    let p = scorer.verify_presence(&obs, goal);
                    manager.report_verification(p, step);
                }
                Decision::Rotate { heading, .. } => {
                    break turn_towards(agent.pose.heading, heading);
                }
                Decision::Navigate { goal: g, .. } | Decision::NavigateTarget { goal: g } => {
                    let planned = plan_to(&belief, &agent.pose, g);
                    if manager.phase() == Phase::GotoTarget {
                        target_path_missing = planned.is_none();
                    }
                    break match planned.as_ref().and_then(|p| {
                        planner::next_action(&agent.pose, p, &belief, cfg)
                    }) {
                        Some(a) => a,
                        // boxed in (or already at the goal cell): turn to
                        // look for a way out
                        None => Action::TurnLeft,
                    };
                }
            }
        };

        agent = sim::step(world, agent, action, cfg.step_size, cfg.turn_angle, cfg.max_steps)?;

        // post-step progress report against the still-selected frontier
        if let Some(sel) = manager.selected() {
            let d = plan_to(&belief, &agent.pose, sel.position)
                .map(|p| planner::remaining_distance(&agent.pose, &p, &belief.dims));
            manager.report_progress(d, agent.step_count);
        }
    }

    if !success && failure.is_none() {
        failure = Some(if manager.phase() == Phase::GotoTarget && target_path_missing {
            FailureMode::StuckCannotReach
        } else {
            FailureMode::ReachMaxSteps
        });
    }

    let spl = compute_spl(success, shortest, agent.path_length_so_far);
    Ok(EpisodeResult {
        success,
        failure: if success { None } else { failure },
        steps: agent.step_count,
        path_length: agent.path_length_so_far,
        shortest_path: shortest,
        spl,
        coverage: coverage(&belief, world, start_cell),
        final_position: agent.pose.position,
        log: if keep_log { manager.take_log() } else { Vec::new() },
    })
}

fn score_proposals(
    proposals: &[FrontierProposal],
    obs: &crate::sim::Observation,
    scorer: &mut dyn SemanticScorer,
    goal: &str,
) -> Vec<(FrontierProposal, Option<f64>)> {
    let mut scored: Vec<(FrontierProposal, Option<f64>)> =
        proposals.iter().cloned().map(|p| (p, None)).collect();
    let marks = assign_labels(proposals);
    let probs = scorer.score_frontiers(obs, proposals, &marks, goal);
    for mark in &marks.marks {
        if let Some(p) = probs.get(&mark.label) {
            scored[mark.frontier_idx].1 = Some(*p);
        }
    }
    scored
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub successes: usize,
    pub sr: f64,
    pub spl: f64,
    pub mean_steps: f64,
    pub failures: Vec<(FailureMode, usize)>,
}

pub fn aggregate(results: &[EpisodeResult]) -> Summary {
    let n = results.len();
    if n == 0 {
        return Summary {
            episodes: 0,
            successes: 0,
            sr: 0.0,
            spl: 0.0,
            mean_steps: 0.0,
            failures: Vec::new(),
        };
    }
    let successes = results.iter().filter(|r| r.success).count();
    let spl_sum: f64 = results.iter().map(|r| r.spl).sum();
    let steps_sum: u64 = results.iter().map(|r| r.steps as u64).sum();
    let mut failures: Vec<(FailureMode, usize)> = Vec::new();
    for mode in [
        FailureMode::FalsePositive,
        FailureMode::ReachMaxSteps,
        FailureMode::StuckCannotReach,
        FailureMode::NoFrontiers,
    ] {
        let count = results.iter().filter(|r| r.failure == Some(mode)).count();
        if count > 0 {
            failures.push((mode, count));
        }
    }
    Summary {
        episodes: n,
        successes,
        sr: successes as f64 / n as f64,
        spl: spl_sum / n as f64,
        mean_steps: steps_sum as f64 / n as f64,
        failures,
    }
}

/// Spawn pose helper: deterministic choice among valid spawn cells.
pub fn spawn_pose(world: &WorldSpec, pick: u64) -> Option<Pose> {
    if world.spawn_cells.is_empty() {
        return None;
    }
    let c = world.spawn_cells[(pick as usize) % world.spawn_cells.len()];
    Some(Pose::new(world.dims.cell_center(c), 0.0))
}

/// Pure-exploration driver used for coverage benchmarks: same loop as
/// [`run_episode`] but with no goal; terminates on frontier exhaustion or
/// the step budget.
pub fn run_exploration(
    world: &WorldSpec,
    start: Pose,
    cfg: &NavConfig,
    camera: &CameraModel,
) -> Result<(f64, u32)> {
    cfg.validate()?;
    let start_cell = world
        .dims
        .world_to_cell(start.position)
        .ok_or_else(|| Error::InvalidPose("start outside grid".into()))?;
    let mut belief = BeliefGrid::new(world.dims);
    let mut manager = Manager::new(cfg.clone());
    let mut detector = GridFrontierDetector;
    let mut agent = AgentState::at(start);

    while agent.step_count < cfg.max_steps && !agent.stopped {
        let step = agent.step_count;
        let obs = sim::render_observation(world, agent.pose, camera, step)?;
        sim::integrate_observation(&mut belief, &obs, camera);
        let proposals =
            detector.detect(&belief, &obs, camera, cfg.r_gain, cfg.min_cluster_cells);
        let scored: Vec<(FrontierProposal, Option<f64>)> =
            proposals.into_iter().map(|p| (p, None)).collect();
        let action = match manager.tick(&belief, &agent.pose, &scored, step) {
            Decision::Stop { .. } => break,
            Decision::Rotate { heading, .. } => turn_towards(agent.pose.heading, heading),
            Decision::Verify { .. } => unreachable!("no detections are fed in"),
            Decision::Navigate { goal: g, .. } | Decision::NavigateTarget { goal: g } => {
                match plan_to(&belief, &agent.pose, g)
                    .as_ref()
                    .and_then(|p| planner::next_action(&agent.pose, p, &belief, cfg))
                {
                    Some(a) => a,
                    None => Action::TurnLeft,
                }
            }
        };
        agent = sim::step(world, agent, action, cfg.step_size, cfg.turn_angle, cfg.max_steps)?;
        if let Some(sel) = manager.selected() {
            let d = plan_to(&belief, &agent.pose, sel.position)
                .map(|p| planner::remaining_distance(&agent.pose, &p, &belief.dims));
            manager.report_progress(d, agent.step_count);
        }
    }
    Ok((coverage(&belief, world, start_cell), agent.step_count))
}

/// Episode specification as stored in suite manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub world_seed: u64,
    pub spawn_pick: u64,
    pub goal: String,
}
