//! Global target management. Owns the frontier store and the episode state
//! machine: merge newly detected frontiers, prune stale ones, insert
//! approach viewpoints for object hypotheses, pick the best goal, watch for
//! stalls, verify candidates, and commit to a final target. Every tick
//! appends a structured record so full runs can be replayed and audited.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::NavConfig;
use crate::frontier::{estimate_info_gain, is_frontier_cell, FrontierProposal};
use crate::geom::{euclidean_distance, wrap_angle, Pose, Vec3};
use crate::grid::{Belief, BeliefGrid, Cell};
use crate::grounding::{make_viewpoint, Blocklist, ObjectHypothesis};
use crate::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrontierKind {
    /// Boundary of explored space, scored by gain and goal relevance.
    Exploration,
    /// Approach pose for an object hypothesis awaiting verification.
    Viewpoint,
    /// In-place scan heading used when the frontier store runs dry.
    Rotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub id: u64,
    pub kind: FrontierKind,
    pub position: Vec3,
    pub cells: Vec<Cell>,
    /// Information gain estimate in [0, 1]; fixed at 1 for non-exploration
    /// kinds so they are never starved by the utility ranking.
    pub gain: f64,
    pub semantic_prob: f64,
    /// Absolute heading to assume (rotation scans, viewpoint facing).
    pub target_heading: Option<f64>,
    /// Object location backing a viewpoint.
    pub hypothesis: Option<Vec3>,
}

impl Frontier {
    /// Goal-directed utility: relevance-weighted gain over travel distance,
    /// with the distance clamped so nearby frontiers cannot blow up.
    pub fn utility(&self, robot: Vec3, r_near: f64) -> f64 {
        let d = num::max(euclidean_distance(robot, self.position), r_near);
        self.semantic_prob * self.gain / d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Explore,
    GotoTarget,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decision {
    /// Plan a path to this frontier and step along it.
    Navigate { frontier_id: u64, kind: FrontierKind, goal: Vec3 },
    /// Turn in place towards the given absolute heading.
    Rotate { frontier_id: u64, heading: f64 },
    /// In position and facing the hypothesis: run presence verification and
    /// feed the probability back via [`Manager::report_verification`].
    Verify { frontier_id: u64, hypothesis: Vec3 },
    /// Head straight for the committed target.
    NavigateTarget { goal: Vec3 },
    /// Episode over; `success` is false only for frontier exhaustion.
    Stop { success: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Event {
    FrontierAdded { id: u64, kind: FrontierKind, position: Vec3 },
    FrontierMerged { id: u64, position: Vec3 },
    FrontierPruned { id: u64, reason: String },
    FrontierDropped { id: u64, stall_count: u32 },
    FrontierCleared { id: u64 },
    RotationCleared { id: u64 },
    RotationsSpawned { round: u32 },
    EmergencyRoundFailed { round: u32, g_min: f64 },
    EmergencyRecovered,
    SelectionChanged { from: Option<u64>, to: Option<u64> },
    VerificationPassed { id: u64, probability: f64 },
    VerificationFailed { id: u64, probability: f64 },
    TargetSet { position: Vec3 },
    GoalReached,
    Exhausted,
}

/// Per-frontier state as logged each tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSnap {
    pub id: u64,
    pub kind: FrontierKind,
    pub position: Vec3,
    pub gain: f64,
    pub semantic_prob: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub step: u32,
    pub phase: Phase,
    pub robot: Vec3,
    pub heading: f64,
    pub frontiers: Vec<FrontierSnap>,
    pub cleared: Vec<Vec3>,
    pub selected: Option<u64>,
    pub stall_count: u32,
    pub d_prev: Option<f64>,
    pub g_min_current: f64,
    pub emergency_round: u32,
    pub events: Vec<Event>,
    pub decision: Decision,
}

/// Outcome of one progress check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgressOutcome {
    Progressing,
    Stalling,
    /// Close enough; the frontier was consumed and its position cleared.
    Reached,
    Dropped,
    NotTracking,
}

pub struct Manager {
    cfg: NavConfig,
    frontiers: Vec<Frontier>,
    next_id: u64,
    selected: Option<u64>,
    stall_count: u32,
    d_prev: Option<f64>,
    target: Option<Vec3>,
    phase: Phase,
    final_success: bool,
    emergency_round: u32,
    in_emergency: bool,
    g_min_current: f64,
    hypotheses: Vec<ObjectHypothesis>,
    blocklist: Blocklist,
    /// Positions of consumed or dropped frontiers; suppresses re-insertion
    /// within `r_clear` for the rest of the episode.
    cleared: Vec<Vec3>,
    log: Vec<TickRecord>,
}

impl Manager {
    pub fn new(cfg: NavConfig) -> Self {
        let g_min_current = cfg.g_min;
        Manager {
            cfg,
            frontiers: Vec::new(),
            next_id: 0,
            selected: None,
            stall_count: 0,
            d_prev: None,
            target: None,
            phase: Phase::Explore,
            final_success: false,
            emergency_round: 0,
            in_emergency: false,
            g_min_current,
            hypotheses: Vec::new(),
            blocklist: Blocklist::default(),
            cleared: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn target(&self) -> Option<Vec3> {
        self.target
    }

    pub fn frontiers(&self) -> &[Frontier] {
        &self.frontiers
    }

    pub fn selected(&self) -> Option<&Frontier> {
        self.selected.and_then(|id| self.frontiers.iter().find(|f| f.id == id))
    }

    pub fn g_min_current(&self) -> f64 {
        self.g_min_current
    }

    pub fn cleared(&self) -> &[Vec3] {
        &self.cleared
    }

    pub fn log(&self) -> &[TickRecord] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<TickRecord> {
        core::mem::take(&mut self.log)
    }

    /// Feeds freshly grounded object hypotheses; repeated sightings of the
    /// same object collapse into one cluster.
    pub fn observe_detections(&mut self, hyps: &[ObjectHypothesis]) {
        if hyps.is_empty() {
            return;
        }
        let mut all = self.hypotheses.clone();
        all.extend_from_slice(hyps);
        self.hypotheses = crate::grounding::cluster_hypotheses(&all, CLUSTER_EPS);
    }

    /// One decision cycle. `scored` pairs each detected frontier with an
    /// optional relevance probability (None outside scoring steps).
    pub fn tick(
        &mut self,
        belief: &BeliefGrid,
        pose: &Pose,
        scored: &[(FrontierProposal, Option<f64>)],
        step: u32,
    ) -> Decision {
        let mut events = Vec::new();
        let decision = self.decide(belief, pose, scored, step, &mut events);
        self.log.push(TickRecord {
            step,
            phase: self.phase,
            robot: pose.position,
            heading: pose.heading,
            frontiers: self
                .frontiers
                .iter()
                .map(|f| FrontierSnap {
                    id: f.id,
                    kind: f.kind,
                    position: f.position,
                    gain: f.gain,
                    semantic_prob: f.semantic_prob,
                    utility: f.utility(pose.position, self.cfg.r_near),
                })
                .collect(),
            cleared: self.cleared.clone(),
            selected: self.selected,
            stall_count: self.stall_count,
            d_prev: self.d_prev,
            g_min_current: self.g_min_current,
            emergency_round: self.emergency_round,
            events,
            decision,
        });
        decision
    }

    fn decide(
        &mut self,
        belief: &BeliefGrid,
        pose: &Pose,
        scored: &[(FrontierProposal, Option<f64>)],
        step: u32,
        events: &mut Vec<Event>,
    ) -> Decision {
        match self.phase {
            Phase::Done => return Decision::Stop { success: self.final_success },
            Phase::GotoTarget => {
                let target = self.target.expect("target set on phase entry");
                if euclidean_distance(pose.position, target) < self.cfg.r_goal {
                    events.push(Event::GoalReached);
                    self.phase = Phase::Done;
                    self.final_success = true;
                    return Decision::Stop { success: true };
                }
                return Decision::NavigateTarget { goal: target };
            }
            Phase::Explore => {}
        }

        self.blocklist.retain_active(step as u64);
        self.merge_update(scored, step, events);
        self.prune(belief, events);
        self.clear_aligned_rotations(pose, events);
        self.insert_viewpoints(pose, step, events);

        let has_explore = self.has_kind(FrontierKind::Exploration);
        let has_viewpoint = self.has_kind(FrontierKind::Viewpoint);
        let has_rotation = self.has_kind(FrontierKind::Rotation);

        if !has_explore && !has_viewpoint {
            if !has_rotation {
                if self.in_emergency {
                    // a full scan round came up empty
                    self.emergency_round += 1;
                    if self.emergency_round >= self.cfg.n_emergency {
                        events.push(Event::Exhausted);
                        self.phase = Phase::Done;
                        self.final_success = false;
                        return Decision::Stop { success: false };
                    }
                    // admit lower-gain frontiers on the next attempt
                    self.g_min_current /= 2.0;
                    events.push(Event::EmergencyRoundFailed {
                        round: self.emergency_round,
                        g_min: self.g_min_current,
                    });
                }
                self.spawn_rotations(pose, events);
                self.in_emergency = true;
            }
        } else if self.in_emergency {
            self.in_emergency = false;
            self.emergency_round = 0;
            events.push(Event::EmergencyRecovered);
            let removed: Vec<u64> = self
                .frontiers
                .iter()
                .filter(|f| f.kind == FrontierKind::Rotation)
                .map(|f| f.id)
                .collect();
            for id in removed {
                events.push(Event::FrontierPruned { id, reason: "recovered".into() });
            }
            self.frontiers.retain(|f| f.kind != FrontierKind::Rotation);
        }

        let choice = self.select_best(pose);
        if choice != self.selected {
            events.push(Event::SelectionChanged { from: self.selected, to: choice });
            self.selected = choice;
            self.stall_count = 0;
            self.d_prev = None;
        }
        let Some(sel) = self.selected() else {
            // store drained mid-tick (should be unreachable given the
            // emergency path above); treat as exhaustion
            events.push(Event::Exhausted);
            self.phase = Phase::Done;
            self.final_success = false;
            return Decision::Stop { success: false };
        };
        match sel.kind {
            FrontierKind::Rotation => Decision::Rotate {
                frontier_id: sel.id,
                heading: sel.target_heading.expect("rotation carries a heading"),
            },
            FrontierKind::Viewpoint => {
                let d = euclidean_distance(pose.position, sel.position);
                if d < self.cfg.r_near {
                    let heading = sel.target_heading.expect("viewpoint carries a heading");
                    if num::abs(wrap_angle(heading - pose.heading)) <= self.cfg.turn_angle {
                        Decision::Verify {
                            frontier_id: sel.id,
                            hypothesis: sel.hypothesis.expect("viewpoint carries a hypothesis"),
                        }
                    } else {
                        Decision::Rotate { frontier_id: sel.id, heading }
                    }
                } else {
                    Decision::Navigate {
                        frontier_id: sel.id,
                        kind: FrontierKind::Viewpoint,
                        goal: sel.position,
                    }
                }
            }
            FrontierKind::Exploration => Decision::Navigate {
                frontier_id: sel.id,
                kind: FrontierKind::Exploration,
                goal: sel.position,
            },
        }
    }

    fn has_kind(&self, kind: FrontierKind) -> bool {
        self.frontiers.iter().any(|f| f.kind == kind)
    }

    fn merge_update(
        &mut self,
        scored: &[(FrontierProposal, Option<f64>)],
        step: u32,
        events: &mut Vec<Event>,
    ) {
        for (proposal, score) in scored {
            if self.blocklist.is_blocked(proposal.centroid, step as u64) {
                continue;
            }
            // re-detections of consumed or dropped frontiers never re-enter
            if self
                .cleared
                .iter()
                .any(|&p| euclidean_distance(proposal.centroid, p) < self.cfg.r_clear)
            {
                continue;
            }
            let nearest = self
                .frontiers
                .iter_mut()
                .filter(|f| f.kind == FrontierKind::Exploration)
                .map(|f| (euclidean_distance(f.position, proposal.centroid), f))
                .filter(|(d, _)| *d <= self.cfg.tau_merge)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
            match nearest {
                Some((_, f)) => {
                    f.position = proposal.centroid;
                    f.cells = proposal.cells.clone();
                    f.gain = proposal.gain_raw;
                    if let Some(p) = score {
                        f.semantic_prob = *p;
                    }
                    events.push(Event::FrontierMerged { id: f.id, position: f.position });
                }
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.frontiers.push(Frontier {
                        id,
                        kind: FrontierKind::Exploration,
                        position: proposal.centroid,
                        cells: proposal.cells.clone(),
                        gain: proposal.gain_raw,
                        semantic_prob: score.unwrap_or(0.5),
                        target_heading: None,
                        hypothesis: None,
                    });
                    events.push(Event::FrontierAdded {
                        id,
                        kind: FrontierKind::Exploration,
                        position: proposal.centroid,
                    });
                }
            }
        }
    }

    fn prune(&mut self, belief: &BeliefGrid, events: &mut Vec<Event>) {
        let cfg = &self.cfg;
        let g_min = self.g_min_current;
        let cleared = &self.cleared;
        let mut removed: Vec<(u64, String)> = Vec::new();
        for f in &mut self.frontiers {
            if f.kind != FrontierKind::Exploration {
                continue;
            }
            if cleared
                .iter()
                .any(|&p| euclidean_distance(f.position, p) < cfg.r_clear)
            {
                removed.push((f.id, "cleared".into()));
                continue;
            }
            if belief
                .dims
                .world_to_cell(f.position)
                .is_some_and(|c| belief.get(c) == Belief::Occupied)
            {
                removed.push((f.id, "occupied".into()));
                continue;
            }
            if !f.cells.iter().any(|&c| is_frontier_cell(belief, c)) {
                removed.push((f.id, "resolved".into()));
                continue;
            }
            let gain = estimate_info_gain(f.position, belief, cfg.r_gain);
            f.gain = gain;
            if gain < g_min {
                removed.push((f.id, "low_gain".into()));
            }
        }
        for (id, reason) in &removed {
            events.push(Event::FrontierPruned { id: *id, reason: reason.clone() });
            if self.selected == Some(*id) {
                self.selected = None;
            }
        }
        let gone: Vec<u64> = removed.into_iter().map(|(id, _)| id).collect();
        self.frontiers.retain(|f| !gone.contains(&f.id));
    }

    fn clear_aligned_rotations(&mut self, pose: &Pose, events: &mut Vec<Event>) {
        let turn = self.cfg.turn_angle;
        let mut cleared = Vec::new();
        self.frontiers.retain(|f| {
            if f.kind != FrontierKind::Rotation {
                return true;
            }
            let h = f.target_heading.expect("rotation carries a heading");
            if num::abs(wrap_angle(h - pose.heading)) <= turn + 1e-9 {
                cleared.push(f.id);
                false
            } else {
                true
            }
        });
        for id in cleared {
            events.push(Event::RotationCleared { id });
            if self.selected == Some(id) {
                self.selected = None;
            }
        }
    }

    fn insert_viewpoints(&mut self, pose: &Pose, step: u32, events: &mut Vec<Event>) {
        let hyps = self.hypotheses.clone();
        for h in hyps {
            if self.blocklist.is_blocked(h.position, step as u64) {
                continue;
            }
            let exists = self.frontiers.iter().any(|f| {
                f.kind == FrontierKind::Viewpoint
                    && f.hypothesis
                        .is_some_and(|p| euclidean_distance(p, h.position) <= CLUSTER_EPS)
            });
            if exists {
                continue;
            }
            let Ok(vp) = make_viewpoint(h.position, pose.position, self.cfg.r_sep) else {
                continue;
            };
            let id = self.next_id;
            self.next_id += 1;
            self.frontiers.push(Frontier {
                id,
                kind: FrontierKind::Viewpoint,
                position: vp.position,
                cells: Vec::new(),
                gain: 1.0,
                semantic_prob: 1.0,
                target_heading: Some(vp.heading()),
                hypothesis: Some(h.position),
            });
            events.push(Event::FrontierAdded {
                id,
                kind: FrontierKind::Viewpoint,
                position: vp.position,
            });
        }
    }

    fn spawn_rotations(&mut self, pose: &Pose, events: &mut Vec<Event>) {
        for offset in [core::f64::consts::FRAC_PI_2, -core::f64::consts::FRAC_PI_2, core::f64::consts::PI] {
            let id = self.next_id;
            self.next_id += 1;
            self.frontiers.push(Frontier {
                id,
                kind: FrontierKind::Rotation,
                position: pose.position,
                cells: Vec::new(),
                gain: 1.0,
                semantic_prob: 1.0,
                target_heading: Some(wrap_angle(pose.heading + offset)),
                hypothesis: None,
            });
            events.push(Event::FrontierAdded {
                id,
                kind: FrontierKind::Rotation,
                position: pose.position,
            });
        }
        events.push(Event::RotationsSpawned { round: self.emergency_round + 1 });
    }

    /// Selection tiers: pending viewpoints first (nearest), then rotation
    /// scans (smallest heading change), then exploration frontiers by
    /// utility. Ties always break towards the lowest id.
    fn select_best(&self, pose: &Pose) -> Option<u64> {
        let robot = pose.position;
        if let Some(f) = self
            .frontiers
            .iter()
            .filter(|f| f.kind == FrontierKind::Viewpoint)
            .min_by(|a, b| {
                euclidean_distance(robot, a.position)
                    .total_cmp(&euclidean_distance(robot, b.position))
                    .then(a.id.cmp(&b.id))
            })
        {
            return Some(f.id);
        }
        if let Some(f) = self
            .frontiers
            .iter()
            .filter(|f| f.kind == FrontierKind::Rotation)
            .min_by(|a, b| {
                let da = num::abs(wrap_angle(a.target_heading.unwrap() - pose.heading));
                let db = num::abs(wrap_angle(b.target_heading.unwrap() - pose.heading));
                da.total_cmp(&db).then(a.id.cmp(&b.id))
            })
        {
            return Some(f.id);
        }
        self.frontiers
            .iter()
            .filter(|f| f.kind == FrontierKind::Exploration)
            .max_by(|a, b| {
                a.utility(robot, self.cfg.r_near)
                    .total_cmp(&b.utility(robot, self.cfg.r_near))
                    .then(b.id.cmp(&a.id))
            })
            .map(|f| f.id)
    }

    /// Post-step progress accounting for the currently selected navigation
    /// frontier. `d_remaining` is the planner's remaining path length; pass
    /// `None` when no route exists, which counts as a stall.
    pub fn report_progress(&mut self, d_remaining: Option<f64>, step: u32) -> ProgressOutcome {
        if self.phase != Phase::Explore {
            return ProgressOutcome::NotTracking;
        }
        let Some(sel) = self.selected() else {
            return ProgressOutcome::NotTracking;
        };
        if sel.kind == FrontierKind::Rotation {
            return ProgressOutcome::NotTracking;
        }
        let sel_id = sel.id;
        let sel_kind = sel.kind;
        let sel_pos = sel.position;
        let hypothesis = sel.hypothesis;
        let d = d_remaining.unwrap_or(f64::INFINITY);
        // viewpoints are consumed by the verification path instead
        if sel_kind == FrontierKind::Exploration && d < self.cfg.r_near {
            self.cleared.push(sel_pos);
            self.push_event_on_last_record(Event::FrontierCleared { id: sel_id });
            self.frontiers.retain(|f| f.id != sel_id);
            self.selected = None;
            self.stall_count = 0;
            self.d_prev = None;
            return ProgressOutcome::Reached;
        }
        let progressed = match self.d_prev {
            None => {
                self.d_prev = Some(d);
                return ProgressOutcome::Progressing;
            }
            Some(prev) => prev - d >= self.cfg.epsilon_stall,
        };
        if progressed {
            self.d_prev = Some(d);
            self.stall_count = 0;
            return ProgressOutcome::Progressing;
        }
        self.stall_count += 1;
        if self.stall_count < self.cfg.t_stall {
            return ProgressOutcome::Stalling;
        }
        // persistent stall: give up on this frontier and clear the area so
        // the very next detection pass cannot re-add it
        self.cleared.push(sel_pos);
        if sel_kind == FrontierKind::Viewpoint {
            if let Some(h) = hypothesis {
                self.discard_hypothesis(h, step);
            }
        }
        self.push_event_on_last_record(Event::FrontierDropped {
            id: sel_id,
            stall_count: self.stall_count,
        });
        self.frontiers.retain(|f| f.id != sel_id);
        self.selected = None;
        self.stall_count = 0;
        self.d_prev = None;
        ProgressOutcome::Dropped
    }

    /// Feeds back the presence probability for a [`Decision::Verify`].
    pub fn report_verification(&mut self, probability: f64, step: u32) {
        let Some(sel) = self.selected() else {
            return;
        };
        if sel.kind != FrontierKind::Viewpoint {
            return;
        }
        let sel_id = sel.id;
        let sel_pos = sel.position;
        let hypothesis = sel.hypothesis.expect("viewpoint carries a hypothesis");
        if probability > self.cfg.p_presence {
            self.push_event_on_last_record(Event::VerificationPassed {
                id: sel_id,
                probability,
            });
            self.push_event_on_last_record(Event::TargetSet { position: hypothesis });
            self.target = Some(hypothesis);
            self.phase = Phase::GotoTarget;
            self.frontiers.retain(|f| f.id != sel_id);
            self.selected = None;
        } else {
            self.push_event_on_last_record(Event::VerificationFailed {
                id: sel_id,
                probability,
            });
            self.cleared.push(sel_pos);
            self.blocklist.add(hypothesis, step as u64);
            self.discard_hypothesis(hypothesis, step);
            self.frontiers.retain(|f| f.id != sel_id);
            self.selected = None;
        }
        self.stall_count = 0;
        self.d_prev = None;
    }

    fn discard_hypothesis(&mut self, position: Vec3, step: u32) {
        self.blocklist.add(position, step as u64);
        self.hypotheses
            .retain(|h| euclidean_distance(h.position, position) > CLUSTER_EPS);
    }

    fn push_event_on_last_record(&mut self, event: Event) {
        if let Some(rec) = self.log.last_mut() {
            rec.events.push(event);
        }
    }
}

/// Hypotheses (and discard radii) this close together describe one object.
pub const CLUSTER_EPS: f64 = 1.0;
