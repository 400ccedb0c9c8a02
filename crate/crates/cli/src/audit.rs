//! Invariant checks over recorded tick logs. Used by the replay subcommand
//! and the test suite to validate whole runs after the fact.

use frontis_core::geom::euclidean_distance;
use frontis_core::manager::{Decision, Event, FrontierKind, Phase, TickRecord};
use frontis_core::NavConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub ticks: usize,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks structural invariants that must hold for every recorded run:
/// step ordering, phase monotonicity, bounded counters, utility accounting,
/// selection validity, and the prune contract (no exploration frontier
/// survives within the clearing radius of a cleared point).
pub fn audit_log(records: &[TickRecord], cfg: &NavConfig) -> AuditReport {
    let mut violations = Vec::new();
    let mut v = |tick: usize, msg: String| violations.push(format!("tick {tick}: {msg}"));

    let mut prev_step = None;
    let mut prev_phase = Phase::Explore;
    let mut target: Option<frontis_core::Vec3> = None;
    let mut verified = false;
    for (i, rec) in records.iter().enumerate() {
        if let Some(prev) = prev_step {
            if rec.step < prev {
                v(i, format!("step went backwards ({prev} -> {})", rec.step));
            }
        }
        prev_step = Some(rec.step);

        let rank = |p: Phase| match p {
            Phase::Explore => 0,
            Phase::GotoTarget => 1,
            Phase::Done => 2,
        };
        if rank(rec.phase) < rank(prev_phase) {
            v(i, format!("phase regressed ({prev_phase:?} -> {:?})", rec.phase));
        }
        prev_phase = rec.phase;

        if rec.stall_count > cfg.t_stall {
            v(i, format!("stall count {} exceeds limit", rec.stall_count));
        }
        if rec.emergency_round >= cfg.n_emergency && rec.phase != Phase::Done {
            v(i, format!("emergency round {} without termination", rec.emergency_round));
        }
        if !(rec.g_min_current > 0.0 && rec.g_min_current <= cfg.g_min) {
            v(i, format!("gain threshold {} out of range", rec.g_min_current));
        }
        // the threshold only ever halves
        let ratio = cfg.g_min / rec.g_min_current;
        if (ratio.log2() - ratio.log2().round()).abs() > 1e-9 {
            v(i, format!("gain threshold {} is not a halving of {}", rec.g_min_current, cfg.g_min));
        }

        for ev in &rec.events {
            match ev {
                // drops only happen after a full run of sub-epsilon ticks
                Event::FrontierDropped { id, stall_count } => {
                    if *stall_count < cfg.t_stall {
                        v(i, format!("frontier {id} dropped after only {stall_count} stalls"));
                    }
                }
                Event::VerificationPassed { .. } => verified = true,
                Event::TargetSet { position } => target = Some(*position),
                _ => {}
            }
        }
        if let Decision::Stop { success: true } = rec.decision {
            match target {
                Some(t) if verified => {
                    let d = euclidean_distance(rec.robot, t);
                    if d >= cfg.r_goal {
                        v(i, format!("stopped {d:.3} m from the committed target"));
                    }
                }
                _ => v(i, "success stop without a verified target".into()),
            }
        }

        if let Some(sel) = rec.selected {
            if !rec.frontiers.iter().any(|f| f.id == sel) {
                v(i, format!("selected frontier {sel} not in store"));
            }
        }

        for f in &rec.frontiers {
            if !(0.0..=1.0).contains(&f.gain) {
                v(i, format!("frontier {} gain {} out of range", f.id, f.gain));
            }
            if !(0.0..=1.0).contains(&f.semantic_prob) {
                v(i, format!("frontier {} probability {} out of range", f.id, f.semantic_prob));
            }
            let d = euclidean_distance(rec.robot, f.position).max(cfg.r_near);
            let expect = f.semantic_prob * f.gain / d;
            if (f.utility - expect).abs() > 1e-9 {
                v(i, format!("frontier {} utility {} != {}", f.id, f.utility, expect));
            }
            if f.kind == FrontierKind::Exploration
                && rec
                    .cleared
                    .iter()
                    .any(|&p| euclidean_distance(p, f.position) < cfg.r_clear)
            {
                v(i, format!("exploration frontier {} inside a cleared region", f.id));
            }
        }
    }
    AuditReport { ticks: records.len(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use frontis_core::eval::{run_episode, spawn_pose};
    use frontis_core::grounding::GroundTruthSegmenter;
    use frontis_core::scoring::OracleScorer;
    use frontis_core::world::{generate_world, WorldGenParams};
    use frontis_core::{CameraModel, Vec3};

    #[test]
    fn real_episode_log_is_clean() {
        let params = WorldGenParams { width: 48, height: 48, n_rooms: 3, n_objects: 2, ..Default::default() };
        let world = generate_world(17, &params).unwrap();
        let goal = world.objects[0].label.clone();
        let cfg = NavConfig::default();
        let camera = CameraModel::default();
        let mut scorer = OracleScorer::new(&world, &goal).unwrap();
        let mut seg = GroundTruthSegmenter::new(&world);
        let res = run_episode(
            &world,
            spawn_pose(&world, 0).unwrap(),
            &goal,
            &cfg,
            &camera,
            &mut scorer,
            &mut seg,
            true,
        )
        .unwrap();
        let report = audit_log(&res.log, &cfg);
        assert!(report.is_clean(), "violations: {:?}", report.violations);
        assert!(report.ticks > 0);
    }

    #[test]
    fn corrupted_log_is_flagged() {
        let cfg = NavConfig::default();
        let mut rec = TickRecord {
            step: 0,
            phase: Phase::Explore,
            robot: Vec3::ZERO,
            heading: 0.0,
            frontiers: vec![],
            cleared: vec![],
            selected: Some(7), // not in the (empty) store
            stall_count: cfg.t_stall + 1,
            d_prev: None,
            g_min_current: 0.3, // not a halving of 0.5
            emergency_round: 0,
            events: vec![],
            decision: frontis_core::manager::Decision::Stop { success: false },
        };
        let report = audit_log(std::slice::from_ref(&rec), &cfg);
        assert_eq!(report.violations.len(), 3);

        rec.selected = None;
        rec.stall_count = 0;
        rec.g_min_current = 0.25;
        let report = audit_log(std::slice::from_ref(&rec), &cfg);
        assert!(report.is_clean());
    }
}
