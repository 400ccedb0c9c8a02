use frontis_core::eval::spawn_pose;
use frontis_core::frontier::{extract_frontiers, FrontierProposal, FrontierDetector, GridFrontierDetector};
use frontis_core::grid::{Belief, BeliefGrid, Cell};
use frontis_core::sim::{self, Action, AgentState};
use frontis_core::world::{generate_world, WorldGenParams};
use frontis_core::{CameraModel, NavConfig, Occupancy};

#[test]
fn diag2() {
    let params = WorldGenParams { width: 64, height: 64, n_rooms: 4, n_objects: 0, ..Default::default() };
    let seed = 2u64;
    let world = generate_world(seed, &params).unwrap();
    let cfg = NavConfig::default();
    let camera = CameraModel::default();
    let start = spawn_pose(&world, 0).unwrap();
    let mut belief = BeliefGrid::new(world.dims);
    let mut manager = frontis_core::Manager::new(cfg.clone());
    let mut det = GridFrontierDetector;
    let mut agent = AgentState::at(start);
    while agent.step_count < cfg.max_steps && !agent.stopped {
        let step = agent.step_count;
        let obs = sim::render_observation(&world, agent.pose, &camera, step).unwrap();
        sim::integrate_observation(&mut belief, &obs, &camera);
        let proposals = det.detect(&belief, &obs, &camera, cfg.r_gain, cfg.min_cluster_cells);
        let scored: Vec<(FrontierProposal, Option<f64>)> = proposals.into_iter().map(|p| (p, None)).collect();
        let d = manager.tick(&belief, &agent.pose, &scored, step);
        let action = match d {
            frontis_core::Decision::Stop { .. } => break,
            frontis_core::Decision::Rotate { heading, .. } => {
                if frontis_core::geom::wrap_angle(heading - agent.pose.heading) >= 0.0 { Action::TurnLeft } else { Action::TurnRight }
            }
            frontis_core::Decision::Verify { .. } => unreachable!(),
            frontis_core::Decision::Navigate { goal: g, .. } | frontis_core::Decision::NavigateTarget { goal: g } => {
                let s = belief.dims.world_to_cell(agent.pose.position).unwrap();
                let gc = belief.dims.world_to_cell(g).unwrap();
                match frontis_core::planner::plan(&belief, s, gc).as_ref().and_then(|p| frontis_core::planner::next_action(&agent.pose, p, &belief, &cfg)) {
                    Some(a) => a, None => Action::TurnLeft,
                }
            }
        };
        agent = sim::step(&world, agent, action, cfg.step_size, cfg.turn_angle, cfg.max_steps).unwrap();
        if let Some(sel) = manager.selected() {
            let dd = belief.dims.world_to_cell(agent.pose.position)
                .zip(belief.dims.world_to_cell(sel.position))
                .and_then(|(s, gg)| frontis_core::planner::plan(&belief, s, gg))
                .map(|p| frontis_core::planner::remaining_distance(&agent.pose, &p, &belief.dims));
            manager.report_progress(dd, agent.step_count);
        }
    }
    let dims = world.dims;
    let rc = dims.world_to_cell(agent.pose.position).unwrap();
    let cl: Vec<Cell> = manager.cleared().iter().filter_map(|&p| dims.world_to_cell(p)).collect();
    let rem: Vec<Cell> = extract_frontiers(&belief, 1).into_iter().flat_map(|p| p.cells).collect();
    for z in 0..dims.height {
        let mut row = String::new();
        for x in 0..dims.width {
            let c = Cell::new(x, z);
            let ch = if c == rc { '@' }
            else if cl.contains(&c) { 'X' }
            else if rem.contains(&c) { 'f' }
            else {
                match (world.occupancy(c), belief.get(c)) {
                    (Occupancy::Occupied, Belief::Unknown) => '%',
                    (Occupancy::Occupied, _) => '#',
                    (Occupancy::Free, Belief::Unknown) => '?',
                    (Occupancy::Free, Belief::Free) => '.',
                    (Occupancy::Free, Belief::Occupied) => '!',
                }
            };
            row.push(ch);
        }
        println!("{row}");
    }
    println!("cleared: {:?}", manager.cleared());
    println!("robot: {:?} heading {}", agent.pose.position, agent.pose.heading);
}
