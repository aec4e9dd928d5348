//! Scores one planning cycle at a fixed pose and prints the leading
//! candidates — a debugging aid for world and weight tuning.
//!
//! Usage: scene_debug <world-file> <x> <y> <w_p> <w_r> <w_v> [goal_x goal_y]

use ricochet_core::costs::{score_batch, CostParams, CostWeights, PlannerContext};
use ricochet_core::localmap::{build_local_map, goal_in_free_space};
use ricochet_core::sampling::{prune_by_position, prune_by_velocity, sample_candidates, SamplingParams};
use ricochet_core::simulator::{sense, PlannerConfig, RobotState, World};
use ricochet_core::{Vec2, World as _World};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let world = World::load(&args[1]).expect("world loads");
    let pos = Vec2::new(args[2].parse().unwrap(), args[3].parse().unwrap());
    let weights = CostWeights {
        w_p: args[4].parse().unwrap(),
        w_r: args[5].parse().unwrap(),
        w_v: args[6].parse().unwrap(),
    };
    let goal = if args.len() > 8 {
        Vec2::new(args[7].parse().unwrap(), args[8].parse().unwrap())
    } else {
        world.goal()
    };
    let cfg = PlannerConfig::default();
    let plan_world = world.with_margin(cfg.planning_margin).unwrap();
    let state = RobotState::new(pos.x, pos.y, 0.0, 0.0);
    let occ = sense(&plan_world, &state, cfg.window_size, None);
    let map = build_local_map(pos, cfg.window_size, &occ).unwrap();
    println!(
        "frontiers: {}  observed chains: {}  predicted boundaries: {}  goal visible: {}",
        map.frontiers().len(),
        map.observed_boundaries().len(),
        map.predicted_boundaries().len(),
        goal_in_free_space(&map, goal),
    );
    for (i, f) in map.frontiers().iter().enumerate() {
        println!("  frontier {i}: len {:.3}", f.length());
    }
    let ctx = PlannerContext::initial(pos, goal);
    let params = CostParams::default();
    let all = sample_candidates(&map, &SamplingParams::default());
    let pruned = prune_by_velocity(prune_by_position(all.clone(), &map, goal), &map);
    println!("candidates: {} full, {} pruned", all.len(), pruned.len());
    let breakdowns = score_batch(&pruned, &ctx, &map, map.predicted_boundaries(), &weights, &params);
    let mut order: Vec<usize> = (0..pruned.len()).collect();
    order.sort_by(|&a, &b| breakdowns[a].total.total_cmp(&breakdowns[b].total));
    for &i in order.iter().take(12) {
        let c = &pruned[i];
        let b = &breakdowns[i];
        println!(
            "  pos=({:6.3},{:6.3}) f{} dir={:5.2} mag={:4.2} | total={:8.3} pos={:6.3} risk_h={:5.3} risk_g={:6.3} vel={:6.3} r_ref={:6.3}",
            c.pos.x, c.pos.y, c.frontier_id, c.vel_dir, c.vel_mag, b.total, b.j_pos, b.j_risk_h, b.j_risk_g, b.j_vel, b.r_ref
        );
    }
}
