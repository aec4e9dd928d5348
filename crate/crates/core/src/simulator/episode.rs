//! Closed-loop episode execution: replan at the map cadence, command at
//! 20 Hz, integrate at 100 Hz, and record the outcome for the harness.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::controller::{predict_collision, ManeuverState, Pid, PidGains};
use crate::costs::{
    potential_collision_point, score_batch, select_intermediate_state, CostError, CostParams,
    CostWeights, PlannerContext,
};
use crate::geometry::Vec2;
use crate::localmap::{build_local_map, goal_in_free_space, MapError};
use crate::sampling::{
    prune_by_position, prune_by_velocity, sample_candidates, CandidateState, SamplingParams,
};
use crate::simulator::{goal_sensor, sense, step, CollisionEvent, NoiseParams, RobotState, World};
use crate::trajectory::{TimedTrajectory, DEFAULT_SAMPLES};

/// Physics integration step.
pub const SIM_DT: f64 = 0.01;
/// Command update period (20 Hz).
pub const CONTROL_DT: f64 = 0.05;
pub const DEFAULT_TIMEOUT: f64 = 60.0;
/// Contacts closer than this in time belong to one physical interaction
/// (scraping along a wall raises one event per step).
pub const DEBOUNCE_WINDOW: f64 = 0.25;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("robot at ({x:.3}, {y:.3}) is in collision")]
    InCollision { x: f64, y: f64 },
    #[error("local map construction failed: {0}")]
    Map(#[from] MapError),
    #[error("candidate selection failed: {0}")]
    Selection(#[from] CostError),
    #[error("planning geometry failed: {0}")]
    World(#[from] crate::simulator::WorldError),
    #[error("invalid episode parameter: {0}")]
    BadParam(&'static str),
}

/// Everything the closed loop needs besides the world itself.
#[derive(Debug, Clone, Serialize)]
pub struct PlannerConfig {
    pub weights: CostWeights,
    pub cost_params: CostParams,
    pub sampling: SamplingParams,
    /// Side length of the square sensing window (meters).
    pub window_size: f64,
    /// Extra standoff added to the radius inflation for planning only —
    /// headroom for tracking error and actuation noise. Collision checking
    /// stays at the true radius.
    pub planning_margin: f64,
    /// Speed margin of the trajectory pacing, ≥ 1.
    pub p_safe: f64,
    /// Goal acceptance radius (meters).
    pub eps_goal: f64,
    pub pid: PidGains,
    pub noise: NoiseParams,
    pub n_spline_samples: usize,
    /// Score each cycle's full candidate set alongside the pruned one and
    /// record both timings (for the pruning study; off in normal runs).
    pub measure_pruning: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            weights: CostWeights::default(),
            cost_params: CostParams::default(),
            sampling: SamplingParams::default(),
            window_size: 2.0,
            planning_margin: 0.02,
            p_safe: 1.2,
            eps_goal: 0.1,
            pid: PidGains::default(),
            noise: NoiseParams::default(),
            n_spline_samples: DEFAULT_SAMPLES,
            measure_pruning: false,
        }
    }
}

/// Wall-clock cost of one planning cycle's candidate evaluation, with and
/// without pruning, on identical inputs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlanTiming {
    pub full_us: f64,
    pub pruned_us: f64,
    pub full_count: usize,
    pub pruned_count: usize,
}

/// Deterministic episode result: identical seed and configuration
/// reproduce this bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeOutcome {
    pub success: bool,
    /// Time to goal, or the timeout on failure.
    pub arrival_time: f64,
    /// Sum of per-step displacements (meters).
    pub path_length: f64,
    /// Debounced collision interactions.
    pub n_collisions: usize,
    /// Debounced interactions whose active plan aimed for an impact.
    pub n_intentional: usize,
    /// Raw contact events (pre-debouncing).
    pub events: Vec<CollisionEvent>,
    /// Robot position per integration step, `(t, pos)`.
    pub trajectory: Vec<(f64, Vec2)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Episode {
    pub outcome: EpisodeOutcome,
    /// Present only when [`PlannerConfig::measure_pruning`] is on; excluded
    /// from determinism comparisons (wall-clock).
    pub timings: Vec<PlanTiming>,
}

struct ActivePlan {
    maneuver: ManeuverState,
    t0: f64,
    intentional: bool,
}

/// Synthetic candidate used when the goal is directly visible or the
/// sampler finds no frontier to aim for: head for the goal estimate and
/// arrive at rest.
fn goal_candidate(from: Vec2, goal: Vec2) -> CandidateState {
    let dir = (goal - from).normalize_or_zero();
    CandidateState::new(goal, dir.angle(), 0.0, usize::MAX)
}

fn plan_cycle(
    world: &World,
    cfg: &PlannerConfig,
    state: &RobotState,
    ctx: &PlannerContext,
    t_map: f64,
    timings: &mut Vec<PlanTiming>,
) -> Result<(ManeuverState, bool), SimError> {
    let occ = sense(world, state, cfg.window_size, None);
    let map = build_local_map(state.pos(), cfg.window_size, &occ)?;
    let preds = map.predicted_boundaries();

    let selected = if goal_in_free_space(&map, ctx.p_goal) {
        goal_candidate(state.pos(), ctx.p_goal)
    } else {
        let all = sample_candidates(&map, &cfg.sampling);
        let full_batch = cfg.measure_pruning.then(|| all.clone());
        let pruned = prune_by_velocity(prune_by_position(all, &map, ctx.p_goal), &map);
        if let Some(full) = full_batch {
            if !full.is_empty() && !pruned.is_empty() {
                let t0 = Instant::now();
                let _ = score_batch(&full, ctx, &map, preds, &cfg.weights, &cfg.cost_params);
                let full_us = t0.elapsed().as_secs_f64() * 1e6;
                let t1 = Instant::now();
                let _ = score_batch(&pruned, ctx, &map, preds, &cfg.weights, &cfg.cost_params);
                let pruned_us = t1.elapsed().as_secs_f64() * 1e6;
                timings.push(PlanTiming {
                    full_us,
                    pruned_us,
                    full_count: full.len(),
                    pruned_count: pruned.len(),
                });
            }
        }
        if pruned.is_empty() {
            // Nothing to sample (fully enclosed view): head for the goal and
            // let maneuver switching negotiate the boundary.
            goal_candidate(state.pos(), ctx.p_goal)
        } else {
            select_intermediate_state(&pruned, ctx, &map, preds, &cfg.weights, &cfg.cost_params)?.0
        }
    };

    let intentional =
        selected.vel_mag > 0.0 && potential_collision_point(&selected, preds).is_some();
    let q_spl = TimedTrajectory::plan(
        state,
        &selected,
        cfg.sampling.v_max,
        cfg.p_safe,
        t_map,
        cfg.n_spline_samples,
    );
    let prediction = predict_collision(&q_spl, &map);
    let delta = world.robot_radius() / 2.0;
    Ok((ManeuverState::plan(q_spl, prediction, delta), intentional))
}

/// Collapses raw contact events into debounced interactions and counts how
/// many began under a deliberately colliding plan.
fn debounce(events: &[CollisionEvent]) -> (usize, usize) {
    let mut n = 0;
    let mut n_intentional = 0;
    let mut last_t = f64::NEG_INFINITY;
    for e in events {
        if e.t - last_t > DEBOUNCE_WINDOW {
            n += 1;
            if e.intentional {
                n_intentional += 1;
            }
        }
        last_t = e.t;
    }
    (n, n_intentional)
}

/// Runs one closed-loop episode: every `t_map` seconds the robot senses,
/// rebuilds its local map, and replans; every 50 ms the tracker updates the
/// velocity command; every 10 ms the world integrates. Terminates on goal
/// contact (`‖p − goal‖ ≤ ε_goal`) or timeout.
pub fn run_episode(
    world: &World,
    cfg: &PlannerConfig,
    t_map: f64,
    timeout: f64,
    seed: u64,
) -> Result<Episode, SimError> {
    if !(t_map > 0.0) {
        return Err(SimError::BadParam("t_map must be positive"));
    }
    if !(timeout > 0.0) {
        return Err(SimError::BadParam("timeout must be positive"));
    }
    if cfg.weights.validate().is_err() {
        return Err(SimError::BadParam("cost weights must be non-negative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = world.start();
    let goal = world.goal();
    if !world.is_clear(start) {
        return Err(SimError::InCollision {
            x: start.x,
            y: start.y,
        });
    }
    if !(cfg.planning_margin >= 0.0) {
        return Err(SimError::BadParam("planning margin must be ≥ 0"));
    }
    let plan_world = world.with_margin(cfg.planning_margin)?;

    let mut state = RobotState::new(start.x, start.y, (goal - start).angle(), 0.0);
    let mut ctx = PlannerContext::initial(start, goal);
    let mut pid = Pid::new(cfg.pid);
    let mut plan: Option<ActivePlan> = None;
    let mut prev_plan_pos = start;
    let mut cmd = Vec2::ZERO;

    let mut trajectory = vec![(0.0, start)];
    let mut events: Vec<CollisionEvent> = Vec::new();
    let mut timings: Vec<PlanTiming> = Vec::new();
    let mut path_length = 0.0;
    let mut success = false;
    let mut arrival_time = timeout;

    // Integer scheduling keeps all cadences exact and drift-free.
    let k_plan = ((t_map / SIM_DT).round() as usize).max(1);
    let k_ctrl = (CONTROL_DT / SIM_DT).round() as usize;
    let n_steps = (timeout / SIM_DT).round() as usize;

    if (start - goal).norm() <= cfg.eps_goal {
        success = true;
        arrival_time = 0.0;
    } else {
        for i in 0..n_steps {
            let t = i as f64 * SIM_DT;
            if i % k_plan == 0 {
                let (bearing, range) = goal_sensor(world, &state, &cfg.noise, &mut rng);
                ctx.p_pre = prev_plan_pos;
                ctx.p_cur = state.pos();
                ctx.p_goal = state.pos() + Vec2::from_angle(bearing) * range;
                ctx.traveled_length = path_length;
                prev_plan_pos = state.pos();
                let (maneuver, intentional) =
                    plan_cycle(&plan_world, cfg, &state, &ctx, t_map, &mut timings)?;
                plan = Some(ActivePlan {
                    maneuver,
                    t0: t,
                    intentional,
                });
            }
            if i % k_ctrl == 0 {
                let p = plan.as_mut().expect("planning precedes control");
                p.maneuver.observe(state.pos());
                cmd = pid.track(
                    p.maneuver.reference(),
                    t - p.t0,
                    state.pos(),
                    cfg.sampling.v_max,
                    CONTROL_DT,
                );
            }
            let (next, ev) = step(
                world,
                &state,
                cmd,
                SIM_DT,
                &cfg.noise,
                &cfg.cost_params,
                &mut rng,
                t,
            )?;
            if let Some(mut e) = ev {
                e.intentional = plan.as_ref().map_or(false, |p| p.intentional);
                // The rebound is ballistic until the next control update.
                cmd = e.v_after;
                events.push(e);
            }
            path_length += (next.pos() - state.pos()).norm();
            state = next;
            let t_next = (i + 1) as f64 * SIM_DT;
            trajectory.push((t_next, state.pos()));
            if (state.pos() - goal).norm() <= cfg.eps_goal {
                success = true;
                arrival_time = t_next;
                break;
            }
        }
    }

    let (n_collisions, n_intentional) = debounce(&events);
    Ok(Episode {
        outcome: EpisodeOutcome {
            success,
            arrival_time,
            path_length,
            n_collisions,
            n_intentional,
            events,
            trajectory,
        },
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    fn open_world(length: f64) -> World {
        World::new(
            "open".into(),
            Polygon::rectangle(Vec2::new(0.0, 0.0), Vec2::new(length, 1.6)).unwrap(),
            vec![],
            Vec2::new(0.4, 0.8),
            Vec2::new(length - 0.4, 0.8),
            0.08,
        )
        .unwrap()
    }

    fn pillar_world() -> World {
        World::new(
            "pillar".into(),
            Polygon::rectangle(Vec2::new(0.0, 0.0), Vec2::new(3.2, 2.4)).unwrap(),
            vec![Polygon::rectangle(Vec2::new(1.4, 0.9), Vec2::new(1.8, 1.5)).unwrap()],
            Vec2::new(0.4, 1.2),
            Vec2::new(2.8, 1.2),
            0.08,
        )
        .unwrap()
    }

    #[test]
    fn empty_world_straight_line_success() {
        let world = open_world(3.6);
        let cfg = PlannerConfig::default();
        let ep = run_episode(&world, &cfg, 0.2, DEFAULT_TIMEOUT, 11).unwrap();
        assert!(ep.outcome.success, "open run must reach the goal");
        assert_eq!(ep.outcome.n_collisions, 0);
        let straight = (world.goal() - world.start()).norm();
        // Arrives within ε_goal of the goal, so up to ε_goal short.
        assert!(
            ep.outcome.path_length >= straight - cfg.eps_goal - 1e-9,
            "path {} vs straight {straight}",
            ep.outcome.path_length
        );
        assert!(
            ep.outcome.path_length <= straight * 1.02,
            "path {} more than 2% over straight {straight}",
            ep.outcome.path_length
        );
    }

    #[test]
    fn identical_seeds_reproduce_bit_identical_outcomes() {
        let world = pillar_world();
        let cfg = PlannerConfig::default();
        let a = run_episode(&world, &cfg, 0.2, 30.0, 1234).unwrap();
        let b = run_episode(&world, &cfg, 0.2, 30.0, 1234).unwrap();
        assert_eq!(a.outcome, b.outcome);
        let c = run_episode(&world, &cfg, 0.2, 30.0, 1235).unwrap();
        assert_ne!(
            a.outcome.trajectory, c.outcome.trajectory,
            "different seed must perturb the run"
        );
    }

    #[test]
    fn path_length_matches_independent_integration() {
        let world = pillar_world();
        let cfg = PlannerConfig::default();
        let ep = run_episode(&world, &cfg, 0.2, 30.0, 77).unwrap();
        let recomputed: f64 = ep
            .outcome
            .trajectory
            .windows(2)
            .map(|w| (w[1].1 - w[0].1).norm())
            .sum();
        assert!(
            (recomputed - ep.outcome.path_length).abs() < 1e-9,
            "engine {} vs recomputed {recomputed}",
            ep.outcome.path_length
        );
    }

    #[test]
    fn robot_never_penetrates_surfaces() {
        let world = pillar_world();
        let cfg = PlannerConfig {
            // Encourage contact so the invariant is actually exercised.
            weights: CostWeights {
                w_p: 1.0,
                w_r: 0.1,
                w_v: 4.0,
            },
            ..PlannerConfig::default()
        };
        let ep = run_episode(&world, &cfg, 0.2, 30.0, 5).unwrap();
        for &(t, p) in &ep.outcome.trajectory {
            assert!(
                world.clearance(p) >= world.robot_radius() - 1e-6,
                "penetration at t={t}: clearance {}",
                world.clearance(p)
            );
        }
    }

    #[test]
    fn pillar_world_completes_with_replanning() {
        let world = pillar_world();
        let cfg = PlannerConfig::default();
        let ep = run_episode(&world, &cfg, 0.2, DEFAULT_TIMEOUT, 42).unwrap();
        assert!(ep.outcome.success, "pillar detour must succeed");
        assert!(ep.outcome.arrival_time <= DEFAULT_TIMEOUT);
        // The detour is longer than the straight chord.
        let straight = (world.goal() - world.start()).norm();
        assert!(ep.outcome.path_length > straight - cfg.eps_goal);
    }

    #[test]
    fn debounce_clusters_scrapes() {
        let mk = |t: f64, intentional: bool| CollisionEvent {
            t,
            point: Vec2::ZERO,
            obstacle_id: 0,
            v_before: Vec2::new(1.0, 0.0),
            v_after: Vec2::new(-0.7, 0.0),
            intentional,
        };
        // Three raw events within the window: one interaction.
        let (n, ni) = debounce(&[mk(1.0, true), mk(1.1, false), mk(1.2, false)]);
        assert_eq!((n, ni), (1, 1));
        // A gap larger than the window starts a new interaction.
        let (n, ni) = debounce(&[mk(1.0, false), mk(1.2, false), mk(2.0, true)]);
        assert_eq!((n, ni), (2, 1));
        assert_eq!(debounce(&[]), (0, 0));
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let world = open_world(3.6);
        let cfg = PlannerConfig::default();
        assert!(matches!(
            run_episode(&world, &cfg, 0.0, 10.0, 1),
            Err(SimError::BadParam(_))
        ));
        assert!(matches!(
            run_episode(&world, &cfg, 0.2, -1.0, 1),
            Err(SimError::BadParam(_))
        ));
    }

    #[test]
    fn pruning_instrumentation_records_cycles() {
        let world = pillar_world();
        let cfg = PlannerConfig {
            measure_pruning: true,
            ..PlannerConfig::default()
        };
        let ep = run_episode(&world, &cfg, 0.2, 20.0, 9).unwrap();
        assert!(
            !ep.timings.is_empty(),
            "pillar scenes must produce sampled cycles"
        );
        for tm in &ep.timings {
            assert!(tm.pruned_count <= tm.full_count);
            assert!(tm.full_us >= 0.0 && tm.pruned_us >= 0.0);
        }
    }
}
