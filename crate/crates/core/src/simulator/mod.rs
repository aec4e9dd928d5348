//! Deterministic closed-loop world: holonomic kinematic robot, swept-disc
//! collision handling with the restitution model, idealized and
//! beam-quantized range sensing, and the episode runner.

mod episode;
mod world;

pub use episode::{
    run_episode, Episode, EpisodeOutcome, PlanTiming, PlannerConfig, SimError, CONTROL_DT,
    DEFAULT_TIMEOUT, SIM_DT,
};
pub use world::{World, WorldError};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::costs::{reflect_velocity, CostParams};
use crate::geometry::{ray_segment_intersection, OccluderEdge, Segment, Vec2, GEOM_EPS};

/// Clearance retained after a contact so the robot never sits exactly on a
/// surface (which would degenerate the visibility sweep).
const CONTACT_NUDGE: f64 = 1e-7;

/// Robot state `q = (x, y, θ, v)`: position, velocity direction, speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite() && theta.is_finite());
        debug_assert!(v >= 0.0 && v.is_finite());
        Self { x, y, theta, v }
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn vel(&self) -> Vec2 {
        Vec2::from_angle(self.theta) * self.v
    }
}

/// Zero-mean Gaussian disturbance magnitudes; zeros disable the draws.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Std-dev added to each commanded velocity axis (m/s).
    pub actuation_sigma: f64,
    /// Std-dev added to goal bearing (rad) and range (m).
    pub goal_sigma: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            actuation_sigma: 0.02,
            goal_sigma: 0.0,
        }
    }
}

impl NoiseParams {
    pub fn none() -> Self {
        Self {
            actuation_sigma: 0.0,
            goal_sigma: 0.0,
        }
    }
}

/// One physical contact of the robot disc with a surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionEvent {
    pub t: f64,
    /// Robot center at contact (on the radius-inflated surface).
    pub point: Vec2,
    /// Obstacle index, or [`World::bounds_id`] for the outer walls.
    pub obstacle_id: usize,
    pub v_before: Vec2,
    pub v_after: Vec2,
    /// Whether the plan active at impact deliberately aimed for a collision.
    pub intentional: bool,
}

#[derive(Debug, Clone, Copy)]
struct Contact {
    t: f64,
    pos: Vec2,
    tangent: Vec2,
    normal: Vec2,
    obstacle_id: usize,
}

/// Earliest contact of the disc (center `p`, radius `r`, velocity `w`)
/// within `max_t`, against all obstacle capsules and the outer walls.
fn sweep_contact(world: &World, p: Vec2, w: Vec2, max_t: f64, r: f64) -> Option<Contact> {
    let speed = w.norm();
    if speed < 1e-12 {
        return None;
    }
    let sweep_edge = |seg: &Segment, id: usize| -> Option<Contact> {
        let d = seg.direction().try_normalize(GEOM_EPS)?;
        let n = d.perp();
        let rel = p - seg.a;
        let d0 = rel.dot(n);
        let sigma = if d0 >= 0.0 { 1.0 } else { -1.0 };
        let approach = w.dot(n);
        if sigma * approach >= -1e-15 {
            return None; // receding or parallel
        }
        let t = (sigma * r - d0) / approach;
        if !(-1e-12..=max_t).contains(&t) {
            return None;
        }
        let hit = p + w * t;
        let u = (hit - seg.a).dot(d);
        (0.0..=seg.length()).contains(&u).then(|| Contact {
            t: t.max(0.0),
            pos: hit,
            tangent: d,
            normal: n * sigma,
            obstacle_id: id,
        })
    };
    let sweep_vertex = |v: Vec2, id: usize| -> Option<Contact> {
        let q = p - v;
        let a = w.dot(w);
        let b = 2.0 * q.dot(w);
        let c = q.dot(q) - r * r;
        if b >= 0.0 {
            return None; // moving away from the corner
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let t = (-b - disc.sqrt()) / (2.0 * a);
        if !(-1e-12..=max_t).contains(&t) {
            return None;
        }
        let hit = p + w * t;
        let radial = (hit - v).try_normalize(GEOM_EPS)?;
        Some(Contact {
            t: t.max(0.0),
            pos: hit,
            tangent: radial.perp(),
            normal: radial,
            obstacle_id: id,
        })
    };

    let mut best: Option<Contact> = None;
    let mut consider = |c: Option<Contact>| {
        if let Some(c) = c {
            if best.map_or(true, |b| c.t < b.t) {
                best = Some(c);
            }
        }
    };
    for (id, ob) in world.obstacles().iter().enumerate() {
        for seg in ob.edges() {
            consider(sweep_edge(&seg, id));
        }
        for &v in ob.vertices() {
            consider(sweep_vertex(v, id));
        }
    }
    // Outer walls are hit from the inside; their convex corners are covered
    // by the adjacent edge contacts.
    for seg in world.bounds().edges() {
        consider(sweep_edge(&seg, world.bounds_id()));
    }
    best
}

/// Advances the robot by `dt` under the commanded velocity plus actuation
/// noise, with continuous (swept) collision detection. On contact the
/// velocity reflects off the surface tangent with the given restitutions
/// and the first contact of the step is reported.
#[allow(clippy::too_many_arguments)]
pub fn step(
    world: &World,
    state: &RobotState,
    cmd: Vec2,
    dt: f64,
    noise: &NoiseParams,
    params: &CostParams,
    rng: &mut impl Rng,
    t0: f64,
) -> Result<(RobotState, Option<CollisionEvent>), SimError> {
    assert!(dt > 0.0);
    let r = world.robot_radius();
    if world.clearance(state.pos()) < r - 1e-6 {
        return Err(SimError::InCollision {
            x: state.x,
            y: state.y,
        });
    }
    let mut w = cmd;
    if noise.actuation_sigma > 0.0 {
        let gauss = Normal::new(0.0, noise.actuation_sigma).expect("valid sigma");
        w += Vec2::new(gauss.sample(rng), gauss.sample(rng));
    }

    let mut p = state.pos();
    let mut remaining = dt;
    let mut event: Option<CollisionEvent> = None;
    // A step can graze several surfaces (corners); cap the resolution loop.
    for _ in 0..4 {
        if remaining <= 0.0 || w.norm() < 1e-12 {
            break;
        }
        match sweep_contact(world, p, w, remaining, r) {
            None => {
                p += w * remaining;
                remaining = 0.0;
            }
            Some(c) => {
                let v_after = reflect_velocity(w, c.tangent, params);
                debug_assert!(v_after.norm() <= w.norm() + 1e-9);
                if event.is_none() {
                    event = Some(CollisionEvent {
                        t: t0 + (dt - remaining) + c.t,
                        point: c.pos,
                        obstacle_id: c.obstacle_id,
                        v_before: w,
                        v_after,
                        intentional: false,
                    });
                }
                p = c.pos + c.normal * CONTACT_NUDGE;
                remaining -= c.t;
                w = v_after;
            }
        }
    }

    let (theta, v) = match w.try_normalize(GEOM_EPS) {
        Some(dir) => (dir.angle(), w.norm()),
        None => (state.theta, 0.0),
    };
    Ok((RobotState::new(p.x, p.y, theta, v), event))
}

/// The planner's sensed scene: obstacle surfaces inflated by the robot
/// radius plus the deflated outer walls, tagged by source. `None` beams
/// returns the exact geometry; `Some(n)` quantizes it through `n` uniform
/// rays and reconstructs polylines from the hit points.
pub fn sense(
    world: &World,
    state: &RobotState,
    _window_size: f64,
    n_beams: Option<usize>,
) -> Vec<OccluderEdge> {
    let mut exact = Vec::new();
    for (i, ob) in world.inflated_obstacles().iter().enumerate() {
        for seg in ob.edges() {
            exact.push(OccluderEdge { seg, source: i });
        }
    }
    for seg in world.planning_bounds().edges() {
        exact.push(OccluderEdge {
            seg,
            source: world.bounds_id(),
        });
    }
    let Some(n) = n_beams else {
        return exact;
    };
    assert!(n >= 8, "beam quantization needs a reasonable resolution");

    let origin = state.pos();
    let hits: Vec<Option<(usize, Vec2)>> = (0..n)
        .map(|k| {
            let dir = Vec2::from_angle(k as f64 / n as f64 * std::f64::consts::TAU);
            let mut best: Option<(f64, usize)> = None;
            for o in &exact {
                if let Some((t, _)) = ray_segment_intersection(origin, dir, &o.seg) {
                    if t > GEOM_EPS && best.map_or(true, |(bt, _)| t < bt) {
                        best = Some((t, o.source));
                    }
                }
            }
            best.map(|(t, s)| (s, origin + dir * t))
        })
        .collect();

    // Rotate to a run boundary so circular runs are contiguous.
    let source_of = |i: usize| hits[i].map(|(s, _)| s);
    let start = (0..n)
        .find(|&i| source_of(i) != source_of((i + n - 1) % n))
        .unwrap_or(0);
    let mut out = Vec::new();
    let mut run: Vec<Vec2> = Vec::new();
    let mut run_source = usize::MAX;
    let mut flush = |run: &mut Vec<Vec2>, source: usize| {
        for pair in run.windows(2) {
            if (pair[1] - pair[0]).norm() > GEOM_EPS {
                out.push(OccluderEdge {
                    seg: Segment::new(pair[0], pair[1]),
                    source,
                });
            }
        }
        run.clear();
    };
    for k in 0..n {
        let i = (start + k) % n;
        match hits[i] {
            Some((s, pt)) => {
                if run.is_empty() || s == run_source {
                    run_source = s;
                    run.push(pt);
                } else {
                    flush(&mut run, run_source);
                    run_source = s;
                    run.push(pt);
                }
            }
            None => flush(&mut run, run_source),
        }
    }
    // Wrap: if every beam belonged to one source the run is a closed ring.
    if run.len() == n {
        let first = run[0];
        run.push(first);
    }
    flush(&mut run, run_source);
    out
}

/// Goal bearing and range in the world frame, optionally perturbed by
/// zero-mean Gaussian noise.
pub fn goal_sensor(
    world: &World,
    state: &RobotState,
    noise: &NoiseParams,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let to_goal = world.goal() - state.pos();
    let mut bearing = to_goal.angle();
    let mut range = to_goal.norm();
    if noise.goal_sigma > 0.0 {
        let gauss = Normal::new(0.0, noise.goal_sigma).expect("valid sigma");
        bearing += gauss.sample(rng);
        range = (range + gauss.sample(rng)).max(0.0);
    }
    (bearing, range)
}
