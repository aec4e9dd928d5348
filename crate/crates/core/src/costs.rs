//! Cost terms and the joint candidate selection.
//!
//! The planner picks the intermediate state `q_s` minimizing
//! `w_p·J_pos + w_r·J_risk + w_v·J_vel`:
//! - `J_pos`: normalized traveled-plus-heuristic path length, with a
//!   turning penalty `f_a` beyond `θ_thres`.
//! - `J_risk`: normalized inverse collision time against the predicted
//!   boundaries, minus a reward for wide sight angles.
//! - `J_vel`: goal-aligned velocity blended with the post-impact
//!   reflection reward by the collision probability.

use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

use crate::geometry::{point_to_ray_distance, Vec2, GEOM_EPS};
use crate::localmap::{narrow_region_angle, LocalMap, PredictedBoundary};
use crate::sampling::CandidateState;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("cannot select an intermediate state from an empty candidate list")]
    EmptyBatch,
    #[error("cost weights must be non-negative and not all zero")]
    BadWeights,
}

/// Weights of Eq.-style joint cost; see [`select_intermediate_state`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostWeights {
    pub w_p: f64,
    pub w_r: f64,
    pub w_v: f64,
}

impl CostWeights {
    pub fn new(w_p: f64, w_r: f64, w_v: f64) -> Result<Self, CostError> {
        let w = Self { w_p, w_r, w_v };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let ok = self.w_p >= 0.0
            && self.w_r >= 0.0
            && self.w_v >= 0.0
            && (self.w_p > 0.0 || self.w_r > 0.0 || self.w_v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(CostError::BadWeights)
        }
    }
}

impl Default for CostWeights {
    /// The harness configuration: moderate risk weight, strong velocity
    /// reward, which makes deliberate impacts attractive when they pay off.
    fn default() -> Self {
        Self {
            w_p: 1.0,
            w_r: 0.1,
            w_v: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CostParams {
    /// Turning-angle threshold beyond which `f_a` applies (radians).
    pub theta_thres: f64,
    /// Detour penalty factor, ≥ 1.
    pub f_a: f64,
    /// Sight-angle reward factor, ∈ [0, 1].
    pub f_theta: f64,
    /// Stand-in speed for stationary candidates (m/s, > 0).
    pub delta_v: f64,
    /// Reward when the predicted rebound lands back in free space (≤ 0).
    pub penalty: f64,
    /// Post-impact prediction horizon (seconds).
    pub tau_ref: f64,
    /// Normal restitution of the impact model, ∈ (0, 1].
    pub restitution_n: f64,
    /// Tangential restitution of the impact model, ∈ (0, 1].
    pub restitution_t: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            theta_thres: std::f64::consts::FRAC_PI_2,
            f_a: 2.0,
            f_theta: 0.1,
            delta_v: 1e-3,
            penalty: -1.2,
            tau_ref: 0.5,
            restitution_n: 0.7,
            restitution_t: 1.0,
        }
    }
}

/// All cost terms of one candidate. `total` is exactly
/// `w_p·j_pos + w_r·j_risk + w_v·j_vel` as evaluated during scoring.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CostBreakdown {
    pub j_pos: f64,
    pub j_risk: f64,
    pub j_risk_h: f64,
    pub j_risk_g: f64,
    pub j_vel: f64,
    pub r_ref: f64,
    pub total: f64,
}

/// Per-cycle planner inputs shared by all candidates of a batch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlannerContext {
    pub p_cur: Vec2,
    pub p_goal: Vec2,
    /// Previous cycle's position (equals `p_cur` on the first cycle).
    pub p_pre: Vec2,
    pub p_ini: Vec2,
    /// Odometry accumulated from `p_ini` to `p_cur` (meters).
    pub traveled_length: f64,
}

impl PlannerContext {
    pub fn initial(start: Vec2, goal: Vec2) -> Self {
        Self {
            p_cur: start,
            p_goal: goal,
            p_pre: start,
            p_ini: start,
            traveled_length: 0.0,
        }
    }
}

/// Deviation of `p_cur→p_next` from the straight continuation of
/// `p_pre→p_cur`: 0 means straight ahead, π a full reversal. Degenerate
/// legs count as straight.
fn turning_angle(p_pre: Vec2, p_cur: Vec2, p_next: Vec2) -> f64 {
    let inbound = (p_cur - p_pre).try_normalize(GEOM_EPS);
    let outbound = (p_next - p_cur).try_normalize(GEOM_EPS);
    match (inbound, outbound) {
        (Some(a), Some(b)) => a.dot(b).clamp(-1.0, 1.0).acos(),
        _ => 0.0,
    }
}

/// Raw position cost `P_pos`: accumulated odometry plus the leg to the
/// candidate plus the goal heuristic, amplified by `f_a` when the turn
/// at the robot exceeds `θ_thres`.
pub fn cost_pos(cand: &CandidateState, ctx: &PlannerContext, params: &CostParams) -> f64 {
    let d_pos = ctx.traveled_length + (cand.pos - ctx.p_cur).norm() + (ctx.p_goal - cand.pos).norm();
    if turning_angle(ctx.p_pre, ctx.p_cur, cand.pos) >= params.theta_thres {
        params.f_a * d_pos
    } else {
        d_pos
    }
}

fn ray_ray_intersection(o1: Vec2, d1: Vec2, o2: Vec2, d2: Vec2) -> Option<(f64, f64)> {
    let denom = d1.cross(d2);
    if denom.abs() < 1e-12 {
        return None;
    }
    let ao = o2 - o1;
    Some((ao.cross(d2) / denom, ao.cross(d1) / denom))
}

/// Nearest forward intersection of the candidate's velocity ray with any
/// predicted-boundary ray. Stationary candidates have no collision point.
pub fn potential_collision_point(
    cand: &CandidateState,
    predicted: &[PredictedBoundary],
) -> Option<(Vec2, PredictedBoundary)> {
    let dir = cand.velocity().try_normalize(GEOM_EPS)?;
    let mut best: Option<(f64, PredictedBoundary)> = None;
    for e in predicted {
        if let Some((s, t)) = ray_ray_intersection(cand.pos, dir, e.anchor, e.tangent) {
            // Strictly forward along the velocity; the boundary ray may be
            // met right at its anchor.
            if s > 1e-9 && t >= -1e-9 && best.map_or(true, |(bs, _)| s < bs) {
                best = Some((s, *e));
            }
        }
    }
    best.map(|(s, e)| (cand.pos + dir * s, e))
}

/// Distances below this count as already touching. Candidates sampled at a
/// frontier junction sit exactly on a predicted-boundary anchor; without a
/// floor their `1/t_c` explodes and min-max normalization squashes every
/// other candidate's risk to zero.
const MIN_COLLISION_DISTANCE: f64 = 1e-3;

/// Inverse collision time `1/t_c` of one candidate (before batch
/// normalization), with the collision point when one exists.
///
/// Moving candidates divide the collision distance by the velocity
/// component toward the collision point; a miss means zero. Stationary
/// candidates substitute `δv` for speed and the distance to the nearest
/// predicted-boundary ray (falling back to the nearest observed boundary)
/// for distance.
fn inverse_collision_time(
    cand: &CandidateState,
    map: &LocalMap,
    predicted: &[PredictedBoundary],
    params: &CostParams,
) -> (f64, Option<(Vec2, PredictedBoundary)>) {
    if cand.is_stationary() {
        let mut d_p = predicted
            .iter()
            .map(|e| point_to_ray_distance(cand.pos, e.anchor, e.tangent))
            .fold(f64::INFINITY, f64::min);
        if !d_p.is_finite() {
            d_p = map
                .observed_boundaries()
                .iter()
                .map(|c| c.distance_to(cand.pos))
                .fold(f64::INFINITY, f64::min);
        }
        if !d_p.is_finite() {
            return (0.0, None); // nothing to collide with in sight
        }
        let t_c = d_p.max(MIN_COLLISION_DISTANCE) / params.delta_v;
        (1.0 / t_c, None)
    } else {
        match potential_collision_point(cand, predicted) {
            None => (0.0, None),
            Some((p_p, e)) => {
                let s_p = p_p - cand.pos;
                let v_c = cand.velocity().project_onto(s_p).norm();
                let t_c = s_p.norm().max(MIN_COLLISION_DISTANCE) / v_c.max(1e-12);
                (1.0 / t_c, Some((p_p, e)))
            }
        }
    }
}

/// Min-max normalization to `[0, 1]`; constant batches map to all zeros.
fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Collision-risk cost of one candidate against its batch:
/// `(J_risk, J_risk_h)` with `J_risk = J_risk_g + J_risk_h`,
/// `J_risk_h = normalize(1/t_c)` and `J_risk_g = −f_θ·θ_sight`.
pub fn cost_risk(
    cand: &CandidateState,
    map: &LocalMap,
    predicted: &[PredictedBoundary],
    params: &CostParams,
    batch: &[CandidateState],
) -> (f64, f64) {
    let raw = inverse_collision_time(cand, map, predicted, params).0;
    let mut lo = raw;
    let mut hi = raw;
    for b in batch {
        let r = inverse_collision_time(b, map, predicted, params).0;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let j_risk_h = if hi > lo { (raw - lo) / (hi - lo) } else { 0.0 };
    let j_risk_g = -params.f_theta * narrow_region_angle(cand.pos, map);
    (j_risk_g + j_risk_h, j_risk_h)
}

/// Post-impact velocity: tangential component scaled by `restitution_t`,
/// normal component (normal = tangent rotated by π/2) reversed and scaled
/// by `restitution_n`.
pub fn reflect_velocity(v_in: Vec2, e_p: Vec2, params: &CostParams) -> Vec2 {
    debug_assert!((e_p.norm() - 1.0).abs() < 1e-6, "tangent must be unit");
    let n_p = e_p.perp();
    let v_t = v_in.dot(e_p);
    let v_n = v_in.dot(n_p);
    e_p * (params.restitution_t * v_t) - n_p * (params.restitution_n * v_n)
}

/// Reflection reward: alignment of the predicted rebound with the goal,
/// unless the rebound lands back in observed free space (then `penalty`,
/// discouraging bounce-backs). A collision point right on the goal scores
/// the full rebound speed.
pub fn reward_reflection(
    cand: &CandidateState,
    p_p: Vec2,
    e_hit: &PredictedBoundary,
    map: &LocalMap,
    goal: Vec2,
    params: &CostParams,
) -> f64 {
    let v_ref = reflect_velocity(cand.velocity(), e_hit.tangent, params);
    let Some(unit_goal) = (goal - p_p).try_normalize(GEOM_EPS) else {
        return v_ref.norm();
    };
    let p_ref = p_p + v_ref * params.tau_ref;
    if map.free_space().contains(p_ref) {
        params.penalty
    } else {
        v_ref.dot(unit_goal)
    }
}

/// Velocity cost: goal-directed speed when safe, reflection reward when a
/// collision is likely, blended affinely by `j_risk_h`.
pub fn cost_vel(cand: &CandidateState, j_risk_h: f64, r_ref: f64, ctx: &PlannerContext) -> f64 {
    -cand.velocity().dot(ctx.p_goal - ctx.p_cur) * (1.0 - j_risk_h) - r_ref * j_risk_h
}

/// Scores a whole batch with shared normalization, memoizing the sight
/// angle per unique candidate position. Deterministic in candidate order.
pub fn score_batch(
    cands: &[CandidateState],
    ctx: &PlannerContext,
    map: &LocalMap,
    predicted: &[PredictedBoundary],
    weights: &CostWeights,
    params: &CostParams,
) -> Vec<CostBreakdown> {
    let n = cands.len();
    let mut p_pos = Vec::with_capacity(n);
    let mut inv_tc = Vec::with_capacity(n);
    let mut hits = Vec::with_capacity(n);
    for c in cands {
        p_pos.push(cost_pos(c, ctx, params));
        let (raw, hit) = inverse_collision_time(c, map, predicted, params);
        inv_tc.push(raw);
        hits.push(hit);
    }
    let j_pos = min_max_normalize(&p_pos);
    let j_risk_h = min_max_normalize(&inv_tc);

    let mut theta_cache: HashMap<(u64, u64), f64> = HashMap::new();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = &cands[i];
        let key = (c.pos.x.to_bits(), c.pos.y.to_bits());
        let theta = *theta_cache
            .entry(key)
            .or_insert_with(|| narrow_region_angle(c.pos, map));
        let j_risk_g = -params.f_theta * theta;
        let j_risk = j_risk_g + j_risk_h[i];
        let r_ref = match &hits[i] {
            Some((p_p, e)) => reward_reflection(c, *p_p, e, map, ctx.p_goal, params),
            None => 0.0,
        };
        let j_vel = cost_vel(c, j_risk_h[i], r_ref, ctx);
        let total = weights.w_p * j_pos[i] + weights.w_r * j_risk + weights.w_v * j_vel;
        out.push(CostBreakdown {
            j_pos: j_pos[i],
            j_risk,
            j_risk_h: j_risk_h[i],
            j_risk_g,
            j_vel,
            r_ref,
            total,
        });
    }
    out
}

/// Solves the joint minimization over the batch and returns the winning
/// candidate (with its costs filled in). Ties break toward smaller
/// `j_risk`, then smaller index.
pub fn select_intermediate_state(
    cands: &[CandidateState],
    ctx: &PlannerContext,
    map: &LocalMap,
    predicted: &[PredictedBoundary],
    weights: &CostWeights,
    params: &CostParams,
) -> Result<(CandidateState, CostBreakdown), CostError> {
    if cands.is_empty() {
        return Err(CostError::EmptyBatch);
    }
    weights.validate()?;
    let scores = score_batch(cands, ctx, map, predicted, weights, params);
    let mut best = 0;
    for i in 1..scores.len() {
        let (a, b) = (&scores[i], &scores[best]);
        if a.total < b.total || (a.total == b.total && a.j_risk < b.j_risk) {
            best = i;
        }
    }
    let mut winner = cands[best].clone();
    winner.costs = Some(scores[best]);
    Ok((winner, scores[best]))
}
