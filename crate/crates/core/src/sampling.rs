//! Candidate-state generation on frontiers and the two-step pruning.
//!
//! The sampling configuration space is `C = S × Θ × V`: positions spaced
//! `Δl` apart along each frontier, `N_l` velocity directions, and per
//! frontier the magnitudes `{v_max·n/N_v : n = 0..N_v}` with
//! `N_v = ⌊len(B_i)/Δl⌋`. Directly visible window-rim arcs are sampled the
//! same way as occlusion frontiers (the robot can explore past the window);
//! their ids continue after the occlusion frontiers'. Pruning first removes
//! positions dominated by a closer-to-goal neighbor on another frontier
//! reachable through free space, then removes moving candidates whose
//! velocity points back into observed free space instead of across the
//! frontier.

use serde::Serialize;

use crate::costs::CostBreakdown;
use crate::geometry::{segment_segment_intersection, Polygon, Segment, Vec2, GEOM_EPS};
use crate::localmap::LocalMap;

/// Step used to probe which side of the frontier a velocity leads to.
pub const VELOCITY_PROBE: f64 = 1e-4;

/// Position-pruning neighborhood, as a fraction of the window side.
pub const NEIGHBOR_RADIUS_FACTOR: f64 = 0.5;

/// One sampled state: a position on a frontier plus a velocity choice.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateState {
    pub pos: Vec2,
    /// Velocity direction in `[0, 2π)`.
    pub vel_dir: f64,
    /// Velocity magnitude in `[0, v_max]`.
    pub vel_mag: f64,
    /// Index into the sampled polylines: occlusion frontiers first, then
    /// window-rim arcs.
    pub frontier_id: usize,
    /// Filled by cost evaluation; `None` until scored.
    pub costs: Option<CostBreakdown>,
}

impl CandidateState {
    pub fn new(pos: Vec2, vel_dir: f64, vel_mag: f64, frontier_id: usize) -> Self {
        Self {
            pos,
            vel_dir: vel_dir.rem_euclid(std::f64::consts::TAU),
            vel_mag,
            frontier_id,
            costs: None,
        }
    }

    /// Velocity vector `v_s`.
    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.vel_dir) * self.vel_mag
    }

    pub fn is_stationary(&self) -> bool {
        self.vel_mag < GEOM_EPS
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SamplingParams {
    /// Frontier sample spacing Δl (meters).
    pub delta_l: f64,
    /// Number of velocity directions N_l.
    pub n_dirs: usize,
    /// Top speed (meters/second).
    pub v_max: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            delta_l: 0.25,
            n_dirs: 8,
            v_max: 1.2,
        }
    }
}

fn polyline_length(pl: &[Vec2]) -> f64 {
    pl.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Point at arc length `s` along the polyline, clamped to its ends.
fn polyline_point_at(pl: &[Vec2], s: f64) -> Vec2 {
    let mut remaining = s.max(0.0);
    for w in pl.windows(2) {
        let d = w[1] - w[0];
        let l = d.norm();
        if remaining <= l && l > GEOM_EPS {
            return w[0] + d * (remaining / l);
        }
        remaining -= l;
    }
    *pl.last().expect("polyline has points")
}

/// Arc-length offsets of sample positions along a frontier of `len`.
fn position_offsets(len: f64, delta_l: f64) -> impl Iterator<Item = f64> {
    let n_v = (len / delta_l).floor() as usize;
    (0..=n_v).map(move |k| k as f64 * delta_l)
}

/// Velocity magnitudes for a frontier of `len`: `{v_max·n/N_v}`, which is
/// `{0}` for a frontier shorter than `delta_l`.
fn magnitudes(len: f64, delta_l: f64, v_max: f64) -> Vec<f64> {
    let n_v = (len / delta_l).floor() as usize;
    if n_v == 0 {
        vec![0.0]
    } else {
        (0..=n_v).map(|n| v_max * n as f64 / n_v as f64).collect()
    }
}

/// Samples the configuration space `C = S × Θ × V` on every frontier and
/// on every directly visible window-rim arc (the rim bounds observation,
/// not the world, so positions there are explorable too).
///
/// Candidate order is deterministic: frontier index (occlusion frontiers
/// first, rim arcs after), then arc length, then direction index, then
/// magnitude index. A map with neither frontiers nor rim arcs — a fully
/// enclosed view — yields an empty list (the planner then pursues the goal
/// directly).
pub fn sample_candidates(map: &LocalMap, params: &SamplingParams) -> Vec<CandidateState> {
    debug_assert!(params.delta_l > 0.0 && params.n_dirs >= 1 && params.v_max > 0.0);
    let mut out = Vec::new();
    let polylines = map
        .frontiers()
        .iter()
        .map(|f| f.polyline())
        .chain(map.window_arcs().iter().map(|a| a.as_slice()));
    for (fid, pl) in polylines.enumerate() {
        let len = polyline_length(pl);
        let mags = magnitudes(len, params.delta_l, params.v_max);
        for offset in position_offsets(len, params.delta_l) {
            let pos = polyline_point_at(pl, offset);
            for k in 0..params.n_dirs {
                let dir = std::f64::consts::TAU * k as f64 / params.n_dirs as f64;
                for &mag in &mags {
                    out.push(CandidateState::new(pos, dir, mag, fid));
                }
            }
        }
    }
    out
}

/// True when the segment `a`→`b` lies entirely inside free space. The
/// endpoints may rest on the boundary; any interior boundary crossing or
/// touch disqualifies (conservative for pruning).
fn segment_in_free_space(a: Vec2, b: Vec2, free: &Polygon) -> bool {
    let seg = Segment::new(a, b);
    if !free.contains(seg.midpoint()) {
        return false;
    }
    let len = seg.length();
    if len <= GEOM_EPS {
        return true;
    }
    let t_eps = (1e-7 / len).min(0.45);
    for edge in free.edges() {
        if let Some(p) = segment_segment_intersection(&seg, &edge) {
            let t = (p - a).dot(seg.direction()) / (len * len);
            if t > t_eps && t < 1.0 - t_eps {
                return false;
            }
        }
    }
    true
}

/// Position pruning: a candidate is removed when another frontier offers a
/// strictly closer-to-goal position within `0.5·window_side`, reachable in
/// a straight line through free space. Frontiers that lose all candidates
/// are restored when no retained candidate lies within the neighborhood
/// (exploration retention), in ascending frontier order so the result is
/// stable under re-application.
pub fn prune_by_position(
    cands: Vec<CandidateState>,
    map: &LocalMap,
    goal: Vec2,
) -> Vec<CandidateState> {
    if cands.is_empty() {
        return cands;
    }
    let (wmin, wmax) = map.window().bounding_box();
    let radius = NEIGHBOR_RADIUS_FACTOR * (wmax.x - wmin.x);

    // Group candidates into unique positions (they share pruning fate).
    #[derive(Clone)]
    struct Pos {
        fid: usize,
        p: Vec2,
        goal_dist: f64,
        retained: bool,
    }
    let mut positions: Vec<Pos> = Vec::new();
    let mut pos_of_cand: Vec<usize> = Vec::with_capacity(cands.len());
    for c in &cands {
        let found = positions
            .iter()
            .position(|q| q.fid == c.frontier_id && q.p == c.pos);
        let idx = found.unwrap_or_else(|| {
            positions.push(Pos {
                fid: c.frontier_id,
                p: c.pos,
                goal_dist: (c.pos - goal).norm(),
                retained: true,
            });
            positions.len() - 1
        });
        pos_of_cand.push(idx);
    }

    // Dominance pass against the full original set.
    let free = map.free_space();
    let dominated: Vec<bool> = positions
        .iter()
        .map(|c| {
            positions.iter().any(|d| {
                d.fid != c.fid
                    && d.goal_dist < c.goal_dist
                    && (d.p - c.p).norm() < radius
                    && segment_in_free_space(c.p, d.p, free)
            })
        })
        .collect();
    for (pos, dom) in positions.iter_mut().zip(&dominated) {
        pos.retained = !dom;
    }

    // Exploration retention: an emptied frontier far from every retained
    // candidate is put back, and immediately counts as retained for the
    // frontiers processed after it.
    let mut fids: Vec<usize> = positions.iter().map(|p| p.fid).collect();
    fids.sort_unstable();
    fids.dedup();
    for fid in fids {
        let emptied = positions
            .iter()
            .filter(|p| p.fid == fid)
            .all(|p| !p.retained);
        if !emptied {
            continue;
        }
        let nearest_retained = positions
            .iter()
            .filter(|p| p.fid == fid)
            .map(|p| {
                positions
                    .iter()
                    .filter(|q| q.retained)
                    .map(|q| (q.p - p.p).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        if nearest_retained > radius {
            for p in positions.iter_mut().filter(|p| p.fid == fid) {
                p.retained = true;
            }
        }
    }

    cands
        .into_iter()
        .zip(pos_of_cand)
        .filter_map(|(c, idx)| positions[idx].retained.then_some(c))
        .collect()
}

/// Velocity pruning: moving candidates whose velocity immediately re-enters
/// observed free space are removed; stationary candidates and candidates
/// crossing into unknown space survive.
pub fn prune_by_velocity(cands: Vec<CandidateState>, map: &LocalMap) -> Vec<CandidateState> {
    let free = map.free_space();
    cands
        .into_iter()
        .filter(|c| {
            if c.is_stationary() {
                return true;
            }
            let probe = c.pos + Vec2::from_angle(c.vel_dir) * VELOCITY_PROBE;
            !free.contains(probe)
        })
        .collect()
}
