//! Reference tracking and maneuver switching.
//!
//! Each planning cycle produces a spline reference; the controller decides
//! whether to track it directly (free space), project it onto an obstacle
//! boundary (boundary following), or project it onto the start–end chord
//! (flow through), based on where the predicted collision point lies
//! relative to the chord normal. Engagement and disengagement are governed
//! by small hysteresis automata keyed on distance to the collision and
//! disengaging points.

use serde::Serialize;

use crate::geometry::{ray_segment_intersection, Segment, Vec2, GEOM_EPS};
use crate::localmap::LocalMap;
use crate::trajectory::TimedTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Maneuver {
    FreeSpace,
    BoundaryFollowing,
    FlowThrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Switch {
    Off,
    On,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl Default for PidGains {
    /// Tuned for the kinematic simulator at a 20 Hz control rate.
    fn default() -> Self {
        Self {
            kp: 3.0,
            ki: 0.0,
            kd: 0.3,
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> bool {
        self.kp > 0.0 && self.ki >= 0.0 && self.kd >= 0.0
    }
}

/// Per-axis PID position tracker with reference feed-forward. Single-owner
/// state; one instance per episode.
#[derive(Debug, Clone)]
pub struct Pid {
    gains: PidGains,
    integral: Vec2,
    prev_error: Option<Vec2>,
}

impl Pid {
    pub fn new(gains: PidGains) -> Self {
        debug_assert!(gains.validate());
        Self {
            gains,
            integral: Vec2::ZERO,
            prev_error: None,
        }
    }

    pub fn reset(&mut self) {
        self.integral = Vec2::ZERO;
        self.prev_error = None;
    }

    /// Velocity command toward the time-indexed reference point, with
    /// feed-forward from the reference's own motion, saturated to `v_max`.
    pub fn track(
        &mut self,
        reference: &TimedTrajectory,
        t: f64,
        pos: Vec2,
        v_max: f64,
        dt: f64,
    ) -> Vec2 {
        assert!(dt > 0.0);
        let error = reference.position_at(t) - pos;
        self.integral += error * dt;
        let derivative = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => Vec2::ZERO,
        };
        self.prev_error = Some(error);
        let cmd = reference.velocity_at(t, dt)
            + error * self.gains.kp
            + self.integral * self.gains.ki
            + derivative * self.gains.kd;
        let norm = cmd.norm();
        if norm > v_max {
            cmd * (v_max / norm)
        } else {
            cmd
        }
    }
}

/// Maneuver selection: no predicted collision means plain spline tracking;
/// otherwise the collision point's side of the chord normal decides. With
/// `v` the chord direction rotated +π/2, a collision point on the `v` side
/// is flowed through, the other side is boundary-followed.
pub fn select_maneuver(wp: &[Vec2; 4], p_c: Option<Vec2>) -> Maneuver {
    let Some(p_c) = p_c else {
        return Maneuver::FreeSpace;
    };
    let Some(chord) = (wp[3] - wp[0]).try_normalize(GEOM_EPS) else {
        // Degenerate chord: nothing to project onto; replan resolves it.
        return Maneuver::FreeSpace;
    };
    let v = chord.perp();
    if v.dot(p_c - wp[0]) >= 0.0 {
        Maneuver::FlowThrough
    } else {
        Maneuver::BoundaryFollowing
    }
}

/// First crossing of the reference path into an observed or predicted
/// obstacle boundary, walked sample by sample in time order.
#[derive(Debug, Clone, Serialize)]
pub struct CollisionPrediction {
    pub point: Vec2,
    /// The boundary polyline that was hit, used for projection when
    /// boundary following.
    pub polyline: Vec<Vec2>,
}

/// Fraction along `leg` at which it first crosses `seg`, if it does.
fn leg_intersection(leg: &Segment, seg: &Segment) -> Option<f64> {
    let d = leg.direction();
    let (t, _) = ray_segment_intersection(leg.a, d, seg)?;
    let t_eps = GEOM_EPS / d.norm().max(GEOM_EPS);
    (t <= 1.0 + t_eps).then(|| t.min(1.0))
}

pub fn predict_collision(q_spl: &TimedTrajectory, map: &LocalMap) -> Option<CollisionPrediction> {
    let (wmin, wmax) = map.window().bounding_box();
    let reach = (wmax - wmin).norm();
    let mut surfaces: Vec<(Segment, &[Vec2])> = Vec::new();
    let mut pred_lines: Vec<[Vec2; 2]> = Vec::new();
    for e in map.predicted_boundaries() {
        pred_lines.push([e.anchor, e.anchor + e.tangent * reach]);
    }
    for chain in map.observed_boundaries() {
        for seg in chain.segments() {
            surfaces.push((seg, chain.polyline()));
        }
    }

    let samples = q_spl.samples();
    for pair in samples.windows(2) {
        let leg = Segment::new(pair[0].1, pair[1].1);
        if leg.length() < GEOM_EPS {
            continue;
        }
        let mut best: Option<(f64, Vec2, Vec<Vec2>)> = None;
        for (seg, pl) in &surfaces {
            if let Some(t) = leg_intersection(&leg, seg) {
                if best.as_ref().map_or(true, |(bt, ..)| t < *bt) {
                    best = Some((t, leg.at(t), pl.to_vec()));
                }
            }
        }
        for line in &pred_lines {
            let seg = Segment::new(line[0], line[1]);
            if let Some(t) = leg_intersection(&leg, &seg) {
                if best.as_ref().map_or(true, |(bt, ..)| t < *bt) {
                    best = Some((t, leg.at(t), line.to_vec()));
                }
            }
        }
        if let Some((_, point, polyline)) = best {
            return Some(CollisionPrediction { point, polyline });
        }
    }
    None
}

fn closest_on_polyline(polyline: &[Vec2], p: Vec2) -> (Vec2, Vec2) {
    debug_assert!(polyline.len() >= 2);
    let mut best = (f64::INFINITY, polyline[0], Vec2::new(1.0, 0.0));
    for w in polyline.windows(2) {
        let seg = Segment::new(w[0], w[1]);
        if seg.length() < GEOM_EPS {
            continue;
        }
        let cp = seg.closest_point(p);
        let d = (p - cp).norm();
        if d < best.0 {
            best = (d, cp, seg.direction());
        }
    }
    (best.1, best.2)
}

/// Signed side of `p` relative to the polyline (sign of the cross product
/// against the nearest segment's direction); 0 on the boundary.
fn polyline_side(polyline: &[Vec2], p: Vec2) -> f64 {
    let (cp, dir) = closest_on_polyline(polyline, p);
    let s = dir.cross(p - cp);
    if s.abs() < GEOM_EPS {
        0.0
    } else {
        s.signum()
    }
}

/// Projects the spline onto the obstacle boundary from the engaging point
/// until the spline re-emerges on the robot's side. Returns the projected
/// reference and the disengaging point `p_d` (projection of the last
/// engaged sample; equals `p_c` when the spline only grazes the boundary).
pub fn boundary_following_reference(
    q_spl: &TimedTrajectory,
    boundary: &[Vec2],
    p_c: Vec2,
) -> (TimedTrajectory, Vec2) {
    let samples = q_spl.samples();
    let sides: Vec<f64> = samples
        .iter()
        .map(|&(_, p)| polyline_side(boundary, p))
        .collect();
    // The robot's (free) side is the first decided sample's side.
    let free_side = sides.iter().copied().find(|s| *s != 0.0).unwrap_or(1.0);

    let engaged: Vec<bool> = sides.iter().map(|s| s * free_side <= 0.0).collect();
    let first = engaged.iter().position(|&e| e);
    let (i0, i1) = match first {
        Some(i0) => {
            let i1 = (i0..engaged.len())
                .take_while(|&i| engaged[i])
                .last()
                .unwrap_or(i0);
            (i0, i1)
        }
        None => {
            // Crossing happened between samples (grazing): collapse the
            // maneuver to the sample nearest the collision point.
            let i = samples
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (a.1 .1 - p_c).norm();
                    let db = (b.1 .1 - p_c).norm();
                    da.partial_cmp(&db).expect("finite distances")
                })
                .map(|(i, _)| i)
                .unwrap_or(0);
            (i, i)
        }
    };

    let q_bound = q_spl.map_positions(|i, p| {
        if i >= i0 && i <= i1 {
            closest_on_polyline(boundary, p).0
        } else {
            p
        }
    });
    let p_d = closest_on_polyline(boundary, samples[i1].1).0;
    (q_bound, p_d)
}

/// Projects every spline sample onto the chord through `WP_1` with
/// direction `WP_4 − WP_1`, keeping timestamps.
pub fn flow_through_reference(q_spl: &TimedTrajectory, wp: &[Vec2; 4]) -> TimedTrajectory {
    let dir = (wp[3] - wp[0])
        .try_normalize(GEOM_EPS)
        .expect("chord must be non-degenerate");
    let origin = wp[0];
    q_spl.map_positions(|_, p| origin + dir * (p - origin).dot(dir))
}

/// One planning cycle's maneuver automaton. The mode is fixed at plan time
/// (per the maneuver-selection rule); only the engagement switch evolves:
/// off→on within `δ` of the collision point, and (boundary following only)
/// on→off within `δ` of the disengaging point. Flow-through stays engaged
/// until the next plan replaces the whole state.
#[derive(Debug, Clone, Serialize)]
pub struct ManeuverState {
    mode: Maneuver,
    switch: Switch,
    p_c: Option<Vec2>,
    p_d: Option<Vec2>,
    q_spl: TimedTrajectory,
    q_maneuver: Option<TimedTrajectory>,
    delta: f64,
}

impl ManeuverState {
    pub fn plan(
        q_spl: TimedTrajectory,
        prediction: Option<CollisionPrediction>,
        delta: f64,
    ) -> Self {
        assert!(delta > 0.0, "hysteresis must be positive");
        let wp = *q_spl.control_points();
        let mode = select_maneuver(&wp, prediction.as_ref().map(|p| p.point));
        let (p_c, p_d, q_maneuver) = match (&prediction, mode) {
            (Some(pred), Maneuver::FlowThrough) => (
                Some(pred.point),
                None,
                Some(flow_through_reference(&q_spl, &wp)),
            ),
            (Some(pred), Maneuver::BoundaryFollowing) => {
                let (q_bound, p_d) =
                    boundary_following_reference(&q_spl, &pred.polyline, pred.point);
                (Some(pred.point), Some(p_d), Some(q_bound))
            }
            _ => (None, None, None),
        };
        Self {
            mode,
            switch: Switch::Off,
            p_c,
            p_d,
            q_spl,
            q_maneuver,
            delta,
        }
    }

    pub fn mode(&self) -> Maneuver {
        self.mode
    }

    pub fn switch(&self) -> Switch {
        self.switch
    }

    pub fn collision_point(&self) -> Option<Vec2> {
        self.p_c
    }

    pub fn disengaging_point(&self) -> Option<Vec2> {
        self.p_d
    }

    /// Steps the switching automaton with the robot's position. At most one
    /// transition per call; deterministic in (state, position).
    pub fn observe(&mut self, pos: Vec2) {
        match (self.mode, self.switch) {
            (Maneuver::FreeSpace, _) => {}
            (_, Switch::Off) => {
                if let Some(p_c) = self.p_c {
                    if (pos - p_c).norm() <= self.delta {
                        self.switch = Switch::On;
                    }
                }
            }
            (Maneuver::BoundaryFollowing, Switch::On) => {
                if let Some(p_d) = self.p_d {
                    if (pos - p_d).norm() <= self.delta {
                        self.switch = Switch::Off;
                    }
                }
            }
            (Maneuver::FlowThrough, Switch::On) => {} // engaged until replan
        }
    }

    /// The trajectory the tracker should follow right now.
    pub fn reference(&self) -> &TimedTrajectory {
        match (self.switch, &self.q_maneuver) {
            (Switch::On, Some(m)) => m,
            _ => &self.q_spl,
        }
    }

    pub fn spline(&self) -> &TimedTrajectory {
        &self.q_spl
    }
}
