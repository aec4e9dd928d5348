//! Timed reference trajectories: a clamped cubic B-spline through four
//! waypoints, paced so the reference speed stays within `v_max` and the
//! duration covers at least one map-update interval.

use serde::Serialize;

use crate::geometry::{Vec2, GEOM_EPS};
use crate::sampling::CandidateState;
use crate::simulator::RobotState;

/// Default number of spline samples per planned segment.
pub const DEFAULT_SAMPLES: usize = 50;

/// A time-parameterized reference path.
///
/// `samples` are strictly increasing in `t` from 0 to `duration`; lookups
/// between samples interpolate linearly, so maneuver references built by
/// projecting these samples stay representable by the same type.
#[derive(Debug, Clone, Serialize)]
pub struct TimedTrajectory {
    control_points: [Vec2; 4],
    samples: Vec<(f64, Vec2)>,
    duration: f64,
}

impl TimedTrajectory {
    /// Builds the planning reference from the robot state to the selected
    /// candidate: spline through [`make_control_points`], duration from
    /// [`assign_duration`], sampled at `n_samples` uniform times.
    pub fn plan(
        q_cur: &RobotState,
        q_s: &CandidateState,
        v_max: f64,
        p_safe: f64,
        t_map: f64,
        n_samples: usize,
    ) -> Self {
        assert!(t_map > 0.0, "map interval must be positive");
        let wp = make_control_points(q_cur, q_s);
        let duration = assign_duration(&wp, v_max, p_safe, t_map);
        let n = n_samples.max(2);
        let samples = interpolate_bspline(&wp, n)
            .into_iter()
            .enumerate()
            .map(|(i, pos)| (duration * i as f64 / (n - 1) as f64, pos))
            .collect();
        Self {
            control_points: wp,
            samples,
            duration,
        }
    }

    /// Rebuilds a reference from already-timed samples. Timestamps must be
    /// strictly increasing starting at 0.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn from_samples(control_points: [Vec2; 4], samples: Vec<(f64, Vec2)>) -> Self {
        debug_assert!(samples.len() >= 2);
        debug_assert!(samples.windows(2).all(|w| w[1].0 > w[0].0));
        let duration = samples.last().map(|&(t, _)| t).unwrap_or(0.0);
        Self {
            control_points,
            samples,
            duration,
        }
    }

    pub fn control_points(&self) -> &[Vec2; 4] {
        &self.control_points
    }

    pub fn samples(&self) -> &[(f64, Vec2)] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start(&self) -> Vec2 {
        self.samples.first().expect("non-empty").1
    }

    pub fn end(&self) -> Vec2 {
        self.samples.last().expect("non-empty").1
    }

    /// Reference position at time `t`, clamped to `[0, duration]`,
    /// linearly interpolated between stored samples.
    pub fn position_at(&self, t: f64) -> Vec2 {
        let samples = &self.samples;
        if t <= samples[0].0 {
            return samples[0].1;
        }
        if t >= self.duration {
            return samples[samples.len() - 1].1;
        }
        let idx = samples.partition_point(|&(st, _)| st <= t);
        let (t0, p0) = samples[idx - 1];
        let (t1, p1) = samples[idx];
        let a = (t - t0) / (t1 - t0);
        p0 + (p1 - p0) * a
    }

    /// Reference velocity at time `t` by forward finite differencing;
    /// zero beyond the end of the trajectory.
    pub fn velocity_at(&self, t: f64, dt: f64) -> Vec2 {
        debug_assert!(dt > 0.0);
        if t >= self.duration {
            return Vec2::ZERO;
        }
        (self.position_at(t + dt) - self.position_at(t)) / dt
    }

    /// Replaces sample positions pointwise, keeping timestamps. The mapping
    /// must preserve continuity for the result to remain a valid reference.
    pub(crate) fn map_positions(&self, mut f: impl FnMut(usize, Vec2) -> Vec2) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &(t, p))| (t, f(i, p)))
            .collect();
        Self {
            control_points: self.control_points,
            samples,
            duration: self.duration,
        }
    }
}

/// Waypoint layout `[p_cur, p_cur + κ·v̂_cur, p_s − κ·v̂_s, p_s]` with
/// `κ = ‖p_s − p_cur‖/3`, so the spline leaves along the current velocity
/// and arrives along the candidate's. Degenerate velocities fall back to
/// the chord direction; a zero chord collapses all four points.
pub fn make_control_points(q_cur: &RobotState, q_s: &CandidateState) -> [Vec2; 4] {
    let p_cur = q_cur.pos();
    let p_s = q_s.pos;
    let chord = p_s - p_cur;
    let kappa = chord.norm() / 3.0;
    let chord_dir = chord.normalize_or_zero();
    let v_cur = q_cur.vel().try_normalize(GEOM_EPS).unwrap_or(chord_dir);
    let v_s = q_s.velocity().try_normalize(GEOM_EPS).unwrap_or(chord_dir);
    [p_cur, p_cur + v_cur * kappa, p_s - v_s * kappa, p_s]
}

/// De Casteljau evaluation of the clamped cubic (knots `[0⁴, 1⁴]`), which
/// interpolates the first and last control points exactly.
pub fn eval_spline(wp: &[Vec2; 4], u: f64) -> Vec2 {
    let a = wp[0] + (wp[1] - wp[0]) * u;
    let b = wp[1] + (wp[2] - wp[1]) * u;
    let c = wp[2] + (wp[3] - wp[2]) * u;
    let ab = a + (b - a) * u;
    let bc = b + (c - b) * u;
    ab + (bc - ab) * u
}

/// Positions of the clamped cubic B-spline at `n_samples` uniform
/// parameters in `[0, 1]`.
pub fn interpolate_bspline(wp: &[Vec2; 4], n_samples: usize) -> Vec<Vec2> {
    assert!(n_samples >= 2, "need at least the two endpoints");
    (0..n_samples)
        .map(|i| eval_spline(wp, i as f64 / (n_samples - 1) as f64))
        .collect()
}

/// Duration `T = max{T_v, T_map}` with `T_v = p_safe·Σ‖WP_i − WP_{i−1}‖ / v_max`:
/// the spline is paced to stay under `v_max` but never replanned faster
/// than the map updates.
pub fn assign_duration(wp: &[Vec2; 4], v_max: f64, p_safe: f64, t_map: f64) -> f64 {
    assert!(v_max > 0.0, "v_max must be positive");
    assert!(p_safe >= 1.0, "p_safe must not cut the speed margin");
    let polygon_len: f64 = wp.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let t_v = p_safe * polygon_len / v_max;
    t_v.max(t_map)
}
