//! Sliding local-map decomposition.
//!
//! Each planning cycle rebuilds, from the sensed scene, the map
//! `M = F ∪ (∪B_i) ∪ (∪∂O_j) ∪ U`: free space `F` (the visibility polygon),
//! frontiers `B_i` (radial occlusion edges into shadow), observed obstacle
//! boundaries `∂O_j`, and — implicitly — the unobservable region `U`
//! (window minus everything else). Junctions between observed boundaries
//! and frontiers yield the predicted-boundary set `E`: unit tangents that
//! extend each observed chain into `U`.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    visibility_polygon, EdgeClass, OccluderEdge, Polygon, Segment, SourceId, Vec2,
    VisibilityError, ANGLE_EPS, GEOM_EPS,
};

/// Coincidence tolerance for chain/frontier junction matching (meters).
pub const JUNCTION_TOL: f64 = 1e-4;

/// Probe step used to decide which side of a frontier is unknown space.
pub const SIDE_PROBE: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("visibility computation failed: {0}")]
    Visibility(#[from] VisibilityError),
    #[error("window size must be positive, got {0}")]
    BadWindowSize(f64),
}

/// What a frontier endpoint rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrontierEnd {
    /// Touches an observed obstacle boundary (an occlusion silhouette).
    Obstacle,
    /// Touches the window rim (shadow extends past sensing range).
    Window,
}

/// One frontier `B_i`: a polyline of radial occlusion edges separating
/// free space from shadowed space.
#[derive(Debug, Clone, Serialize)]
pub struct Frontier {
    polyline: Vec<Vec2>,
    length: f64,
    ends: [FrontierEnd; 2],
}

impl Frontier {
    fn new(polyline: Vec<Vec2>, ends: [FrontierEnd; 2]) -> Self {
        debug_assert!(polyline.len() >= 2);
        let length = polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        Self {
            polyline,
            length,
            ends,
        }
    }

    pub fn polyline(&self) -> &[Vec2] {
        &self.polyline
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn ends(&self) -> [FrontierEnd; 2] {
        self.ends
    }

    pub fn endpoints(&self) -> (Vec2, Vec2) {
        (self.polyline[0], *self.polyline.last().unwrap())
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.polyline.windows(2).map(|w| Segment::new(w[0], w[1]))
    }

    /// Point at arc length `s` from the first endpoint, clamped to the ends.
    pub fn point_at_arclen(&self, s: f64) -> Vec2 {
        let mut remaining = s.clamp(0.0, self.length);
        for seg in self.segments() {
            let l = seg.length();
            if remaining <= l {
                return seg.at(if l > 0.0 { remaining / l } else { 0.0 });
            }
            remaining -= l;
        }
        *self.polyline.last().unwrap()
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.segments()
            .map(|s| s.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Unit direction of the polyline segment nearest to `p`.
    pub fn tangent_at(&self, p: Vec2) -> Vec2 {
        let seg = self
            .segments()
            .min_by(|a, b| {
                a.distance_to_point(p)
                    .total_cmp(&b.distance_to_point(p))
            })
            .expect("frontier has at least one segment");
        seg.direction().normalize_or_zero()
    }
}

/// One observed obstacle boundary chain `∂O_j`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryChain {
    polyline: Vec<Vec2>,
    source: SourceId,
}

impl BoundaryChain {
    pub fn polyline(&self) -> &[Vec2] {
        &self.polyline
    }

    pub fn source(&self) -> SourceId {
        self.source
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.polyline.windows(2).map(|w| Segment::new(w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.segments()
            .map(|s| s.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        self.segments()
            .map(|s| s.closest_point(p))
            .min_by(|a, b| (*a - p).norm().total_cmp(&(*b - p).norm()))
            .expect("chain has at least one segment")
    }
}

/// A predicted boundary `e_i`: the hidden continuation of an observed
/// chain past its junction with a frontier, directed into `U`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PredictedBoundary {
    pub anchor: Vec2,
    /// Unit tangent of the last observed edge, oriented away from the chain.
    pub tangent: Vec2,
}

/// The sliding local map, immutable after construction.
#[derive(Debug, Clone, Serialize)]
pub struct LocalMap {
    robot_pos: Vec2,
    window: Polygon,
    free_space: Polygon,
    /// `edge_classes[i]` labels the free-space edge starting at vertex `i`.
    edge_classes: Vec<EdgeClass>,
    frontiers: Vec<Frontier>,
    observed_boundaries: Vec<BoundaryChain>,
    window_arcs: Vec<Vec<Vec2>>,
    predicted_boundaries: Vec<PredictedBoundary>,
}

impl LocalMap {
    pub fn robot_pos(&self) -> Vec2 {
        self.robot_pos
    }

    pub fn window(&self) -> &Polygon {
        &self.window
    }

    pub fn free_space(&self) -> &Polygon {
        &self.free_space
    }

    pub fn edge_classes(&self) -> &[EdgeClass] {
        &self.edge_classes
    }

    pub fn frontiers(&self) -> &[Frontier] {
        &self.frontiers
    }

    pub fn observed_boundaries(&self) -> &[BoundaryChain] {
        &self.observed_boundaries
    }

    pub fn window_arcs(&self) -> &[Vec<Vec2>] {
        &self.window_arcs
    }

    pub fn predicted_boundaries(&self) -> &[PredictedBoundary] {
        &self.predicted_boundaries
    }

    pub fn nearest_frontier(&self, p: Vec2) -> Option<(usize, &Frontier)> {
        self.frontiers
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.distance_to(p).total_cmp(&b.distance_to(p)))
    }

    /// Unit direction from `p` across its nearest frontier into unknown
    /// space, when one side of that frontier is unambiguously free.
    pub fn unknown_side_direction(&self, p: Vec2) -> Option<Vec2> {
        let (_, frontier) = self.nearest_frontier(p)?;
        let n = frontier.tangent_at(p).perp();
        if n == Vec2::ZERO {
            return None;
        }
        let inside_pos = self.free_space.contains(p + n * SIDE_PROBE);
        let inside_neg = self.free_space.contains(p - n * SIDE_PROBE);
        match (inside_pos, inside_neg) {
            (true, false) => Some(-n),
            (false, true) => Some(n),
            _ => None,
        }
    }

    /// Structured text dump of the full decomposition, for plot tooling.
    pub fn debug_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }
}

/// Builds the sliding local map at `robot_pos` from the sensed scene.
///
/// The window is an axis-aligned square of side `window_size` centered on
/// the robot. Free space is the visibility polygon; its boundary edges are
/// partitioned into frontiers, observed boundary chains, and window arcs
/// by the source tags of the visibility sweep.
pub fn build_local_map(
    robot_pos: Vec2,
    window_size: f64,
    sensed: &[OccluderEdge],
) -> Result<LocalMap, MapError> {
    if !(window_size > 0.0) {
        return Err(MapError::BadWindowSize(window_size));
    }
    let half = Vec2::new(window_size / 2.0, window_size / 2.0);
    let window = Polygon::rectangle(robot_pos - half, robot_pos + half)
        .expect("axis-aligned square is a valid polygon");
    let vis = visibility_polygon(robot_pos, &window, sensed)?;

    let verts = vis.polygon().vertices();
    let classes = vis.classes();
    let n = verts.len();

    // Group consecutive same-class edges into circular runs.
    let mut runs: Vec<(EdgeClass, Vec<Vec2>)> = Vec::new();
    if classes.iter().all(|c| *c == classes[0]) {
        let mut loop_pts = verts.to_vec();
        loop_pts.push(verts[0]);
        runs.push((classes[0], loop_pts));
    } else {
        let start = (0..n)
            .find(|&i| classes[(i + n - 1) % n] != classes[i])
            .expect("non-uniform classes have a run boundary");
        let mut i = 0;
        while i < n {
            let class = classes[(start + i) % n];
            let mut pts = vec![verts[(start + i) % n]];
            while i < n && classes[(start + i) % n] == class {
                pts.push(verts[(start + i + 1) % n]);
                i += 1;
            }
            runs.push((class, pts));
        }
    }

    let mut frontiers = Vec::new();
    let mut observed_boundaries = Vec::new();
    let mut window_arcs = Vec::new();
    let n_runs = runs.len();
    for (k, (class, pts)) in runs.iter().enumerate() {
        match class {
            EdgeClass::Frontier => {
                let end_of = |neighbor: &EdgeClass| match neighbor {
                    EdgeClass::Boundary(_) => FrontierEnd::Obstacle,
                    _ => FrontierEnd::Window,
                };
                // With >1 run, neighbors exist and are non-frontier.
                let prev = &runs[(k + n_runs - 1) % n_runs].0;
                let next = &runs[(k + 1) % n_runs].0;
                frontiers.push(Frontier::new(pts.clone(), [end_of(prev), end_of(next)]));
            }
            EdgeClass::Boundary(source) => observed_boundaries.push(BoundaryChain {
                polyline: pts.clone(),
                source: *source,
            }),
            EdgeClass::WindowArc => window_arcs.push(pts.clone()),
        }
    }

    let mut map = LocalMap {
        robot_pos,
        window,
        free_space: vis.polygon().clone(),
        edge_classes: classes.to_vec(),
        frontiers,
        observed_boundaries,
        window_arcs,
        predicted_boundaries: Vec::new(),
    };
    map.predicted_boundaries = extract_predicted_boundaries(&map);
    Ok(map)
}

/// Extracts the predicted-boundary set `E`: one entry per coincidence of an
/// observed-chain endpoint with a frontier endpoint. The tangent extends the
/// chain's terminal edge away from the chain, into the unobservable region.
pub fn extract_predicted_boundaries(map: &LocalMap) -> Vec<PredictedBoundary> {
    let mut out = Vec::new();
    for chain in map.observed_boundaries() {
        let pts = chain.polyline();
        if pts.len() < 2 {
            continue;
        }
        let terminals = [
            (pts[0], pts[1]),
            (pts[pts.len() - 1], pts[pts.len() - 2]),
        ];
        for (endpoint, inner) in terminals {
            let touches_frontier = map.frontiers().iter().any(|f| {
                let (a, b) = f.endpoints();
                (a - endpoint).norm() <= JUNCTION_TOL || (b - endpoint).norm() <= JUNCTION_TOL
            });
            if !touches_frontier {
                continue;
            }
            if let Some(tangent) = (endpoint - inner).try_normalize(GEOM_EPS) {
                out.push(PredictedBoundary {
                    anchor: endpoint,
                    tangent,
                });
            }
        }
    }
    out
}

/// Angular width θ_sight of the free opening around the direction a
/// candidate leads into, measured at `candidate_pos`.
///
/// Observed boundary chains subtend occluded intervals on the circle of
/// directions at the candidate; the gaps between them are openings. The
/// returned width is that of the gap containing the direction across the
/// candidate's frontier into unknown space (falling back to the nearest
/// gap, then to the robot→candidate direction when no frontier exists).
/// No occluders at all gives 2π. This gap-angle construction is this
/// implementation's formalization of the narrow-region angle.
pub fn narrow_region_angle(candidate_pos: Vec2, map: &LocalMap) -> f64 {
    use std::f64::consts::TAU;

    // Occluded intervals (start ∈ [0, 2π), width < π), split at the wrap.
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for chain in map.observed_boundaries() {
        for seg in chain.segments() {
            if seg.distance_to_point(candidate_pos) <= GEOM_EPS {
                // Candidate sits on this edge; its subtense is undefined.
                continue;
            }
            let a = (seg.a - candidate_pos).angle();
            let d = shortest_signed_angle((seg.b - candidate_pos).angle() - a);
            if d.abs() < 1e-12 {
                continue;
            }
            let lo = if d >= 0.0 { a } else { a + d };
            let width = d.abs();
            let lo = lo.rem_euclid(TAU);
            if lo + width > TAU {
                intervals.push((lo, TAU));
                intervals.push((0.0, lo + width - TAU));
            } else {
                intervals.push((lo, lo + width));
            }
        }
    }
    if intervals.is_empty() {
        return TAU;
    }

    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in intervals {
        match merged.last_mut() {
            Some((_, le)) if s <= *le + 1e-12 => *le = le.max(e),
            _ => merged.push((s, e)),
        }
    }
    // Wrap join: an interval ending at 2π continues one starting at 0.
    if merged.len() > 1 {
        let first_start = merged[0].0;
        let last_end = merged.last().unwrap().1;
        if first_start <= 1e-12 && last_end >= TAU - 1e-12 {
            let (_, first_end) = merged.remove(0);
            merged.last_mut().unwrap().1 = TAU + first_end;
        }
    }

    // Gaps between consecutive occluded intervals, circularly.
    let m = merged.len();
    let mut gaps: Vec<(f64, f64)> = Vec::new(); // (start, width)
    for i in 0..m {
        let end_i = merged[i].1;
        let next_start = if i + 1 < m {
            merged[i + 1].0
        } else {
            merged[0].0 + TAU
        };
        let width = next_start - end_i;
        if width > 1e-12 {
            gaps.push((end_i.rem_euclid(TAU), width.min(TAU)));
        }
    }
    if gaps.is_empty() {
        return ANGLE_EPS; // fully surrounded; keep the result positive
    }

    let dir = map
        .unknown_side_direction(candidate_pos)
        .or_else(|| (candidate_pos - map.robot_pos()).try_normalize(GEOM_EPS))
        .unwrap_or(Vec2::new(1.0, 0.0));
    let theta = dir.angle().rem_euclid(TAU);

    let in_gap = |(s, w): (f64, f64)| (theta - s).rem_euclid(TAU) <= w;
    if let Some(&(_, w)) = gaps.iter().find(|g| in_gap(**g)) {
        return w;
    }
    // Direction is occluded: use the angularly nearest gap.
    gaps.iter()
        .min_by(|a, b| {
            gap_distance(theta, **a).total_cmp(&gap_distance(theta, **b))
        })
        .map(|&(_, w)| w)
        .unwrap_or(ANGLE_EPS)
}

fn gap_distance(theta: f64, (s, w): (f64, f64)) -> f64 {
    use std::f64::consts::TAU;
    let to_start = (s - theta).rem_euclid(TAU);
    let from_end = (theta - (s + w)).rem_euclid(TAU);
    to_start.min(from_end)
}

fn shortest_signed_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = (a + PI).rem_euclid(TAU) - PI;
    if a >= PI {
        a -= TAU;
    }
    a
}

/// True iff `goal` lies in observed free space (boundary-inclusive).
pub fn goal_in_free_space(map: &LocalMap, goal: Vec2) -> bool {
    map.free_space().contains(goal)
}
