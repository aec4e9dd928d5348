//! World definition: bounds, convex obstacles, goal, and the derived
//! planning geometry (obstacles grown by the robot radius, bounds shrunk
//! by it), loaded from structured `.world` text files.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::{Polygon, PolygonError, Vec2, GEOM_EPS};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("cannot read world file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse world file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid polygon: {0}")]
    Geometry(#[from] PolygonError),
    #[error("bounds polygon must be convex")]
    BoundsNotConvex,
    #[error("obstacle {0} must be convex")]
    ObstacleNotConvex(usize),
    #[error("obstacle {0} is not inside the world bounds")]
    ObstacleOutsideBounds(usize),
    #[error("obstacles {0} and {1} overlap")]
    ObstaclesOverlap(usize, usize),
    #[error("robot radius must be positive and fit the bounds")]
    BadRadius,
    #[error("start position is blocked or outside the reachable bounds")]
    StartBlocked,
    #[error("goal position is blocked or outside the reachable bounds")]
    GoalBlocked,
}

#[derive(Debug, Deserialize)]
struct WorldFile {
    #[serde(default)]
    name: String,
    bounds: Vec<[f64; 2]>,
    start: [f64; 2],
    goal: [f64; 2],
    robot_radius: f64,
    #[serde(default)]
    obstacles: Vec<ObstacleDef>,
}

#[derive(Debug, Deserialize)]
struct ObstacleDef {
    vertices: Vec<[f64; 2]>,
}

/// Validated world with cached planning geometry. The true geometry drives
/// collision checking (disc robot); the planner sees a point robot against
/// obstacles inflated by the radius and bounds deflated by it.
#[derive(Debug, Clone)]
pub struct World {
    name: String,
    bounds: Polygon,
    obstacles: Vec<Polygon>,
    start: Vec2,
    goal: Vec2,
    robot_radius: f64,
    inflated: Vec<Polygon>,
    planning_bounds: Polygon,
}

impl World {
    pub fn new(
        name: String,
        bounds: Polygon,
        obstacles: Vec<Polygon>,
        start: Vec2,
        goal: Vec2,
        robot_radius: f64,
    ) -> Result<Self, WorldError> {
        if !(robot_radius > 0.0) {
            return Err(WorldError::BadRadius);
        }
        if !bounds.is_convex() {
            return Err(WorldError::BoundsNotConvex);
        }
        for (i, ob) in obstacles.iter().enumerate() {
            if !ob.is_convex() {
                return Err(WorldError::ObstacleNotConvex(i));
            }
            if !ob.vertices().iter().all(|&v| bounds.contains(v)) {
                return Err(WorldError::ObstacleOutsideBounds(i));
            }
        }
        for i in 0..obstacles.len() {
            for j in (i + 1)..obstacles.len() {
                if polygons_touch(&obstacles[i], &obstacles[j]) {
                    return Err(WorldError::ObstaclesOverlap(i, j));
                }
            }
        }
        let planning_bounds =
            deflate_convex(&bounds, robot_radius).ok_or(WorldError::BadRadius)?;
        let inflated = obstacles
            .iter()
            .map(|ob| inflate_convex(ob, robot_radius))
            .collect();
        let world = Self {
            name,
            bounds,
            obstacles,
            start,
            goal,
            robot_radius,
            inflated,
            planning_bounds,
        };
        if !world.is_clear(start) {
            return Err(WorldError::StartBlocked);
        }
        if !world.is_clear(goal) {
            return Err(WorldError::GoalBlocked);
        }
        Ok(world)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            WorldError::Parse { source, .. } => WorldError::Parse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, WorldError> {
        let file: WorldFile = toml::from_str(text).map_err(|source| WorldError::Parse {
            path: PathBuf::from("<inline>"),
            source: Box::new(source),
        })?;
        let to_vec2 = |p: [f64; 2]| Vec2::new(p[0], p[1]);
        let bounds = Polygon::new(file.bounds.iter().copied().map(to_vec2).collect())?;
        let obstacles = file
            .obstacles
            .iter()
            .map(|o| Polygon::new(o.vertices.iter().copied().map(to_vec2).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(
            file.name,
            bounds,
            obstacles,
            to_vec2(file.start),
            to_vec2(file.goal),
            file.robot_radius,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bounds(&self) -> &Polygon {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn start(&self) -> Vec2 {
        self.start
    }

    pub fn goal(&self) -> Vec2 {
        self.goal
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    /// Obstacles grown by the robot radius (planning geometry).
    pub fn inflated_obstacles(&self) -> &[Polygon] {
        &self.inflated
    }

    /// Bounds shrunk by the robot radius: the reachable set of the robot's
    /// center.
    pub fn planning_bounds(&self) -> &Polygon {
        &self.planning_bounds
    }

    /// Identifier used for collisions with the outer walls (one past the
    /// last obstacle index).
    pub fn bounds_id(&self) -> usize {
        self.obstacles.len()
    }

    /// Clearance from `p` to the nearest true surface: obstacle boundaries
    /// and the outer walls. Zero inside an obstacle or outside the bounds.
    pub fn clearance(&self, p: Vec2) -> f64 {
        if !self.bounds.contains(p) {
            return 0.0;
        }
        let mut d = self.bounds.boundary_distance(p);
        for ob in &self.obstacles {
            if ob.contains(p) {
                return 0.0;
            }
            d = d.min(ob.boundary_distance(p));
        }
        d
    }

    /// True when a disc of the robot radius centered at `p` touches nothing
    /// (with a tiny margin to keep the planner's map non-degenerate).
    pub fn is_clear(&self, p: Vec2) -> bool {
        self.clearance(p) > self.robot_radius + GEOM_EPS
    }

    /// A copy whose planning geometry uses `robot_radius + margin` — a
    /// tracking-tolerance standoff for the planner. Collision checking is
    /// untouched: the robot still physically fits wherever it did before.
    pub fn with_margin(&self, margin: f64) -> Result<World, WorldError> {
        assert!(margin.is_finite() && margin >= 0.0, "margin must be ≥ 0");
        if margin == 0.0 {
            return Ok(self.clone());
        }
        let grown = self.robot_radius + margin;
        let planning_bounds = deflate_convex(&self.bounds, grown).ok_or(WorldError::BadRadius)?;
        let inflated = self
            .obstacles
            .iter()
            .map(|ob| inflate_convex(ob, grown))
            .collect();
        Ok(World {
            inflated,
            planning_bounds,
            ..self.clone()
        })
    }
}

/// Overlap test for convex polygons: any edge crossing or full containment
/// of one vertex. Touching counts as overlap (worlds must keep obstacles
/// strictly apart; attaching to the outer walls is fine).
fn polygons_touch(a: &Polygon, b: &Polygon) -> bool {
    for ea in a.edges() {
        if !crate::geometry::segment_polygon_intersections(&ea, b).is_empty() {
            return true;
        }
    }
    a.contains(b.vertices()[0]) || b.contains(a.vertices()[0])
}

/// Outward offset of a convex CCW polygon by `r`, with corner arcs replaced
/// by circumscribed fans (≤ 30° per facet) so the polygon covers the exact
/// disc sum: the planner's free space stays inside the truly safe set.
pub(crate) fn inflate_convex(poly: &Polygon, r: f64) -> Polygon {
    const MAX_STEP: f64 = std::f64::consts::PI / 6.0;
    let vs = poly.vertices();
    let n = vs.len();
    let mut out: Vec<Vec2> = Vec::with_capacity(n * 4);
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let c = vs[(i + 2) % n];
        let d_in = (b - a).normalize_or_zero();
        let d_out = (c - b).normalize_or_zero();
        let n_in = -d_in.perp(); // outward normal of a CCW edge
        let n_out = -d_out.perp();
        out.push(a + n_in * r);
        out.push(b + n_in * r);
        // Fan across the corner arc at b, from n_in to n_out.
        let span = n_in.cross(n_out).atan2(n_in.dot(n_out));
        if span > 1e-9 {
            let m = (span / MAX_STEP).ceil() as usize;
            let step = span / m as f64;
            let scale = r / (step / 2.0).cos();
            let base = n_in.angle();
            for j in 0..m {
                let mid = base + (j as f64 + 0.5) * step;
                out.push(b + Vec2::from_angle(mid) * scale);
            }
        }
    }
    out.dedup_by(|p, q| (*p - *q).norm() < 1e-12);
    if out.len() > 1 && (out[0] - out[out.len() - 1]).norm() < 1e-12 {
        out.pop();
    }
    Polygon::from_loop_unchecked(out)
}

/// Inward offset of a convex CCW polygon by `r`: every edge line moved
/// inside, vertices re-intersected. `None` when the radius swallows the
/// polygon.
pub(crate) fn deflate_convex(poly: &Polygon, r: f64) -> Option<Polygon> {
    let vs = poly.vertices();
    let n = vs.len();
    // Offset lines (point, direction), skipping collinear repeats.
    let mut lines: Vec<(Vec2, Vec2)> = Vec::with_capacity(n);
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let d = (b - a).normalize_or_zero();
        let inward = d.perp();
        if let Some(&(_, prev_d)) = lines.last() {
            if prev_d.cross(d).abs() < 1e-12 {
                continue;
            }
        }
        lines.push((a + inward * r, d));
    }
    if lines.len() >= 2 && lines[0].1.cross(lines[lines.len() - 1].1).abs() < 1e-12 {
        lines.pop();
    }
    if lines.len() < 3 {
        return None;
    }
    let m = lines.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let (p1, d1) = lines[(i + m - 1) % m];
        let (p2, d2) = lines[i];
        let denom = d1.cross(d2);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = (p2 - p1).cross(d2) / denom;
        out.push(p1 + d1 * t);
    }
    let poly = Polygon::new(out).ok()?;
    poly.is_convex().then_some(poly)
}
