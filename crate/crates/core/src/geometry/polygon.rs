use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{segment_segment_intersection, Segment, Vec2, GEOM_EPS};

#[derive(Debug, Error, PartialEq)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertices must be in counterclockwise order (signed area {0})")]
    NotCounterClockwise(f64),
    #[error("polygon edges {0} and {1} intersect; polygon must be simple")]
    SelfIntersecting(usize, usize),
    #[error("polygon has a degenerate (near-zero length) edge at index {0}")]
    DegenerateEdge(usize),
}

/// A simple polygon with counterclockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    /// Validates vertex count, winding, edge lengths, and simplicity.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, PolygonError> {
        if vertices.len() < 3 {
            return Err(PolygonError::TooFewVertices(vertices.len()));
        }
        let n = vertices.len();
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            if e.norm() < GEOM_EPS {
                return Err(PolygonError::DegenerateEdge(i));
            }
        }
        let poly = Self { vertices };
        let area = poly.signed_area();
        if area <= 0.0 {
            return Err(PolygonError::NotCounterClockwise(area));
        }
        // O(n^2) simplicity check; polygons here are small (walls, pillars).
        let edges: Vec<Segment> = poly.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segment_segment_intersection(&edges[i], &edges[j]).is_some() {
                    return Err(PolygonError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(poly)
    }

    /// Builds without validation. For internally-constructed loops (e.g.
    /// visibility polygons) that may contain micro edges by construction.
    pub(crate) fn from_loop_unchecked(vertices: Vec<Vec2>) -> Self {
        Self { vertices }
    }

    /// Axis-aligned rectangle from opposite corners.
    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self, PolygonError> {
        Self::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counterclockwise order.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        0.5 * acc
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut acc = Vec2::ZERO;
        let mut area6 = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a.cross(b);
            acc += (a + b) * w;
            area6 += w;
        }
        if area6.abs() < GEOM_EPS {
            // Degenerate loop: fall back to the vertex mean.
            let mut m = Vec2::ZERO;
            for v in &self.vertices {
                m += *v;
            }
            return m / n as f64;
        }
        acc / (3.0 * area6)
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices[1..] {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        (min, max)
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|e| e.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Containment including the boundary (within [`GEOM_EPS`]).
    pub fn contains(&self, p: Vec2) -> bool {
        if self.boundary_distance(p) <= GEOM_EPS {
            return true;
        }
        self.winding_contains(p)
    }

    /// Containment of the open interior: boundary points (within `tol`)
    /// are reported as outside.
    pub fn contains_strict(&self, p: Vec2, tol: f64) -> bool {
        if self.boundary_distance(p) <= tol {
            return false;
        }
        self.winding_contains(p)
    }

    /// Even-odd crossing test, robust to vertex-aligned rays by perturbing in y.
    fn winding_contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            // Half-open rule in y avoids double counting at shared vertices.
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when the polygon is convex (vertices are already CCW).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -GEOM_EPS
        })
    }
}

impl TryFrom<Vec<Vec2>> for Polygon {
    type Error = PolygonError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Vec2> {
    fn from(p: Polygon) -> Vec<Vec2> {
        p.vertices
    }
}

/// All intersection points of a segment with a polygon's boundary,
/// deduplicated and ordered along the segment.
pub fn segment_polygon_intersections(seg: &Segment, poly: &Polygon) -> Vec<Vec2> {
    let mut hits: Vec<(f64, Vec2)> = Vec::new();
    let dir = seg.direction();
    let len2 = dir.norm_squared().max(GEOM_EPS * GEOM_EPS);
    for edge in poly.edges() {
        if let Some(p) = segment_segment_intersection(seg, &edge) {
            let t = (p - seg.a).dot(dir) / len2;
            hits.push((t, p));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Vec2> = Vec::with_capacity(hits.len());
    for (_, p) in hits {
        if out.last().is_none_or(|q| (p - *q).norm() > 1e-7) {
            out.push(p);
        }
    }
    out
}

/// Clips a segment to a convex CCW polygon (inside = left of every edge).
/// Returns the clipped segment, or `None` when entirely outside.
pub fn clip_segment_to_convex(seg: &Segment, convex: &Polygon) -> Option<Segment> {
    debug_assert!(convex.is_convex());
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    let d = seg.direction();
    for edge in convex.edges() {
        let normal = edge.direction().perp(); // inward for CCW
        let denom = normal.dot(d);
        let dist = normal.dot(seg.a - edge.a);
        if denom.abs() < 1e-14 {
            if dist < -GEOM_EPS {
                return None; // parallel and outside this half-plane
            }
            continue;
        }
        let t = -dist / denom;
        if denom > 0.0 {
            t0 = t0.max(t); // entering
        } else {
            t1 = t1.min(t); // leaving
        }
        if t0 > t1 {
            return None;
        }
    }
    let clipped = Segment::new(seg.at(t0), seg.at(t1));
    if clipped.length() < GEOM_EPS {
        None
    } else {
        Some(clipped)
    }
}
