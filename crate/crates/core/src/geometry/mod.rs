//! Planar geometry primitives: vectors, segments, polygons, ray casting,
//! and visibility polygons over tagged occluder edges.

mod polygon;
mod vec2;
mod visibility;

pub use polygon::{clip_segment_to_convex, segment_polygon_intersections, Polygon, PolygonError};
pub use vec2::Vec2;
pub use visibility::{
    visibility_polygon, EdgeClass, OccluderEdge, SourceId, VisibilityError, VisibilityPolygon,
};

/// Length tolerance (meters) for point coincidence and containment tests.
pub const GEOM_EPS: f64 = 1e-9;

/// Angular offset (radians) applied on either side of endpoint rays during
/// the visibility sweep, and the general angular comparison tolerance.
pub const ANGLE_EPS: f64 = 1e-6;

/// A directed line segment.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn direction(&self) -> Vec2 {
        self.b - self.a
    }

    /// Point at parameter `t` in `[0, 1]`.
    pub fn at(&self, t: f64) -> Vec2 {
        self.a + (self.b - self.a) * t
    }

    pub fn midpoint(&self) -> Vec2 {
        self.at(0.5)
    }

    /// Distance from `p` to the closest point of the segment.
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        (p - self.closest_point(p)).norm()
    }

    /// Closest point of the segment to `p`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let e = self.b - self.a;
        let len2 = e.dot(e);
        if len2 <= GEOM_EPS * GEOM_EPS {
            return self.a;
        }
        let t = ((p - self.a).dot(e) / len2).clamp(0.0, 1.0);
        self.at(t)
    }
}

/// Distance from `p` to the ray `origin + t * dir`, `t >= 0`.
/// `dir` need not be normalized but must be nonzero.
pub fn point_to_ray_distance(p: Vec2, origin: Vec2, dir: Vec2) -> f64 {
    let d2 = dir.dot(dir);
    if d2 <= GEOM_EPS * GEOM_EPS {
        return (p - origin).norm();
    }
    let t = (p - origin).dot(dir) / d2;
    if t <= 0.0 {
        (p - origin).norm()
    } else {
        (p - (origin + dir * t)).norm()
    }
}

/// Intersection of the ray `origin + t * dir` (`t >= 0`) with a segment.
///
/// Returns `(t, u)` where `u` is the segment parameter in `[0, 1]`, or
/// `None` when the ray misses or runs parallel to the segment. Parallel
/// overlaps are reported as misses; the visibility sweep compensates by
/// casting offset rays around every endpoint.
pub fn ray_segment_intersection(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<(f64, f64)> {
    let e = seg.b - seg.a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-14 {
        return None;
    }
    let ao = seg.a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(dir) / denom;
    // Endpoint slack of ~1e-9 m along the segment.
    let u_eps = GEOM_EPS / e.norm().max(GEOM_EPS);
    if t >= -GEOM_EPS && (-u_eps..=1.0 + u_eps).contains(&u) {
        Some((t.max(0.0), u.clamp(0.0, 1.0)))
    } else {
        None
    }
}

/// Proper or touching intersection point of two segments, if any.
pub fn segment_segment_intersection(s1: &Segment, s2: &Segment) -> Option<Vec2> {
    let d1 = s1.direction();
    let d2 = s2.direction();
    let denom = d1.cross(d2);
    if denom.abs() < 1e-14 {
        return None;
    }
    let ao = s2.a - s1.a;
    let t = ao.cross(d2) / denom;
    let u = ao.cross(d1) / denom;
    let t_eps = GEOM_EPS / d1.norm().max(GEOM_EPS);
    let u_eps = GEOM_EPS / d2.norm().max(GEOM_EPS);
    if (-t_eps..=1.0 + t_eps).contains(&t) && (-u_eps..=1.0 + u_eps).contains(&u) {
        Some(s1.at(t.clamp(0.0, 1.0)))
    } else {
        None
    }
}
