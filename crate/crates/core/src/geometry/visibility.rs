use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    clip_segment_to_convex, ray_segment_intersection, Polygon, Segment, Vec2, ANGLE_EPS, GEOM_EPS,
};

/// Identifier of the world feature (pillar, wall, ...) an occluder belongs to.
pub type SourceId = usize;

/// An opaque boundary segment tagged with the feature it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccluderEdge {
    pub seg: Segment,
    pub source: SourceId,
}

impl OccluderEdge {
    pub fn new(a: Vec2, b: Vec2, source: SourceId) -> Self {
        Self {
            seg: Segment::new(a, b),
            source,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VisibilityError {
    #[error("observer must lie strictly inside the window")]
    OriginOutsideWindow,
    #[error("observer lies on an occluder edge of source {0}")]
    OriginOnOccluder(SourceId),
    #[error("window polygon must be convex")]
    WindowNotConvex,
    #[error("visibility sweep degenerated to fewer than 3 vertices")]
    Degenerate,
}

/// Label of one edge of a visibility polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeClass {
    /// Lies on an occluder: a directly observed boundary of `source`.
    Boundary(SourceId),
    /// Lies on the window rim: space beyond sensing range.
    WindowArc,
    /// Radial occlusion edge between seen space and shadow.
    Frontier,
}

/// Star-shaped polygon of everything visible from one point, with each
/// edge labeled by what produced it.
#[derive(Debug, Clone)]
pub struct VisibilityPolygon {
    polygon: Polygon,
    /// `classes[i]` labels the edge from `vertices()[i]` to `vertices()[i+1]`.
    classes: Vec<EdgeClass>,
}

impl VisibilityPolygon {
    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn classes(&self) -> &[EdgeClass] {
        &self.classes
    }

    pub fn edges_with_class(&self) -> impl Iterator<Item = (Segment, EdgeClass)> + '_ {
        self.polygon.edges().zip(self.classes.iter().copied())
    }

    pub fn area(&self) -> f64 {
        self.polygon.area()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.polygon.contains(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HitTag {
    Occluder(usize),
    Window(usize),
}

/// Edges shorter than this produced by bracketing rays around a single
/// silhouette point are treated as junction slivers, not real edges.
const SLIVER_LEN: f64 = 1e-5;
/// A depth-jump edge must align with the sight ray within this angle to
/// count as a frontier; corner artifacts stretched along a grazing face
/// fail the test and resolve as slivers instead.
const RADIAL_TOL: f64 = 1e-3;
const MERGE_EPS: f64 = 1e-12;

fn normalize_angle(a: f64) -> f64 {
    let mut a = (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    if a >= std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Ray-segment intersection with an absolute endpoint slack `u_slack`,
/// used on window edges so corner rays can never escape the rim.
fn ray_seg_with_slack(origin: Vec2, dir: Vec2, seg: &Segment, u_slack: f64) -> Option<f64> {
    let e = seg.b - seg.a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-14 {
        return None;
    }
    let ao = seg.a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(dir) / denom;
    if t >= -GEOM_EPS && (-u_slack..=1.0 + u_slack).contains(&u) {
        Some(t.max(0.0))
    } else {
        None
    }
}

fn cast_ray(
    origin: Vec2,
    dir: Vec2,
    occluders: &[OccluderEdge],
    window: &Polygon,
) -> Option<(Vec2, HitTag)> {
    let mut best_t = f64::INFINITY;
    let mut best: Option<HitTag> = None;
    for (i, o) in occluders.iter().enumerate() {
        if let Some((t, _)) = ray_segment_intersection(origin, dir, &o.seg) {
            if t < best_t {
                best_t = t;
                best = Some(HitTag::Occluder(i));
            }
        }
    }
    for (i, edge) in window.edges().enumerate() {
        if let Some(t) = ray_seg_with_slack(origin, dir, &edge, 1e-6) {
            // Strict inequality: occluders lying on the rim win the tie and
            // classify as observed boundary rather than unknown space.
            if t < best_t - GEOM_EPS {
                best_t = t;
                best = Some(HitTag::Window(i));
            }
        }
    }
    best.map(|tag| (origin + dir * best_t, tag))
}

/// Computes the visibility polygon of `origin` inside a convex `window`
/// partially blocked by `occluders`, using an angular sweep with bracketing
/// rays at every silhouette candidate.
///
/// Edges of the result are classified by the *source tags* of the two rays
/// bounding them: rays landing on the same edge span observed boundary or
/// window rim, while a depth jump between different edges spans a radial
/// frontier. Junction slivers (length <= 1e-5) produced by the bracketing
/// offsets are glued into their neighbors or collapsed.
pub fn visibility_polygon(
    origin: Vec2,
    window: &Polygon,
    occluders: &[OccluderEdge],
) -> Result<VisibilityPolygon, VisibilityError> {
    if !window.is_convex() {
        return Err(VisibilityError::WindowNotConvex);
    }
    if !window.contains_strict(origin, GEOM_EPS) {
        return Err(VisibilityError::OriginOutsideWindow);
    }

    // Only the in-window portions of occluders matter.
    let clipped: Vec<OccluderEdge> = occluders
        .iter()
        .filter_map(|o| {
            clip_segment_to_convex(&o.seg, window).map(|seg| OccluderEdge {
                seg,
                source: o.source,
            })
        })
        .collect();
    for o in &clipped {
        if o.seg.distance_to_point(origin) <= GEOM_EPS {
            return Err(VisibilityError::OriginOnOccluder(o.source));
        }
    }

    // Candidate ray angles: all endpoints, bracketed on both sides so the
    // sweep observes the scene just before and just after each silhouette.
    let mut angles: Vec<f64> =
        Vec::with_capacity((clipped.len() * 2 + window.vertices().len()) * 3);
    {
        let mut push = |p: Vec2| {
            let d = p - origin;
            if d.norm() <= GEOM_EPS {
                return;
            }
            let a = d.angle();
            for off in [-ANGLE_EPS, 0.0, ANGLE_EPS] {
                angles.push(normalize_angle(a + off));
            }
        };
        for o in &clipped {
            push(o.seg.a);
            push(o.seg.b);
        }
        for &v in window.vertices() {
            push(v);
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < MERGE_EPS);

    let mut hits: Vec<(Vec2, HitTag)> = Vec::with_capacity(angles.len());
    for &a in &angles {
        if let Some(hit) = cast_ray(origin, Vec2::from_angle(a), &clipped, window) {
            if hits
                .last()
                .is_none_or(|(q, _)| (hit.0 - *q).norm() > MERGE_EPS)
            {
                hits.push(hit);
            }
        }
    }
    while hits.len() > 1 && (hits[0].0 - hits.last().unwrap().0).norm() <= MERGE_EPS {
        hits.pop();
    }
    if hits.len() < 3 {
        return Err(VisibilityError::Degenerate);
    }

    // First pass: label edges by the tags of their bounding rays.
    #[derive(Clone, Copy, PartialEq)]
    enum Raw {
        Done(EdgeClass),
        Sliver,
    }
    let n = hits.len();
    let raw: Vec<Raw> = (0..n)
        .map(|i| {
            let (p, ta) = hits[i];
            let (q, tb) = hits[(i + 1) % n];
            if ta == tb {
                Raw::Done(match ta {
                    HitTag::Occluder(k) => EdgeClass::Boundary(clipped[k].source),
                    HitTag::Window(_) => EdgeClass::WindowArc,
                })
            } else {
                let dir = (q - p).try_normalize(GEOM_EPS);
                let ray = ((p + q) * 0.5 - origin).try_normalize(GEOM_EPS);
                match (dir, ray) {
                    (Some(d), Some(r))
                        if (q - p).norm() > SLIVER_LEN && d.cross(r).abs() <= RADIAL_TOL =>
                    {
                        Raw::Done(EdgeClass::Frontier)
                    }
                    _ => Raw::Sliver,
                }
            }
        })
        .collect();
    if raw.iter().all(|r| matches!(r, Raw::Sliver)) {
        return Err(VisibilityError::Degenerate);
    }

    // Second pass: glue slivers whose neighbors agree, drop the rest.
    let resolved: Vec<Option<EdgeClass>> = (0..n)
        .map(|i| match raw[i] {
            Raw::Done(c) => Some(c),
            Raw::Sliver => {
                let mut j = (i + n - 1) % n;
                while matches!(raw[j], Raw::Sliver) {
                    j = (j + n - 1) % n;
                }
                let mut k = (i + 1) % n;
                while matches!(raw[k], Raw::Sliver) {
                    k = (k + 1) % n;
                }
                match (raw[j], raw[k]) {
                    (Raw::Done(cp), Raw::Done(cn)) if cp == cn => Some(cp),
                    _ => None,
                }
            }
        })
        .collect();

    // Rebuild the loop, skipping dropped junction edges. Each kept edge
    // contributes its start vertex; absorbed junctions shift a neighbor
    // endpoint by at most SLIVER_LEN.
    let start = resolved
        .iter()
        .position(|c| c.is_some())
        .ok_or(VisibilityError::Degenerate)?;
    let mut verts: Vec<Vec2> = Vec::with_capacity(n);
    let mut classes: Vec<EdgeClass> = Vec::with_capacity(n);
    for step in 0..n {
        let i = (start + step) % n;
        let Some(c) = resolved[i] else { continue };
        let p = hits[i].0;
        if let Some(q) = verts.last() {
            if (p - *q).norm() <= MERGE_EPS {
                // Coincident start: this edge supersedes the zero-length one.
                *classes.last_mut().expect("class per vertex") = c;
                continue;
            }
        }
        verts.push(p);
        classes.push(c);
    }
    if verts.len() > 2 && (verts[0] - *verts.last().unwrap()).norm() <= MERGE_EPS {
        verts.pop();
        classes.pop();
    }
    if verts.len() < 3 {
        return Err(VisibilityError::Degenerate);
    }

    let polygon = Polygon::from_loop_unchecked(verts);
    if polygon.signed_area() <= 0.0 {
        return Err(VisibilityError::Degenerate);
    }
    Ok(VisibilityPolygon { polygon, classes })
}
