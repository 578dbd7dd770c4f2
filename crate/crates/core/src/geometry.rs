//! Geometric primitives for 2D polygonal structures.
//!
//! Everything here is a pure function of its inputs: measures, rigid
//! transforms, intersection predicates and the boundary chamfer distance.
//! Predicates use exact-sign orientation tests with a small tolerance
//! (`EPS_POINT`) for collinear and coincident cases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for coincident-vertex detection and collinearity, in domain units.
pub const EPS_POINT: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("containment is only defined for closed polygons")]
    OpenPolygonContainment,
    #[error("structure has no polygons")]
    EmptyStructure,
}

/// A point in the 2D design plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

// Points travel over the wire as bare `[x, y]` pairs.
impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.x, self.y).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(f64, f64)>::deserialize(d)?;
        Ok(Point { x, y })
    }
}

/// Open polygons are polylines; closed polygons have an implicit closing edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolygonKind {
    Open,
    Closed,
}

/// An ordered vertex list, open or closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
    pub kind: PolygonKind,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>, kind: PolygonKind) -> Self {
        Self { vertices, kind }
    }

    pub fn open(vertices: Vec<Point>) -> Self {
        Self::new(vertices, PolygonKind::Open)
    }

    pub fn closed(vertices: Vec<Point>) -> Self {
        Self::new(vertices, PolygonKind::Closed)
    }

    /// Edges in vertex order; for closed polygons this includes the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        let count = match self.kind {
            PolygonKind::Open => n.saturating_sub(1),
            PolygonKind::Closed => {
                if n < 2 {
                    0
                } else {
                    n
                }
            }
        };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

/// A candidate design: a set of polygons.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Structure {
    pub polygons: Vec<Polygon>,
}

impl Structure {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        Self { polygons }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.polygons.iter().map(polygon_length).sum()
    }
}

/// Axis-aligned bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.distance(self.max)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Bounding box of a vertex list. Panics on an empty list.
    pub fn around(points: &[Point]) -> Rect {
        assert!(!points.is_empty(), "bounding box of no points");
        let mut r = Rect {
            min: points[0],
            max: points[0],
        };
        for p in points {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        r
    }
}

/// Path length of a polygon; closed polygons include the closing segment.
pub fn polygon_length(poly: &Polygon) -> f64 {
    poly.edges().map(|(a, b)| a.distance(b)).sum()
}

/// Vertex mean. Used as the center of mass by the rotation operator.
pub fn polygon_centroid(poly: &Polygon) -> Point {
    let n = poly.vertices.len() as f64;
    let (sx, sy) = poly
        .vertices
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Rotate every vertex by `angle_deg` about the polygon's vertex mean.
pub fn rotate_polygon(poly: &Polygon, angle_deg: f64) -> Polygon {
    let c = polygon_centroid(poly);
    let rad = angle_deg.to_radians();
    let (sin, cos) = rad.sin_cos();
    let vertices = poly
        .vertices
        .iter()
        .map(|p| {
            let dx = p.x - c.x;
            let dy = p.y - c.y;
            Point::new(c.x + dx * cos - dy * sin, c.y + dx * sin + dy * cos)
        })
        .collect();
    Polygon::new(vertices, poly.kind)
}

/// Translate every vertex by (dx, dy).
pub fn translate_polygon(poly: &Polygon, dx: f64, dy: f64) -> Polygon {
    let vertices = poly
        .vertices
        .iter()
        .map(|p| Point::new(p.x + dx, p.y + dy))
        .collect();
    Polygon::new(vertices, poly.kind)
}

/// Scale every vertex about the polygon's vertex mean. Not part of the
/// default mutation set; available for custom operators.
pub fn scale_polygon(poly: &Polygon, factor: f64) -> Polygon {
    let c = polygon_centroid(poly);
    let vertices = poly
        .vertices
        .iter()
        .map(|p| Point::new(c.x + (p.x - c.x) * factor, c.y + (p.y - c.y) * factor))
        .collect();
    Polygon::new(vertices, poly.kind)
}

/// Signed orientation of (a, b, c): > 0 counter-clockwise, < 0 clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn orient_sign(a: Point, b: Point, c: Point) -> i8 {
    let v = orient(a, b, c);
    // The raw cross product scales with squared extent, so the collinearity
    // cutoff is scaled by the segment extents.
    let scale = (b.x - a.x).abs().max((b.y - a.y).abs()) + (c.x - a.x).abs().max((c.y - a.y).abs());
    let tol = EPS_POINT * scale.max(1.0);
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

fn in_range(v: f64, a: f64, b: f64) -> bool {
    v >= a.min(b) - EPS_POINT && v <= a.max(b) + EPS_POINT
}

/// True when `p` lies on segment (a, b), endpoints included.
pub fn point_on_segment(p: Point, a: Point, b: Point) -> bool {
    orient_sign(a, b, p) == 0 && in_range(p.x, a.x, b.x) && in_range(p.y, a.y, b.y)
}

/// Segment intersection test; touching at a single point counts.
pub fn segments_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let d1 = orient_sign(b1, b2, a1);
    let d2 = orient_sign(b1, b2, a2);
    let d3 = orient_sign(a1, a2, b1);
    let d4 = orient_sign(a1, a2, b2);

    if d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0 {
        return true;
    }
    // Collinear or endpoint-touching cases.
    (d1 == 0 && point_on_segment(a1, b1, b2))
        || (d2 == 0 && point_on_segment(a2, b1, b2))
        || (d3 == 0 && point_on_segment(b1, a1, a2))
        || (d4 == 0 && point_on_segment(b2, a1, a2))
}

/// Distance from `p` to segment (a, b).
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    p.distance(closest_point_on_segment(p, a, b))
}

/// Nearest point on segment (a, b) to `p`.
pub fn closest_point_on_segment(p: Point, a: Point, b: Point) -> Point {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return a;
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    Point::new(a.x + t * abx, a.y + t * aby)
}

/// Distance from `p` to the polygon boundary (edges only).
pub fn point_polygon_distance(p: Point, poly: &Polygon) -> f64 {
    poly.edges()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Ray/segment intersection: parameter t >= 0 along the ray, if any.
pub fn ray_segment_hit(origin: Point, dir: Point, a: Point, b: Point) -> Option<f64> {
    let sx = b.x - a.x;
    let sy = b.y - a.y;
    let denom = dir.x * sy - dir.y * sx;
    if denom.abs() < 1e-15 {
        return None; // parallel; grazing hits do not affect the counts we take
    }
    let qx = a.x - origin.x;
    let qy = a.y - origin.y;
    let t = (qx * sy - qy * sx) / denom;
    let u = (qx * dir.y - qy * dir.x) / denom;
    if t >= 0.0 && (-EPS_POINT..=1.0 + EPS_POINT).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// True iff no two non-adjacent edges intersect. Degenerate polygons
/// (coincident consecutive vertices) are reported as non-simple.
pub fn is_simple(poly: &Polygon) -> bool {
    let verts = &poly.vertices;
    let n = verts.len();
    for (i, &v) in verts.iter().enumerate() {
        let next = verts[(i + 1) % n];
        let is_closing = i + 1 == n;
        if (!is_closing || poly.kind == PolygonKind::Closed) && v.distance(next) < EPS_POINT {
            return false;
        }
    }

    let edges: Vec<(Point, Point)> = poly.edges().collect();
    let m = edges.len();
    let closed = poly.kind == PolygonKind::Closed;
    for i in 0..m {
        for j in (i + 2)..m {
            // Adjacent pairs share a vertex; in a closed ring the first and
            // last edges are adjacent too.
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            let (a1, a2) = edges[i];
            let (b1, b2) = edges[j];
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Boundary-inclusive containment test for closed polygons.
pub fn point_in_polygon(p: Point, poly: &Polygon) -> Result<bool, GeometryError> {
    if poly.kind != PolygonKind::Closed {
        return Err(GeometryError::OpenPolygonContainment);
    }
    Ok(point_in_closed_ring(p, &poly.vertices))
}

/// Even-odd ray crossing over a closed vertex ring; boundary counts as inside.
pub(crate) fn point_in_closed_ring(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    for i in 0..n {
        if point_on_segment(p, ring[i], ring[(i + 1) % n]) {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        // Half-open rule on y so shared vertices are counted once.
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if x_cross > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// True when the polygons' boundaries intersect or one closed polygon
/// contains the other. Single-point contact counts as intersection.
pub fn polygons_intersect(a: &Polygon, b: &Polygon) -> bool {
    for (a1, a2) in a.edges() {
        for (b1, b2) in b.edges() {
            if segments_intersect(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    // Disjoint boundaries: containment is all-or-nothing per polygon.
    if a.kind == PolygonKind::Closed
        && !b.vertices.is_empty()
        && point_in_closed_ring(b.vertices[0], &a.vertices)
    {
        return true;
    }
    if b.kind == PolygonKind::Closed
        && !a.vertices.is_empty()
        && point_in_closed_ring(a.vertices[0], &b.vertices)
    {
        return true;
    }
    false
}

/// Minimum number of boundary samples allotted to each polygon when
/// resampling for the chamfer distance.
const MIN_SAMPLES_PER_POLYGON: usize = 8;

/// Resample a polygon boundary into `n` equally spaced points by arclength.
/// Closed boundaries are sampled around the loop; open ones include both ends.
pub fn resample_polygon(poly: &Polygon, n: usize) -> Vec<Point> {
    assert!(n >= 2, "resampling needs at least two points");
    let segs: Vec<(Point, Point)> = poly.edges().collect();
    let total: f64 = segs.iter().map(|(a, b)| a.distance(*b)).sum();
    if total < EPS_POINT || segs.is_empty() {
        return vec![poly.vertices[0]; n];
    }
    let step = match poly.kind {
        PolygonKind::Closed => total / n as f64,
        PolygonKind::Open => total / (n - 1) as f64,
    };

    let mut out = Vec::with_capacity(n);
    let mut seg_idx = 0;
    let mut seg_start = 0.0; // arclength at the start of segs[seg_idx]
    for k in 0..n {
        let target = (k as f64 * step).min(total);
        loop {
            let (a, b) = segs[seg_idx];
            let len = a.distance(b);
            if target <= seg_start + len || seg_idx + 1 == segs.len() {
                let t = if len > 0.0 {
                    ((target - seg_start) / len).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
                break;
            }
            seg_start += len;
            seg_idx += 1;
        }
    }
    out
}

/// Resample all polygon boundaries of a structure into one point set of
/// (approximately) `samples` points, allocated proportionally to length.
pub fn resample_structure(s: &Structure, samples: usize) -> Result<Vec<Point>, GeometryError> {
    if s.is_empty() {
        return Err(GeometryError::EmptyStructure);
    }
    let lengths: Vec<f64> = s.polygons.iter().map(polygon_length).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(samples);
    for (poly, len) in s.polygons.iter().zip(&lengths) {
        let share = if total > 0.0 {
            (samples as f64 * len / total).round() as usize
        } else {
            samples / s.polygons.len()
        };
        let n = share.max(MIN_SAMPLES_PER_POLYGON);
        out.extend(resample_polygon(poly, n));
    }
    Ok(out)
}

/// Symmetric mean nearest-neighbor distance between the resampled
/// boundaries of two structures.
pub fn chamfer_distance(
    a: &Structure,
    b: &Structure,
    samples_per_structure: usize,
) -> Result<f64, GeometryError> {
    assert!(
        samples_per_structure >= 16,
        "chamfer resampling needs at least 16 samples"
    );
    let pa = resample_structure(a, samples_per_structure)?;
    let pb = resample_structure(b, samples_per_structure)?;
    Ok(0.5 * (mean_nearest(&pa, &pb) + mean_nearest(&pb, &pa)))
}

fn mean_nearest(from: &[Point], to: &[Point]) -> f64 {
    let sum: f64 = from
        .iter()
        .map(|p| {
            to.iter()
                .map(|q| p.distance(*q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    sum / from.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> Polygon {
        Polygon::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
    }

    fn bowtie() -> Polygon {
        Polygon::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
    }

    #[test]
    fn length_unit_square_perimeter() {
        assert_eq!(polygon_length(&unit_square()), 4.0);
    }

    #[test]
    fn length_open_hypotenuse() {
        let p = Polygon::open(vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)]);
        assert_eq!(polygon_length(&p), 5.0);
    }

    #[test]
    fn length_collinear_polyline() {
        let p = Polygon::open(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ]);
        assert_eq!(polygon_length(&p), 2.0);
    }

    #[test]
    fn centroid_unit_square() {
        let c = polygon_centroid(&unit_square());
        assert_eq!((c.x, c.y), (0.5, 0.5));
    }

    #[test]
    fn centroid_segment_midpoint() {
        let p = Polygon::open(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)]);
        let c = polygon_centroid(&p);
        assert_eq!((c.x, c.y), (1.0, 0.0));
    }

    #[test]
    fn centroid_triangle_vertex_mean() {
        let p = Polygon::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(0.0, 3.0),
        ]);
        let c = polygon_centroid(&p);
        assert_eq!((c.x, c.y), (1.0, 1.0));
    }

    #[test]
    fn rotate_square_quarter_turn_is_vertex_permutation() {
        let sq = unit_square();
        let rot = rotate_polygon(&sq, 90.0);
        for v in &rot.vertices {
            assert!(
                sq.vertices.iter().any(|u| u.distance(*v) < 1e-9),
                "rotated vertex {v:?} not in original set"
            );
        }
    }

    #[test]
    fn rotate_zero_is_identity() {
        let sq = unit_square();
        let rot = rotate_polygon(&sq, 0.0);
        for (a, b) in sq.vertices.iter().zip(&rot.vertices) {
            assert!(a.distance(*b) < 1e-12);
        }
    }

    #[test]
    fn scale_doubles_length_and_keeps_centroid() {
        let sq = unit_square();
        let scaled = scale_polygon(&sq, 2.0);
        assert!((polygon_length(&scaled) - 8.0).abs() < 1e-12);
        let c = polygon_centroid(&scaled);
        assert!(c.distance(Point::new(0.5, 0.5)) < 1e-12);
    }

    #[test]
    fn rotate_segment_half_turn_reflects_endpoints() {
        let seg = Polygon::open(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)]);
        let rot = rotate_polygon(&seg, 180.0);
        assert!(rot.vertices[0].distance(Point::new(2.0, 0.0)) < 1e-9);
        assert!(rot.vertices[1].distance(Point::new(0.0, 0.0)) < 1e-9);
    }

    #[test]
    fn simple_square_and_polyline() {
        assert!(is_simple(&unit_square()));
        let line = Polygon::open(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ]);
        assert!(is_simple(&line));
    }

    #[test]
    fn bowtie_is_not_simple() {
        assert!(!is_simple(&bowtie()));
    }

    #[test]
    fn duplicate_vertex_is_not_simple() {
        let p = Polygon::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
        ]);
        assert!(!is_simple(&p));
    }

    #[test]
    fn containment_basic() {
        let sq = unit_square();
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq).unwrap());
        assert!(!point_in_polygon(Point::new(2.0, 2.0), &sq).unwrap());
        // Boundary counts as inside.
        assert!(point_in_polygon(Point::new(0.0, 0.5), &sq).unwrap());
    }

    #[test]
    fn containment_rejects_open_polygon() {
        let line = Polygon::open(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]);
        assert_eq!(
            point_in_polygon(Point::new(0.5, 0.0), &line),
            Err(GeometryError::OpenPolygonContainment)
        );
    }

    #[test]
    fn intersect_overlapping_and_disjoint_squares() {
        let a = unit_square();
        let b = translate_polygon(&a, 0.5, 0.0);
        let c = translate_polygon(&a, 5.0, 0.0);
        assert!(polygons_intersect(&a, &b));
        assert!(!polygons_intersect(&a, &c));
    }

    #[test]
    fn intersect_single_shared_vertex_counts() {
        let a = unit_square();
        let b = translate_polygon(&a, 1.0, 1.0); // touches a only at (1,1)
        assert!(polygons_intersect(&a, &b));
    }

    #[test]
    fn intersect_nested_squares() {
        let outer = unit_square();
        let inner = Polygon::closed(vec![
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.75, 0.75),
            Point::new(0.25, 0.75),
        ]);
        assert!(polygons_intersect(&outer, &inner));
    }

    #[test]
    fn chamfer_identical_is_zero() {
        let s = Structure::new(vec![unit_square()]);
        assert_eq!(chamfer_distance(&s, &s, 64).unwrap(), 0.0);
    }

    #[test]
    fn chamfer_empty_structure_errors() {
        let s = Structure::new(vec![unit_square()]);
        let empty = Structure::default();
        assert_eq!(
            chamfer_distance(&s, &empty, 64),
            Err(GeometryError::EmptyStructure)
        );
    }

    /// Brute-force oracle: identical resampling, all-pairs nearest neighbor.
    fn chamfer_oracle(a: &Structure, b: &Structure, samples: usize) -> f64 {
        let pa = resample_structure(a, samples).unwrap();
        let pb = resample_structure(b, samples).unwrap();
        let mean = |from: &[Point], to: &[Point]| {
            from.iter()
                .map(|p| {
                    to.iter()
                        .map(|q| ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt())
                        .fold(f64::INFINITY, f64::min)
                })
                .sum::<f64>()
                / from.len() as f64
        };
        0.5 * (mean(&pa, &pb) + mean(&pb, &pa))
    }

    #[test]
    fn chamfer_translated_square_matches_bruteforce() {
        let a = Structure::new(vec![unit_square()]);
        let b = Structure::new(vec![translate_polygon(&unit_square(), 10.0, 0.0)]);
        let got = chamfer_distance(&a, &b, 200).unwrap();
        let want = chamfer_oracle(&a, &b, 200);
        assert!((got - want).abs() < 1e-9, "got {got}, oracle {want}");
        // Far-apart squares: every nearest distance is close to the offset.
        assert!(got > 9.0 && got < 11.0);
    }

    #[test]
    fn resample_open_includes_both_endpoints() {
        let line = Polygon::open(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]);
        let pts = resample_polygon(&line, 5);
        assert_eq!(pts.len(), 5);
        assert!(pts[0].distance(Point::new(0.0, 0.0)) < 1e-12);
        assert!(pts[4].distance(Point::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn ray_hits_segment() {
        let t = ray_segment_hit(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, -1.0),
            Point::new(2.0, 1.0),
        );
        assert!((t.unwrap() - 2.0).abs() < 1e-12);
        let miss = ray_segment_hit(
            Point::new(0.0, 0.0),
            Point::new(-1.0, 0.0),
            Point::new(2.0, -1.0),
            Point::new(2.0, 1.0),
        );
        assert!(miss.is_none());
    }

    // ---- oracles ---------------------------------------------------------

    /// O(E^2) all-pairs brute force over non-adjacent edge pairs.
    fn is_simple_oracle(poly: &Polygon) -> bool {
        let verts = &poly.vertices;
        let n = verts.len();
        for (i, &v) in verts.iter().enumerate() {
            let next = verts[(i + 1) % n];
            let closing = i + 1 == n;
            if (!closing || poly.kind == PolygonKind::Closed) && v.distance(next) < EPS_POINT {
                return false;
            }
        }
        let edges: Vec<(Point, Point)> = poly.edges().collect();
        let closed = poly.kind == PolygonKind::Closed;
        for i in 0..edges.len() {
            for j in 0..edges.len() {
                if j <= i + 1 || (closed && i == 0 && j == edges.len() - 1) {
                    continue;
                }
                if segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return false;
                }
            }
        }
        true
    }

    /// Winding-number containment oracle (boundary handled separately).
    fn winding_oracle(p: Point, ring: &[Point]) -> bool {
        let n = ring.len();
        for i in 0..n {
            if point_on_segment(p, ring[i], ring[(i + 1) % n]) {
                return true;
            }
        }
        let mut winding = 0i32;
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            if a.y <= p.y {
                if b.y > p.y && orient(a, b, p) > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && orient(a, b, p) < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }

    /// Deterministic pseudo-random polygon with up to 12 vertices.
    fn arbitrary_polygon(seed: u64) -> Polygon {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 3 + (next() * 10.0) as usize; // 3..=12
        let kind = if next() < 0.5 {
            PolygonKind::Open
        } else {
            PolygonKind::Closed
        };
        let vertices = (0..n)
            .map(|_| Point::new(next() * 10.0 - 5.0, next() * 10.0 - 5.0))
            .collect();
        Polygon::new(vertices, kind)
    }

    /// Convex ring: points on a circle sorted by angle.
    fn convex_ring(seed: u64) -> Vec<Point> {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(7);
        let mut next = move || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 3 + (next() * 6.0) as usize;
        let radius = 0.5 + next() * 1.5;
        let mut angles: Vec<f64> = (0..n).map(|_| next() * std::f64::consts::TAU).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        while angles.len() < 3 {
            let last = *angles.last().unwrap();
            angles.push(last + 0.5);
        }
        angles
            .iter()
            .map(|t| Point::new(radius * t.cos(), radius * t.sin()))
            .collect()
    }

    proptest! {
        #[test]
        fn rotation_preserves_length(angle in -360.0..360.0f64, seed in 0u64..1000) {
            let poly = arbitrary_polygon(seed);
            let rotated = rotate_polygon(&poly, angle);
            prop_assert!((polygon_length(&poly) - polygon_length(&rotated)).abs() < 1e-9);
        }

        #[test]
        fn rotation_round_trip(angle in -180.0..180.0f64, seed in 0u64..1000) {
            let poly = arbitrary_polygon(seed);
            let back = rotate_polygon(&rotate_polygon(&poly, angle), -angle);
            for (a, b) in poly.vertices.iter().zip(&back.vertices) {
                prop_assert!(a.distance(*b) < 1e-9);
            }
        }

        #[test]
        fn chamfer_symmetric_and_zero_on_self(sa in 0u64..500, sb in 0u64..500) {
            let a = Structure::new(vec![arbitrary_polygon(sa)]);
            let b = Structure::new(vec![arbitrary_polygon(sb)]);
            let dab = chamfer_distance(&a, &b, 32).unwrap();
            let dba = chamfer_distance(&b, &a, 32).unwrap();
            prop_assert!((dab - dba).abs() < 1e-12);
            prop_assert!(dab >= 0.0);
            prop_assert_eq!(chamfer_distance(&a, &a, 32).unwrap(), 0.0);
        }

        #[test]
        fn is_simple_matches_bruteforce(seed in 0u64..2000) {
            let poly = arbitrary_polygon(seed);
            prop_assert_eq!(is_simple(&poly), is_simple_oracle(&poly));
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn containment_matches_winding_oracle(seed in 0u64..1000, px in -2.0..2.0f64, py in -2.0..2.0f64) {
            let ring = convex_ring(seed);
            let p = Point::new(px, py);
            prop_assert_eq!(point_in_closed_ring(p, &ring), winding_oracle(p, &ring));
        }
    }
}
