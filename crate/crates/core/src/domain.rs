//! Problem geometry: the allowed area, prohibited elements, target points,
//! and the constraint identification function with repair.
//!
//! `validate` reports every violation of a structure against a domain;
//! `postprocess` applies a fixed sequence of repair rules until the
//! structure validates or a round limit is hit.

use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    closest_point_on_segment, is_simple, point_in_closed_ring, point_polygon_distance,
    polygon_centroid, polygon_length, polygons_intersect, translate_polygon, Point, Polygon,
    PolygonKind, Rect, Structure, EPS_POINT,
};

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("allowed area must be a simple closed polygon with >= 3 vertices")]
    BadAllowedArea,
    #[error("prohibited element {0} must be simple, closed and inside the allowed area")]
    BadProhibited(usize),
    #[error("point limits must satisfy 2 <= min_points <= max_points (>= 3 for closed polygons)")]
    BadPointLimits,
    #[error("polygon limits must satisfy 1 <= min_polygons <= max_polygons")]
    BadPolygonLimits,
}

/// Repair gave up: the structure still fails validation after the
/// maximum number of repair rounds.
#[derive(Debug, Error, PartialEq)]
#[error("structure could not be repaired within {rounds} rounds")]
pub struct RepairFailed {
    pub rounds: usize,
}

pub const DEFAULT_MAX_REPAIR_ROUNDS: usize = 10;

/// The optimization domain: where structures may live and in what shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Domain {
    allowed_area: Polygon,
    prohibited: Vec<Polygon>,
    targets: Vec<Point>,
    min_points: usize,
    max_points: usize,
    min_polygons: usize,
    max_polygons: usize,
    polygon_kind: PolygonKind,
}

impl Domain {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        allowed_area: Polygon,
        prohibited: Vec<Polygon>,
        targets: Vec<Point>,
        min_points: usize,
        max_points: usize,
        min_polygons: usize,
        max_polygons: usize,
        polygon_kind: PolygonKind,
    ) -> Result<Self, DomainError> {
        if allowed_area.kind != PolygonKind::Closed
            || allowed_area.vertices.len() < 3
            || !is_simple(&allowed_area)
        {
            return Err(DomainError::BadAllowedArea);
        }
        for (i, p) in prohibited.iter().enumerate() {
            let inside = p.kind == PolygonKind::Closed
                && p.vertices.len() >= 3
                && is_simple(p)
                && p.vertices
                    .iter()
                    .all(|v| point_in_closed_ring(*v, &allowed_area.vertices));
            if !inside {
                return Err(DomainError::BadProhibited(i));
            }
        }
        let min_for_kind = match polygon_kind {
            PolygonKind::Closed => 3,
            PolygonKind::Open => 2,
        };
        if min_points < min_for_kind || min_points > max_points {
            return Err(DomainError::BadPointLimits);
        }
        if min_polygons < 1 || min_polygons > max_polygons {
            return Err(DomainError::BadPolygonLimits);
        }
        Ok(Self {
            allowed_area,
            prohibited,
            targets,
            min_points,
            max_points,
            min_polygons,
            max_polygons,
            polygon_kind,
        })
    }

    /// Rectangular domain (0, 0) to (w, h) with no prohibited elements.
    pub fn rectangular(
        w: f64,
        h: f64,
        min_points: usize,
        max_points: usize,
        min_polygons: usize,
        max_polygons: usize,
        polygon_kind: PolygonKind,
    ) -> Result<Self, DomainError> {
        let area = Polygon::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(w, 0.0),
            Point::new(w, h),
            Point::new(0.0, h),
        ]);
        Self::new(
            area,
            vec![],
            vec![],
            min_points,
            max_points,
            min_polygons,
            max_polygons,
            polygon_kind,
        )
    }

    pub fn allowed_area(&self) -> &Polygon {
        &self.allowed_area
    }

    pub fn prohibited(&self) -> &[Polygon] {
        &self.prohibited
    }

    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    pub fn set_targets(&mut self, targets: Vec<Point>) {
        self.targets = targets;
    }

    pub fn add_prohibited(&mut self, poly: Polygon) -> Result<(), DomainError> {
        let idx = self.prohibited.len();
        let ok = poly.kind == PolygonKind::Closed
            && poly.vertices.len() >= 3
            && is_simple(&poly)
            && poly
                .vertices
                .iter()
                .all(|v| point_in_closed_ring(*v, &self.allowed_area.vertices));
        if !ok {
            return Err(DomainError::BadProhibited(idx));
        }
        self.prohibited.push(poly);
        Ok(())
    }

    pub fn min_points(&self) -> usize {
        self.min_points
    }

    pub fn max_points(&self) -> usize {
        self.max_points
    }

    pub fn min_polygons(&self) -> usize {
        self.min_polygons
    }

    pub fn max_polygons(&self) -> usize {
        self.max_polygons
    }

    pub fn polygon_kind(&self) -> PolygonKind {
        self.polygon_kind
    }

    /// Bounding rectangle of the allowed area.
    pub fn bounding_rect(&self) -> Rect {
        Rect::around(&self.allowed_area.vertices)
    }

    /// Diagonal of the allowed-area bounding box; the scale unit for
    /// displacement magnitudes and normalized distances.
    pub fn diagonal(&self) -> f64 {
        self.bounding_rect().diagonal()
    }

    /// True when `p` lies in the optimization domain proper: inside the
    /// allowed area and not inside any prohibited element.
    pub fn contains_free(&self, p: Point) -> bool {
        point_in_closed_ring(p, &self.allowed_area.vertices)
            && !self
                .prohibited
                .iter()
                .any(|pr| point_in_closed_ring(p, &pr.vertices))
    }

    /// True when the disk (center, radius) lies fully inside the allowed
    /// area and clear of prohibited elements and the given polygons.
    pub fn disk_is_free(&self, center: Point, radius: f64, existing: &[Polygon]) -> bool {
        if !point_in_closed_ring(center, &self.allowed_area.vertices) {
            return false;
        }
        if point_polygon_distance(center, &self.allowed_area) < radius {
            return false;
        }
        for pr in &self.prohibited {
            if point_in_closed_ring(center, &pr.vertices)
                || point_polygon_distance(center, pr) <= radius
            {
                return false;
            }
        }
        for poly in existing {
            if point_polygon_distance(center, poly) <= radius {
                return false;
            }
            if poly.kind == PolygonKind::Closed && point_in_closed_ring(center, &poly.vertices) {
                return false;
            }
        }
        true
    }
}

/// A single constraint violation, with the indices of the offending polygons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfBounds { polygon: usize },
    SelfIntersection { polygon: usize },
    MutualIntersection { first: usize, second: usize },
    ProhibitedIntersection { polygon: usize, prohibited: usize },
    TooFewPoints { polygon: usize },
    TooManyPoints { polygon: usize },
    PolygonCountViolation,
}

/// Outcome of the constraint identification function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check a structure against a domain, reporting every violation.
pub fn validate(s: &Structure, d: &Domain) -> ValidationReport {
    let mut violations = Vec::new();
    let ring = &d.allowed_area().vertices;

    for (i, poly) in s.polygons.iter().enumerate() {
        if poly
            .vertices
            .iter()
            .any(|v| !v.is_finite() || !point_in_closed_ring(*v, ring))
        {
            violations.push(Violation::OutOfBounds { polygon: i });
        }
    }
    for (i, poly) in s.polygons.iter().enumerate() {
        if !is_simple(poly) {
            violations.push(Violation::SelfIntersection { polygon: i });
        }
    }
    for i in 0..s.polygons.len() {
        for j in (i + 1)..s.polygons.len() {
            if polygons_intersect(&s.polygons[i], &s.polygons[j]) {
                violations.push(Violation::MutualIntersection {
                    first: i,
                    second: j,
                });
            }
        }
    }
    for (i, poly) in s.polygons.iter().enumerate() {
        for (k, pr) in d.prohibited().iter().enumerate() {
            if polygons_intersect(poly, pr) {
                violations.push(Violation::ProhibitedIntersection {
                    polygon: i,
                    prohibited: k,
                });
            }
        }
    }
    for (i, poly) in s.polygons.iter().enumerate() {
        if poly.vertices.len() < d.min_points() {
            violations.push(Violation::TooFewPoints { polygon: i });
        } else if poly.vertices.len() > d.max_points() {
            violations.push(Violation::TooManyPoints { polygon: i });
        }
    }
    if s.polygons.len() < d.min_polygons() || s.polygons.len() > d.max_polygons() {
        violations.push(Violation::PolygonCountViolation);
    }

    ValidationReport { violations }
}

/// Repair a structure into validity, or fail after `DEFAULT_MAX_REPAIR_ROUNDS`.
///
/// Rules are applied in a fixed order each round: (1) clamp out-of-bounds
/// vertices just inside the allowed area, (2) untangle self-intersections by
/// polar-angle reordering around the vertex mean, (3) enforce per-polygon
/// vertex counts, (4) push polygons off prohibited elements (delete after 3
/// failed pushes), (5) enforce the polygon-count bounds. Valid input is
/// returned unchanged.
pub fn postprocess(
    s: &Structure,
    d: &Domain,
    rng: &mut dyn RngCore,
) -> Result<Structure, RepairFailed> {
    if validate(s, d).valid() {
        return Ok(s.clone());
    }
    let mut current = s.clone();
    for _ in 0..DEFAULT_MAX_REPAIR_ROUNDS {
        current = repair_round(&current, d, rng);
        if validate(&current, d).valid() {
            return Ok(current);
        }
    }
    Err(RepairFailed {
        rounds: DEFAULT_MAX_REPAIR_ROUNDS,
    })
}

fn repair_round(s: &Structure, d: &Domain, rng: &mut dyn RngCore) -> Structure {
    let eps_in = 1e-6 * d.diagonal();
    let mut polygons = s.polygons.clone();

    // (1) clamp out-of-bounds vertices strictly inside the allowed area
    for poly in &mut polygons {
        for v in &mut poly.vertices {
            if !v.is_finite() || !point_in_closed_ring(*v, &d.allowed_area().vertices) {
                *v = clamp_inside(*v, d.allowed_area(), eps_in);
            }
        }
    }

    // (2) untangle self-intersections
    for poly in &mut polygons {
        if !is_simple(poly) {
            *poly = polar_reorder(poly);
        }
    }

    // (3) per-polygon vertex counts
    polygons.retain(|p| p.vertices.len() >= d.min_points());
    for poly in &mut polygons {
        if poly.vertices.len() > d.max_points() {
            trim_to(poly, d.max_points());
        }
    }

    // (4) push polygons off prohibited elements
    let mut kept = Vec::with_capacity(polygons.len());
    'poly: for poly in polygons {
        let mut poly = poly;
        for _ in 0..3 {
            match d.prohibited().iter().find(|pr| polygons_intersect(&poly, pr)) {
                None => break,
                Some(pr) => poly = push_away(&poly, pr, eps_in),
            }
        }
        if d.prohibited().iter().any(|pr| polygons_intersect(&poly, pr)) {
            continue 'poly; // undeliverable: drop it
        }
        kept.push(poly);
    }
    let mut polygons = kept;

    // (5) polygon-count bounds
    while polygons.len() > d.max_polygons() {
        let smallest = polygons
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                polygon_length(a)
                    .partial_cmp(&polygon_length(b))
                    .expect("finite lengths")
            })
            .map(|(i, _)| i)
            .expect("non-empty");
        polygons.remove(smallest);
    }
    while polygons.len() < d.min_polygons() {
        match spawn_polygon(d, &polygons, rng) {
            Some(p) => polygons.push(p),
            None => break, // validate will report the shortfall
        }
    }

    Structure::new(polygons)
}

/// Nearest point strictly inside the allowed area, offset `eps_in` off the
/// boundary.
fn clamp_inside(p: Point, allowed: &Polygon, eps_in: f64) -> Point {
    let p = if p.is_finite() {
        p
    } else {
        polygon_centroid(allowed)
    };
    let (mut best, mut best_d) = (p, f64::INFINITY);
    for (a, b) in allowed.edges() {
        let q = closest_point_on_segment(p, a, b);
        let dist = p.distance(q);
        if dist < best_d {
            best_d = dist;
            // offset inward perpendicular to the edge
            let ex = b.x - a.x;
            let ey = b.y - a.y;
            let len = (ex * ex + ey * ey).sqrt().max(EPS_POINT);
            let (nx, ny) = (-ey / len, ex / len);
            let c1 = Point::new(q.x + nx * eps_in, q.y + ny * eps_in);
            let c2 = Point::new(q.x - nx * eps_in, q.y - ny * eps_in);
            best = if point_in_closed_ring(c1, &allowed.vertices) {
                c1
            } else if point_in_closed_ring(c2, &allowed.vertices) {
                c2
            } else {
                // corner case: nudge toward the vertex mean instead
                let c = polygon_centroid(allowed);
                let d = q.distance(c).max(EPS_POINT);
                Point::new(
                    q.x + (c.x - q.x) / d * eps_in,
                    q.y + (c.y - q.y) / d * eps_in,
                )
            };
        }
    }
    best
}

/// Star-shaped reordering: sort vertices by polar angle around the vertex
/// mean, dropping coincident neighbors.
fn polar_reorder(poly: &Polygon) -> Polygon {
    let c = polygon_centroid(poly);
    let mut verts = poly.vertices.clone();
    verts.sort_by(|a, b| {
        let ta = (a.y - c.y).atan2(a.x - c.x);
        let tb = (b.y - c.y).atan2(b.x - c.x);
        ta.partial_cmp(&tb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.distance(c)
                    .partial_cmp(&b.distance(c))
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let mut deduped: Vec<Point> = Vec::with_capacity(verts.len());
    for v in verts {
        if deduped.last().is_none_or(|p| p.distance(v) >= EPS_POINT) {
            deduped.push(v);
        }
    }
    if deduped.len() > 1 && deduped[0].distance(*deduped.last().unwrap()) < EPS_POINT {
        deduped.pop();
    }
    Polygon::new(deduped, poly.kind)
}

/// Drop the vertices farthest from the vertex mean until `target` remain.
fn trim_to(poly: &mut Polygon, target: usize) {
    let c = polygon_centroid(poly);
    while poly.vertices.len() > target {
        let far = poly
            .vertices
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.distance(c)
                    .partial_cmp(&b.distance(c))
                    .expect("finite distance")
            })
            .map(|(i, _)| i)
            .expect("non-empty");
        poly.vertices.remove(far);
    }
}

/// Translate `poly` away from `obstacle` along the centroid-to-centroid
/// direction far enough to clear the projected overlap.
fn push_away(poly: &Polygon, obstacle: &Polygon, eps_in: f64) -> Polygon {
    let cp = polygon_centroid(poly);
    let co = polygon_centroid(obstacle);
    let mut dx = cp.x - co.x;
    let mut dy = cp.y - co.y;
    let norm = (dx * dx + dy * dy).sqrt();
    if norm < EPS_POINT {
        (dx, dy) = (1.0, 0.0); // coincident centroids: pick an arbitrary direction
    } else {
        dx /= norm;
        dy /= norm;
    }
    // overlap extent along the push direction
    let proj = |p: &Point| p.x * dx + p.y * dy;
    let obstacle_max = obstacle
        .vertices
        .iter()
        .map(proj)
        .fold(f64::NEG_INFINITY, f64::max);
    let poly_min = poly.vertices.iter().map(proj).fold(f64::INFINITY, f64::min);
    let shift = (obstacle_max - poly_min).max(0.0) + eps_in.max(EPS_POINT * 10.0);
    translate_polygon(poly, dx * shift, dy * shift)
}

/// Last-resort generator used when repair must add polygons: a small
/// regular polygon placed in free space by rejection sampling.
fn spawn_polygon(d: &Domain, existing: &[Polygon], rng: &mut dyn RngCore) -> Option<Polygon> {
    let rect = d.bounding_rect();
    let r_max = 0.5 * rect.width().min(rect.height()) / (existing.len() + 1) as f64;
    for _ in 0..200 {
        let center = Point::new(
            rng.gen_range(rect.min.x..=rect.max.x),
            rng.gen_range(rect.min.y..=rect.max.y),
        );
        let radius = r_max * (1.0 - rng.gen::<f64>()) * 0.5;
        if radius < EPS_POINT || !d.disk_is_free(center, radius, existing) {
            continue;
        }
        let n = d.min_points().max(3).min(d.max_points());
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let verts: Vec<Point> = (0..n)
            .map(|k| {
                let t = phase + k as f64 / n as f64 * std::f64::consts::TAU;
                Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            })
            .collect();
        let poly = Polygon::new(verts, d.polygon_kind());
        if d.polygon_kind() == PolygonKind::Open && poly.vertices.len() < d.min_points() {
            continue;
        }
        return Some(poly);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_domain() -> Domain {
        Domain::rectangular(100.0, 100.0, 3, 12, 1, 5, PolygonKind::Closed).unwrap()
    }

    fn small_square(x: f64, y: f64, side: f64) -> Polygon {
        Polygon::closed(vec![
            Point::new(x, y),
            Point::new(x + side, y),
            Point::new(x + side, y + side),
            Point::new(x, y + side),
        ])
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        // allowed area must be simple and closed
        let bowtie = Polygon::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 10.0),
        ]);
        assert_eq!(
            Domain::new(bowtie, vec![], vec![], 3, 10, 1, 2, PolygonKind::Closed).unwrap_err(),
            DomainError::BadAllowedArea
        );
        // closed kind needs at least 3 points per polygon
        assert_eq!(
            Domain::rectangular(10.0, 10.0, 2, 10, 1, 2, PolygonKind::Closed).unwrap_err(),
            DomainError::BadPointLimits
        );
        // polygon count bounds must be ordered
        assert_eq!(
            Domain::rectangular(10.0, 10.0, 3, 10, 3, 2, PolygonKind::Closed).unwrap_err(),
            DomainError::BadPolygonLimits
        );
        // prohibited elements must lie inside the allowed area
        let mut d = test_domain();
        let outside = small_square(95.0, 95.0, 20.0);
        assert!(matches!(
            d.add_prohibited(outside),
            Err(DomainError::BadProhibited(_))
        ));
    }

    #[test]
    fn valid_square_passes() {
        let d = test_domain();
        let s = Structure::new(vec![small_square(10.0, 10.0, 5.0)]);
        assert!(validate(&s, &d).valid());
    }

    #[test]
    fn bowtie_reports_self_intersection() {
        let d = test_domain();
        let bowtie = Polygon::closed(vec![
            Point::new(10.0, 10.0),
            Point::new(20.0, 20.0),
            Point::new(20.0, 10.0),
            Point::new(10.0, 20.0),
        ]);
        let report = validate(&Structure::new(vec![bowtie]), &d);
        assert!(report
            .violations
            .contains(&Violation::SelfIntersection { polygon: 0 }));
    }

    #[test]
    fn prohibited_overlap_reported() {
        let mut d = test_domain();
        d.add_prohibited(small_square(40.0, 40.0, 20.0)).unwrap();
        let s = Structure::new(vec![small_square(45.0, 45.0, 20.0)]);
        let report = validate(&s, &d);
        assert!(report.violations.contains(&Violation::ProhibitedIntersection {
            polygon: 0,
            prohibited: 0
        }));
    }

    #[test]
    fn validate_lists_all_violations() {
        let d = test_domain();
        let bowtie = Polygon::closed(vec![
            Point::new(-5.0, 10.0),
            Point::new(20.0, 20.0),
            Point::new(20.0, 10.0),
            Point::new(-5.0, 20.0),
        ]);
        let report = validate(&Structure::new(vec![bowtie]), &d);
        assert!(report.violations.len() >= 2, "{:?}", report.violations);
    }

    #[test]
    fn postprocess_is_identity_on_valid_input() {
        let d = test_domain();
        let s = Structure::new(vec![small_square(10.0, 10.0, 5.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = postprocess(&s, &d, &mut rng).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn postprocess_repairs_bowtie() {
        let d = test_domain();
        let bowtie = Polygon::closed(vec![
            Point::new(10.0, 10.0),
            Point::new(20.0, 20.0),
            Point::new(20.0, 10.0),
            Point::new(10.0, 20.0),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = postprocess(&Structure::new(vec![bowtie]), &d, &mut rng).unwrap();
        let report = validate(&out, &d);
        assert!(report.valid(), "{:?}", report.violations);
    }

    #[test]
    fn postprocess_relocates_far_vertex_only() {
        let d = test_domain();
        let mut poly = small_square(10.0, 10.0, 5.0);
        poly.vertices[2] = Point::new(105.0, 12.5); // 5 units beyond the right edge
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = postprocess(&Structure::new(vec![poly.clone()]), &d, &mut rng).unwrap();
        assert!(validate(&out, &d).valid());
        let moved = &out.polygons[0].vertices;
        // the stray vertex is back inside
        for v in moved {
            assert!(point_in_closed_ring(*v, &d.allowed_area().vertices));
        }
        // the in-bounds vertices are untouched
        for orig in [&poly.vertices[0], &poly.vertices[1], &poly.vertices[3]] {
            assert!(
                moved.iter().any(|m| m.distance(*orig) < 1e-9),
                "vertex {orig:?} was moved"
            );
        }
    }

    #[test]
    fn postprocess_pushes_polygon_off_prohibited() {
        let mut d = test_domain();
        d.add_prohibited(small_square(40.0, 40.0, 10.0)).unwrap();
        let s = Structure::new(vec![small_square(42.0, 42.0, 6.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = postprocess(&s, &d, &mut rng).unwrap();
        assert!(validate(&out, &d).valid());
    }

    #[test]
    fn validate_is_permutation_insensitive() {
        let d = test_domain();
        let a = small_square(10.0, 10.0, 5.0);
        let b = Polygon::closed(vec![
            Point::new(30.0, 30.0),
            Point::new(50.0, 50.0),
            Point::new(50.0, 30.0),
            Point::new(30.0, 50.0),
        ]); // bowtie
        let r1 = validate(&Structure::new(vec![a.clone(), b.clone()]), &d);
        let r2 = validate(&Structure::new(vec![b, a]), &d);
        let kinds = |r: &ValidationReport| {
            let mut v: Vec<&'static str> = r
                .violations
                .iter()
                .map(|x| match x {
                    Violation::OutOfBounds { .. } => "oob",
                    Violation::SelfIntersection { .. } => "self",
                    Violation::MutualIntersection { .. } => "mutual",
                    Violation::ProhibitedIntersection { .. } => "prohibited",
                    Violation::TooFewPoints { .. } => "few",
                    Violation::TooManyPoints { .. } => "many",
                    Violation::PolygonCountViolation => "count",
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(kinds(&r1), kinds(&r2));
    }

    #[test]
    fn postprocess_never_returns_invalid() {
        let d = test_domain();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..200u64 {
            let s = corrupt_structure(seed);
            if let Ok(out) = postprocess(&s, &d, &mut rng) { assert!(validate(&out, &d).valid(), "seed {seed}") }
        }
    }

    /// Deliberately broken structures: out-of-bounds points, crossings,
    /// too many vertices.
    fn corrupt_structure(seed: u64) -> Structure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_polys = rng.gen_range(1..=3);
        let polygons = (0..n_polys)
            .map(|_| {
                let n = rng.gen_range(3..=16);
                let verts = (0..n)
                    .map(|_| Point::new(rng.gen_range(-30.0..130.0), rng.gen_range(-30.0..130.0)))
                    .collect();
                Polygon::closed(verts)
            })
            .collect();
        Structure::new(polygons)
    }
}
