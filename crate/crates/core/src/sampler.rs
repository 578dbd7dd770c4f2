//! Random structure generation: centroid-region sampling.
//!
//! Each polygon is grown in two stages. First a centroid is drawn uniformly
//! on the bounding rectangle, rejected until it falls in free space; then a
//! region radius is drawn uniformly on (0, R/n] — the bound shrinking with
//! the number of polygons already placed — and rejected while the disk
//! clips the boundary, a prohibited element or an existing polygon. Points
//! are then drawn from a normal around the centroid (sigma = radius/3, so
//! nearly all raw draws land inside the disk), clamped into the disk and
//! ordered by polar angle.

use rand::Rng;
use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{postprocess, Domain, RepairFailed};
use crate::geometry::{Point, Polygon, Rect, Structure, EPS_POINT};

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("sampling exhausted after {attempts} rejected draws")]
    Exhausted { attempts: usize },
    #[error(transparent)]
    Repair(#[from] RepairFailed),
}

/// Knobs for the standard sampler.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Rectangle the centroids are drawn on; normally the bounding box of
    /// the allowed area.
    pub rect: Rect,
    /// Upper bound for the per-polygon vertex count.
    pub max_points: usize,
    /// Number of polygons per sampled structure.
    pub n_polygons: usize,
    /// Total rejected draws tolerated per polygon before giving up.
    pub attempt_cap: usize,
}

impl SamplerConfig {
    pub fn for_domain(d: &Domain, n_polygons: usize) -> Self {
        Self {
            rect: d.bounding_rect(),
            max_points: d.max_points(),
            n_polygons,
            attempt_cap: 1000,
        }
    }
}

/// Per-polygon record of the draws the sampler made.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonTrace {
    pub centroid_draws: usize,
    /// Draws rejected for falling outside the free optimization domain
    /// (re-draws caused by a stalled radius loop are not rejections).
    pub centroid_rejections: usize,
    pub center: Point,
    pub radius: f64,
    pub radius_bound: f64,
}

/// Sample one valid structure.
pub fn sample_structure(
    d: &Domain,
    cfg: &SamplerConfig,
    rng: &mut dyn RngCore,
) -> Result<Structure, SampleError> {
    sample_structure_traced(d, cfg, rng).map(|(s, _)| s)
}

/// Sample one valid structure, also returning the draw trace.
pub fn sample_structure_traced(
    d: &Domain,
    cfg: &SamplerConfig,
    rng: &mut dyn RngCore,
) -> Result<(Structure, Vec<PolygonTrace>), SampleError> {
    let mut polygons: Vec<Polygon> = Vec::with_capacity(cfg.n_polygons);
    let mut trace = Vec::with_capacity(cfg.n_polygons);
    while polygons.len() < cfg.n_polygons {
        let (poly, t) = sample_polygon_traced(d, cfg, &polygons, rng)?;
        polygons.push(poly);
        trace.push(t);
    }
    let structure = postprocess(&Structure::new(polygons), d, rng)?;
    Ok((structure, trace))
}

/// Sample one raw polygon clear of `existing` (no repair pass). Used by the
/// structure sampler and by the polygon-adding mutation.
pub fn sample_polygon_in(
    d: &Domain,
    cfg: &SamplerConfig,
    existing: &[Polygon],
    rng: &mut dyn RngCore,
) -> Result<Polygon, SampleError> {
    sample_polygon_traced(d, cfg, existing, rng).map(|(p, _)| p)
}

fn sample_polygon_traced(
    d: &Domain,
    cfg: &SamplerConfig,
    existing: &[Polygon],
    rng: &mut dyn RngCore,
) -> Result<(Polygon, PolygonTrace), SampleError> {
    let n_poly = existing.len() + 1;
    let r_bound = 0.5 * cfg.rect.width().min(cfg.rect.height()) / n_poly as f64;
    // the centroid is re-drawn after this many consecutive radius rejections
    let radius_patience = (cfg.attempt_cap / 4).max(1);

    let mut attempts = 0usize;
    let mut centroid_draws = 0usize;
    let mut centroid_rejections = 0usize;
    loop {
        let center = Point::new(
            rng.gen_range(cfg.rect.min.x..=cfg.rect.max.x),
            rng.gen_range(cfg.rect.min.y..=cfg.rect.max.y),
        );
        centroid_draws += 1;
        if !d.contains_free(center) {
            attempts += 1;
            centroid_rejections += 1;
            if attempts > cfg.attempt_cap {
                return Err(SampleError::Exhausted { attempts });
            }
            continue;
        }

        let mut radius_rejections = 0usize;
        loop {
            // uniform on (0, r_bound]
            let radius = r_bound * (1.0 - rng.gen::<f64>());
            if d.disk_is_free(center, radius, existing) {
                let poly = grow_polygon(d, cfg, center, radius, rng, &mut attempts)?;
                return Ok((
                    poly,
                    PolygonTrace {
                        centroid_draws,
                        centroid_rejections,
                        center,
                        radius,
                        radius_bound: r_bound,
                    },
                ));
            }
            attempts += 1;
            radius_rejections += 1;
            if attempts > cfg.attempt_cap {
                return Err(SampleError::Exhausted { attempts });
            }
            if radius_rejections >= radius_patience {
                break; // give up on this centroid
            }
        }
    }
}

/// Draw normally distributed points in the centroid region, clamp them
/// into the disk, and order them by polar angle around the centroid.
fn grow_polygon(
    d: &Domain,
    cfg: &SamplerConfig,
    center: Point,
    radius: f64,
    rng: &mut dyn RngCore,
    attempts: &mut usize,
) -> Result<Polygon, SampleError> {
    let n_point = rng.gen_range(d.min_points()..=cfg.max_points.max(d.min_points()));
    let sigma = (radius / 3.0).max(f64::MIN_POSITIVE);
    let normal = Normal::new(0.0, sigma).expect("positive sigma");

    let mut points: Vec<Point> = Vec::with_capacity(n_point);
    while points.len() < n_point {
        let mut p = Point::new(center.x + normal.sample(rng), center.y + normal.sample(rng));
        let dist = p.distance(center);
        if dist > radius {
            let scale = radius / dist;
            p = Point::new(
                center.x + (p.x - center.x) * scale,
                center.y + (p.y - center.y) * scale,
            );
        }
        // a draw coincident with an accepted point is rejected
        if points.iter().any(|q| q.distance(p) < EPS_POINT) {
            *attempts += 1;
            if *attempts > cfg.attempt_cap {
                return Err(SampleError::Exhausted {
                    attempts: *attempts,
                });
            }
            continue;
        }
        points.push(p);
    }

    points.sort_by(|a, b| {
        let ta = (a.y - center.y).atan2(a.x - center.x);
        let tb = (b.y - center.y).atan2(b.x - center.x);
        ta.partial_cmp(&tb).expect("finite angles")
    });
    Ok(Polygon::new(points, d.polygon_kind()))
}

/// Sample `count` independent valid structures.
pub fn sample_batch(
    d: &Domain,
    cfg: &SamplerConfig,
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<Structure>, SampleError> {
    (0..count).map(|_| sample_structure(d, cfg, rng)).collect()
}

/// A pluggable structure source.
pub trait Sampler {
    fn sample_batch(
        &self,
        d: &Domain,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Structure>, SampleError>;
}

/// The built-in centroid-region sampler.
#[derive(Debug, Clone)]
pub struct StandardSampler {
    pub cfg: SamplerConfig,
}

impl StandardSampler {
    pub fn new(cfg: SamplerConfig) -> Self {
        Self { cfg }
    }

    pub fn for_domain(d: &Domain, n_polygons: usize) -> Self {
        Self::new(SamplerConfig::for_domain(d, n_polygons))
    }
}

impl Sampler for StandardSampler {
    fn sample_batch(
        &self,
        d: &Domain,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Structure>, SampleError> {
        sample_batch(d, &self.cfg, count, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate;
    use crate::geometry::PolygonKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn generous_domain() -> Domain {
        Domain::rectangular(100.0, 100.0, 3, 10, 1, 10, PolygonKind::Closed).unwrap()
    }

    #[test]
    fn sample_has_requested_polygon_count_and_validates() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = sample_structure(&d, &cfg, &mut rng).unwrap();
        assert_eq!(s.polygons.len(), 3);
        assert!(validate(&s, &d).valid());
    }

    #[test]
    fn vertex_counts_stay_within_limits() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = sample_structure(&d, &cfg, &mut rng).unwrap();
            for poly in &s.polygons {
                assert!(poly.vertices.len() >= 3 && poly.vertices.len() <= 10);
            }
        }
    }

    #[test]
    fn batch_of_thirty_validates() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let batch = sample_batch(&d, &cfg, 30, &mut rng).unwrap();
        assert_eq!(batch.len(), 30);
        for s in &batch {
            assert!(validate(s, &d).valid());
        }
    }

    #[test]
    fn cloned_rng_reproduces_batch() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 2);
        let mut a = ChaCha8Rng::seed_from_u64(17);
        let mut b = a.clone();
        let batch_a = sample_batch(&d, &cfg, 5, &mut a).unwrap();
        let batch_b = sample_batch(&d, &cfg, 5, &mut b).unwrap();
        assert_eq!(batch_a, batch_b);
    }

    #[test]
    fn single_sample_batch_is_singleton() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        assert_eq!(sample_batch(&d, &cfg, 1, &mut rng).unwrap().len(), 1);
    }

    #[test]
    fn radius_bound_shrinks_with_polygon_count() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (_, trace) = sample_structure_traced(&d, &cfg, &mut rng).unwrap();
        let r_max = 0.5 * 100.0;
        for (k, t) in trace.iter().enumerate() {
            let expected_bound = r_max / (k + 1) as f64;
            assert!((t.radius_bound - expected_bound).abs() < 1e-12);
            assert!(t.radius > 0.0 && t.radius <= t.radius_bound);
        }
    }

    #[test]
    fn unconstrained_rectangle_never_rejects_a_centroid() {
        // allowed area == sampling rectangle, no prohibited elements:
        // every centroid draw lands in free space, so the rejection loop
        // accepts on the first draw (stall re-draws are not rejections).
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let (_, trace) = sample_structure_traced(&d, &cfg, &mut rng).unwrap();
            for t in &trace {
                assert_eq!(t.centroid_rejections, 0);
            }
        }
    }

    #[test]
    fn raw_polygon_vertices_stay_within_region_radius() {
        let d = generous_domain();
        let cfg = SamplerConfig::for_domain(&d, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let (poly, t) = sample_polygon_traced(&d, &cfg, &[], &mut rng).unwrap();
            for v in &poly.vertices {
                assert!(v.distance(t.center) <= t.radius + 1e-9);
            }
        }
    }

    #[test]
    fn open_kind_produces_polylines() {
        let d = Domain::rectangular(50.0, 50.0, 2, 6, 1, 3, PolygonKind::Open).unwrap();
        let cfg = SamplerConfig::for_domain(&d, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let s = sample_structure(&d, &cfg, &mut rng).unwrap();
        for poly in &s.polygons {
            assert_eq!(poly.kind, PolygonKind::Open);
            assert!(poly.vertices.len() >= 2);
        }
        assert!(validate(&s, &d).valid());
    }

    #[test]
    fn sampling_succeeds_around_prohibited_elements() {
        let mut d = generous_domain();
        d.add_prohibited(Polygon::closed(vec![
            Point::new(35.0, 35.0),
            Point::new(65.0, 35.0),
            Point::new(65.0, 65.0),
            Point::new(35.0, 65.0),
        ]))
        .unwrap();
        let cfg = SamplerConfig::for_domain(&d, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let s = sample_structure(&d, &cfg, &mut rng).unwrap();
            assert!(validate(&s, &d).valid());
        }
    }
}
