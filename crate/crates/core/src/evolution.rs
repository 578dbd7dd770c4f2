//! Geometric variation operators: mutation and crossover.
//!
//! Every operator is closed under domain validity: the raw geometric edit
//! is followed by repair, and a structure that cannot be repaired surfaces
//! as a `MutationFailed` / `CrossoverFailed` error so the caller can fall
//! back (fresh sample or parent copy).

use rand::Rng;
use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{postprocess, Domain};
use crate::geometry::{
    polygon_length, rotate_polygon, translate_polygon, Point, Polygon, PolygonKind, Structure,
};
use crate::sampler::{sample_polygon_in, SamplerConfig};

#[derive(Debug, Error, PartialEq)]
pub enum VariationError {
    #[error("mutation could not produce a valid structure")]
    MutationFailed,
    #[error("crossover could not produce a valid structure")]
    CrossoverFailed,
}

/// The mutation operator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationOp {
    Rotate,
    DisplacePolygon,
    DisplacePoint,
    AddPoint,
    RemovePoint,
    AddPolygon,
    RemovePolygon,
}

pub const MUTATION_OPS: [MutationOp; 7] = [
    MutationOp::Rotate,
    MutationOp::DisplacePolygon,
    MutationOp::DisplacePoint,
    MutationOp::AddPoint,
    MutationOp::RemovePoint,
    MutationOp::AddPolygon,
    MutationOp::RemovePolygon,
];

/// Mutation strengths and operator weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationConfig {
    /// Rotation drawn uniformly from +-this many degrees.
    pub max_rotation_deg: f64,
    /// Displacement magnitude bound, as a fraction of the domain diagonal.
    pub displacement_fraction: f64,
    /// Weights over [Rotate, DisplacePolygon, DisplacePoint, AddPoint,
    /// RemovePoint, AddPolygon, RemovePolygon].
    pub operator_weights: [f64; 7],
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            max_rotation_deg: 45.0,
            displacement_fraction: 0.05,
            operator_weights: [1.0; 7],
        }
    }
}

impl MutationConfig {
    /// A config in which only `op` can be drawn.
    pub fn only(op: MutationOp) -> Self {
        let mut weights = [0.0; 7];
        let idx = MUTATION_OPS.iter().position(|o| *o == op).expect("known op");
        weights[idx] = 1.0;
        Self {
            operator_weights: weights,
            ..Self::default()
        }
    }
}

fn op_applicable(op: MutationOp, s: &Structure, d: &Domain) -> bool {
    match op {
        MutationOp::Rotate | MutationOp::DisplacePolygon | MutationOp::DisplacePoint => {
            !s.polygons.is_empty()
        }
        MutationOp::AddPoint => s
            .polygons
            .iter()
            .any(|p| p.vertices.len() < d.max_points()),
        MutationOp::RemovePoint => s
            .polygons
            .iter()
            .any(|p| p.vertices.len() > d.min_points()),
        MutationOp::AddPolygon => s.polygons.len() < d.max_polygons(),
        MutationOp::RemovePolygon => s.polygons.len() > d.min_polygons(),
    }
}

/// Weighted draw over the applicable operators. Falls back to a uniform
/// draw when no applicable operator carries positive weight.
fn choose_op(
    s: &Structure,
    d: &Domain,
    cfg: &MutationConfig,
    rng: &mut dyn RngCore,
) -> Option<MutationOp> {
    assert!(
        cfg.operator_weights.iter().all(|w| *w >= 0.0),
        "operator weights must be non-negative"
    );
    let applicable: Vec<(MutationOp, f64)> = MUTATION_OPS
        .iter()
        .zip(cfg.operator_weights)
        .filter(|(op, _)| op_applicable(**op, s, d))
        .map(|(op, w)| (*op, w))
        .collect();
    if applicable.is_empty() {
        return None;
    }
    let total: f64 = applicable.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        let idx = rng.gen_range(0..applicable.len());
        return Some(applicable[idx].0);
    }
    let mut u = rng.gen_range(0.0..total);
    for (op, w) in &applicable {
        if u < *w {
            return Some(*op);
        }
        u -= w;
    }
    Some(applicable.last().expect("non-empty").0)
}

/// Apply one weighted-random operator followed by repair.
pub fn mutate(
    s: &Structure,
    d: &Domain,
    cfg: &MutationConfig,
    rng: &mut dyn RngCore,
) -> Result<Structure, VariationError> {
    let op = choose_op(s, d, cfg, rng).ok_or(VariationError::MutationFailed)?;
    let raw = apply_op(op, s, d, cfg, rng).ok_or(VariationError::MutationFailed)?;
    postprocess(&raw, d, rng).map_err(|_| VariationError::MutationFailed)
}

/// The raw geometric edit, before repair. Exposed for tests of the
/// pre-repair operator contracts.
pub(crate) fn apply_op(
    op: MutationOp,
    s: &Structure,
    d: &Domain,
    cfg: &MutationConfig,
    rng: &mut dyn RngCore,
) -> Option<Structure> {
    let mut out = s.clone();
    let diag = d.diagonal();
    match op {
        MutationOp::Rotate => {
            let idx = rng.gen_range(0..out.polygons.len());
            let angle = rng.gen_range(-cfg.max_rotation_deg..=cfg.max_rotation_deg);
            out.polygons[idx] = rotate_polygon(&out.polygons[idx], angle);
        }
        MutationOp::DisplacePolygon => {
            let idx = rng.gen_range(0..out.polygons.len());
            let (dx, dy) = random_shift(cfg.displacement_fraction * diag, rng);
            out.polygons[idx] = translate_polygon(&out.polygons[idx], dx, dy);
        }
        MutationOp::DisplacePoint => {
            let idx = rng.gen_range(0..out.polygons.len());
            let vi = rng.gen_range(0..out.polygons[idx].vertices.len());
            let (dx, dy) = random_shift(cfg.displacement_fraction * diag, rng);
            let v = &mut out.polygons[idx].vertices[vi];
            *v = Point::new(v.x + dx, v.y + dy);
        }
        MutationOp::AddPoint => {
            let candidates: Vec<usize> = (0..out.polygons.len())
                .filter(|i| out.polygons[*i].vertices.len() < d.max_points())
                .collect();
            let idx = candidates[rng.gen_range(0..candidates.len())];
            let poly = &mut out.polygons[idx];
            let n = poly.vertices.len();
            let edge_count = match poly.kind {
                PolygonKind::Open => n - 1,
                PolygonKind::Closed => n,
            };
            let ei = rng.gen_range(0..edge_count);
            let a = poly.vertices[ei];
            let b = poly.vertices[(ei + 1) % n];
            let len = a.distance(b);
            let noise = Normal::new(0.0, (len / 6.0).max(f64::MIN_POSITIVE)).expect("sigma > 0");
            let mid = Point::new(
                0.5 * (a.x + b.x) + noise.sample(rng),
                0.5 * (a.y + b.y) + noise.sample(rng),
            );
            poly.vertices.insert(ei + 1, mid);
        }
        MutationOp::RemovePoint => {
            let candidates: Vec<usize> = (0..out.polygons.len())
                .filter(|i| out.polygons[*i].vertices.len() > d.min_points())
                .collect();
            let idx = candidates[rng.gen_range(0..candidates.len())];
            let poly = &mut out.polygons[idx];
            let vi = rng.gen_range(0..poly.vertices.len());
            poly.vertices.remove(vi);
        }
        MutationOp::AddPolygon => {
            let cfg = SamplerConfig::for_domain(d, out.polygons.len() + 1);
            let poly = sample_polygon_in(d, &cfg, &out.polygons, rng).ok()?;
            out.polygons.push(poly);
        }
        MutationOp::RemovePolygon => {
            let idx = rng.gen_range(0..out.polygons.len());
            out.polygons.remove(idx);
        }
    }
    Some(out)
}

fn random_shift(max_magnitude: f64, rng: &mut dyn RngCore) -> (f64, f64) {
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let magnitude = rng.gen_range(0.0..=max_magnitude);
    (magnitude * angle.cos(), magnitude * angle.sin())
}

/// Polygon-exchange crossover; vertex splice when both parents carry a
/// single polygon.
pub fn crossover(
    a: &Structure,
    b: &Structure,
    d: &Domain,
    rng: &mut dyn RngCore,
) -> Result<Structure, VariationError> {
    let raw = if a.polygons.len() == 1 && b.polygons.len() == 1 {
        splice_parents(a, b, d, rng)
    } else {
        Structure::new(exchange_polygons(a, b, d.max_polygons(), rng))
    };
    postprocess(&raw, d, rng).map_err(|_| VariationError::CrossoverFailed)
}

/// Child = non-empty subset of a's polygons + subset of b's, truncated to
/// `max_polygons` keeping the largest by length.
pub(crate) fn exchange_polygons(
    a: &Structure,
    b: &Structure,
    max_polygons: usize,
    rng: &mut dyn RngCore,
) -> Vec<Polygon> {
    let mut child: Vec<Polygon> = Vec::new();
    for poly in &a.polygons {
        if rng.gen_bool(0.5) {
            child.push(poly.clone());
        }
    }
    if child.is_empty() && !a.polygons.is_empty() {
        let idx = rng.gen_range(0..a.polygons.len());
        child.push(a.polygons[idx].clone());
    }
    for poly in &b.polygons {
        if rng.gen_bool(0.5) {
            child.push(poly.clone());
        }
    }
    if child.len() > max_polygons {
        child.sort_by(|x, y| {
            polygon_length(y)
                .partial_cmp(&polygon_length(x))
                .expect("finite lengths")
        });
        child.truncate(max_polygons);
    }
    child
}

fn splice_parents(a: &Structure, b: &Structure, d: &Domain, rng: &mut dyn RngCore) -> Structure {
    let pa = &a.polygons[0];
    let pb = &b.polygons[0];
    for _ in 0..8 {
        let cut_a = rng.gen_range(0..pa.vertices.len());
        let cut_b = rng.gen_range(0..pb.vertices.len());
        let child = splice_rings(pa, pb, cut_a, cut_b);
        if child.vertices.len() >= d.min_points() {
            return Structure::new(vec![child]);
        }
    }
    a.clone()
}

/// Prefix of `a` up to `cut_a`, then suffix of `b` from `cut_b`.
pub(crate) fn splice_rings(a: &Polygon, b: &Polygon, cut_a: usize, cut_b: usize) -> Polygon {
    let mut vertices: Vec<Point> = a.vertices[..cut_a].to_vec();
    vertices.extend_from_slice(&b.vertices[cut_b..]);
    Polygon::new(vertices, a.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate;
    use crate::sampler::{sample_structure, SamplerConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn domain() -> Domain {
        Domain::rectangular(100.0, 100.0, 3, 12, 1, 5, PolygonKind::Closed).unwrap()
    }

    fn square() -> Structure {
        Structure::new(vec![Polygon::closed(vec![
            Point::new(40.0, 40.0),
            Point::new(50.0, 40.0),
            Point::new(50.0, 50.0),
            Point::new(40.0, 50.0),
        ])])
    }

    #[test]
    fn rotate_only_is_deterministic_and_length_preserving() {
        let d = domain();
        let cfg = MutationConfig::only(MutationOp::Rotate);
        let s = square();
        let before = s.total_length();

        let mut rng1 = ChaCha8Rng::seed_from_u64(5);
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let out1 = mutate(&s, &d, &cfg, &mut rng1).unwrap();
        let out2 = mutate(&s, &d, &cfg, &mut rng2).unwrap();
        assert_eq!(out1, out2);
        assert!((out1.total_length() - before).abs() < 1e-9);
    }

    #[test]
    fn remove_polygon_at_floor_applies_another_operator() {
        let d = domain(); // min_polygons = 1
        let cfg = MutationConfig::default();
        let s = square();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let out = mutate(&s, &d, &cfg, &mut rng).unwrap();
            assert!(!out.polygons.is_empty());
        }
    }

    #[test]
    fn mutation_fuzz_outputs_validate() {
        let d = domain();
        let scfg = SamplerConfig::for_domain(&d, 2);
        let mcfg = MutationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..100 {
            let s = sample_structure(&d, &scfg, &mut rng).unwrap();
            match mutate(&s, &d, &mcfg, &mut rng) {
                Ok(out) => assert!(validate(&out, &d).valid()),
                Err(VariationError::MutationFailed) => {}
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn crossover_fuzz_outputs_validate() {
        let d = domain();
        let scfg = SamplerConfig::for_domain(&d, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..100 {
            let a = sample_structure(&d, &scfg, &mut rng).unwrap();
            let b = sample_structure(&d, &scfg, &mut rng).unwrap();
            match crossover(&a, &b, &d, &mut rng) {
                Ok(out) => assert!(validate(&out, &d).valid()),
                Err(VariationError::CrossoverFailed) => {}
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn splice_at_zero_reproduces_parent() {
        let p = square().polygons[0].clone();
        let child = splice_rings(&p, &p, 0, 0);
        assert_eq!(child, p);
    }

    #[test]
    fn exchange_child_draws_from_parent_polygons() {
        let d = domain();
        let a = Structure::new(vec![
            square().polygons[0].clone(),
            Polygon::closed(vec![
                Point::new(10.0, 10.0),
                Point::new(20.0, 10.0),
                Point::new(20.0, 20.0),
                Point::new(10.0, 20.0),
            ]),
        ]);
        let b = Structure::new(vec![
            Polygon::closed(vec![
                Point::new(70.0, 70.0),
                Point::new(80.0, 70.0),
                Point::new(80.0, 80.0),
                Point::new(70.0, 80.0),
            ]),
            Polygon::closed(vec![
                Point::new(70.0, 10.0),
                Point::new(80.0, 10.0),
                Point::new(80.0, 20.0),
                Point::new(70.0, 20.0),
            ]),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for _ in 0..50 {
            let child = exchange_polygons(&a, &b, d.max_polygons(), &mut rng);
            assert!(!child.is_empty());
            assert!(child.len() <= d.max_polygons());
            for poly in &child {
                assert!(
                    a.polygons.contains(poly) || b.polygons.contains(poly),
                    "child polygon not drawn from a parent"
                );
            }
        }
    }

    #[test]
    fn add_and_remove_point_change_count_by_one() {
        let d = domain();
        let s = square();
        let cfg = MutationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let added = apply_op(MutationOp::AddPoint, &s, &d, &cfg, &mut rng).unwrap();
        assert_eq!(added.polygons[0].vertices.len(), 5);

        let bigger = Structure::new(vec![Polygon::closed(vec![
            Point::new(40.0, 40.0),
            Point::new(50.0, 40.0),
            Point::new(50.0, 50.0),
            Point::new(45.0, 55.0),
            Point::new(40.0, 50.0),
        ])]);
        let removed = apply_op(MutationOp::RemovePoint, &bigger, &d, &cfg, &mut rng).unwrap();
        assert_eq!(removed.polygons[0].vertices.len(), 4);
    }

    #[test]
    fn displace_polygon_is_an_isometry() {
        let d = domain();
        let s = square();
        let cfg = MutationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        let out = apply_op(MutationOp::DisplacePolygon, &s, &d, &cfg, &mut rng).unwrap();
        let orig = &s.polygons[0].vertices;
        let moved = &out.polygons[0].vertices;
        for i in 0..orig.len() {
            for j in (i + 1)..orig.len() {
                let before = orig[i].distance(orig[j]);
                let after = moved[i].distance(moved[j]);
                assert!((before - after).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identical_inputs_and_rng_state_give_identical_outputs() {
        let d = domain();
        let scfg = SamplerConfig::for_domain(&d, 2);
        let mcfg = MutationConfig::default();
        let mut seed_rng = ChaCha8Rng::seed_from_u64(127);
        let a = sample_structure(&d, &scfg, &mut seed_rng).unwrap();
        let b = sample_structure(&d, &scfg, &mut seed_rng).unwrap();

        let mut r1 = ChaCha8Rng::seed_from_u64(131);
        let mut r2 = ChaCha8Rng::seed_from_u64(131);
        assert_eq!(
            mutate(&a, &d, &mcfg, &mut r1),
            mutate(&a, &d, &mcfg, &mut r2)
        );
        assert_eq!(crossover(&a, &b, &d, &mut r1), crossover(&a, &b, &d, &mut r2));
    }
}
