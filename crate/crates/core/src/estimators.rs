//! Objective evaluation.
//!
//! An [`Estimator`] maps a batch of structures to objective vectors under
//! the minimization convention. Built-ins: the reference-distance estimator
//! for synthetic reconstruction, a road-cost estimator, a shadow-model
//! stand-in for wave heights behind breakwaters, and a threshold-gated
//! composite that re-evaluates promising samples with an accurate
//! estimator. All built-ins are pure; the only mutable state is a call
//! counter kept for instrumentation.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::domain::Domain;
use crate::geometry::{
    point_segment_distance, polygon_length, polygons_intersect, ray_segment_hit, Point, Polygon,
    PolygonKind, Structure,
};
use crate::optimizers::Objectives;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("estimator contract violated: {0}")]
    ContractViolation(String),
    #[error("composite estimation requires two single-objective estimators")]
    CompositeArity,
    #[error("scenario is inconsistent with the domain: {0}")]
    BadScenario(String),
}

/// A pluggable objective evaluator.
pub trait Estimator: Send + Sync {
    /// Length of the objective vectors this estimator produces.
    fn objective_count(&self) -> usize;

    /// Whether batch elements may be evaluated concurrently.
    fn concurrent_safe(&self) -> bool {
        true
    }

    /// Evaluate a batch; one objective vector per structure, same order.
    fn estimate(&self, batch: &[Structure]) -> Result<Vec<Objectives>, EstimatorError>;

    /// Total structures evaluated so far.
    fn calls(&self) -> u64;

    /// (cheap, accurate) call split; non-composite estimators report all
    /// calls as cheap.
    fn call_breakdown(&self) -> (u64, u64) {
        (self.calls(), 0)
    }
}

/// Normalized chamfer distance to a fixed reference structure (m = 1).
pub struct ReferenceDistanceEstimator {
    reference: Structure,
    diagonal: f64,
    samples: usize,
    calls: AtomicU64,
}

impl ReferenceDistanceEstimator {
    pub const DEFAULT_SAMPLES: usize = 200;

    pub fn new(reference: Structure, d: &Domain) -> Self {
        Self {
            reference,
            diagonal: d.diagonal(),
            samples: Self::DEFAULT_SAMPLES,
            calls: AtomicU64::new(0),
        }
    }

    pub fn reference(&self) -> &Structure {
        &self.reference
    }
}

impl Estimator for ReferenceDistanceEstimator {
    fn objective_count(&self) -> usize {
        1
    }

    fn estimate(&self, batch: &[Structure]) -> Result<Vec<Objectives>, EstimatorError> {
        self.calls.fetch_add(batch.len() as u64, Ordering::Relaxed);
        batch
            .iter()
            .map(|s| {
                let dist = crate::geometry::chamfer_distance(s, &self.reference, self.samples)
                    .map_err(|e| EstimatorError::ContractViolation(e.to_string()))?;
                Ok(Objectives::new(vec![dist / self.diagonal]))
            })
            .collect()
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Road placement scenario: wells to serve, fixed road endpoints, and the
/// cost coefficient per unit length.
#[derive(Debug, Clone)]
pub struct RoadScenario {
    pub wells: Vec<Point>,
    pub endpoints: (Point, Point),
    pub r_road: f64,
}

impl RoadScenario {
    pub fn new(
        wells: Vec<Point>,
        endpoints: (Point, Point),
        r_road: f64,
        d: &Domain,
    ) -> Result<Self, EstimatorError> {
        for p in wells.iter().chain([&endpoints.0, &endpoints.1]) {
            if !d.contains_free(*p) {
                return Err(EstimatorError::BadScenario(format!(
                    "point ({}, {}) is outside the free area",
                    p.x, p.y
                )));
            }
        }
        Ok(Self {
            wells,
            endpoints,
            r_road,
        })
    }

    /// Force a road's first and last vertices onto the fixed endpoints.
    pub fn pin_endpoints(&self, s: &Structure) -> Structure {
        let mut out = s.clone();
        if let Some(road) = out.polygons.first_mut() {
            if let Some(first) = road.vertices.first_mut() {
                *first = self.endpoints.0;
            }
            if road.vertices.len() > 1 {
                let last = road.vertices.last_mut().expect("non-empty");
                *last = self.endpoints.1;
            }
        }
        out
    }

    /// The full road adapter: pin the endpoints and route the interior
    /// vertices in order of their projection onto the start-to-end axis.
    /// A projection-monotone polyline cannot self-intersect, so adapted
    /// roads survive repair untouched.
    pub fn adapt_road(&self, s: &Structure) -> Structure {
        let mut out = self.pin_endpoints(s);
        let (start, end) = self.endpoints;
        let axis = Point::new(end.x - start.x, end.y - start.y);
        if let Some(road) = out.polygons.first_mut() {
            if road.vertices.len() > 2 {
                let last = road.vertices.len() - 1;
                let interior = &mut road.vertices[1..last];
                interior.sort_by(|a, b| {
                    let pa = (a.x - start.x) * axis.x + (a.y - start.y) * axis.y;
                    let pb = (b.x - start.x) * axis.x + (b.y - start.y) * axis.y;
                    pa.partial_cmp(&pb).expect("finite projections")
                });
                // interior vertices coinciding with a pinned endpoint
                // would create degenerate edges
                let keep: Vec<Point> = road.vertices[1..last]
                    .iter()
                    .filter(|v| v.distance(start) > 1e-9 && v.distance(end) > 1e-9)
                    .copied()
                    .collect();
                road.vertices = std::iter::once(start)
                    .chain(keep)
                    .chain(std::iter::once(end))
                    .collect();
            }
        }
        out
    }
}

/// Road cost r_road x (road length + summed well-to-road distances), m = 1.
/// Roads crossing an obstacle get an infinite sentinel objective.
pub struct RoadNpvEstimator {
    scenario: RoadScenario,
    obstacles: Vec<Polygon>,
    calls: AtomicU64,
}

impl RoadNpvEstimator {
    pub fn new(scenario: RoadScenario, d: &Domain) -> Self {
        Self {
            scenario,
            obstacles: d.prohibited().to_vec(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn scenario(&self) -> &RoadScenario {
        &self.scenario
    }

    fn road_of<'a>(&self, s: &'a Structure) -> Result<&'a Polygon, EstimatorError> {
        if s.polygons.len() != 1 || s.polygons[0].kind != PolygonKind::Open {
            return Err(EstimatorError::ContractViolation(
                "road structures carry exactly one open polygon".into(),
            ));
        }
        let road = &s.polygons[0];
        let (start, end) = self.scenario.endpoints;
        let first = *road.vertices.first().expect("non-empty road");
        let last = *road.vertices.last().expect("non-empty road");
        if first.distance(start) > 1e-9 || last.distance(end) > 1e-9 {
            return Err(EstimatorError::ContractViolation(
                "road endpoints are not pinned to the scenario endpoints".into(),
            ));
        }
        Ok(road)
    }
}

impl Estimator for RoadNpvEstimator {
    fn objective_count(&self) -> usize {
        1
    }

    fn estimate(&self, batch: &[Structure]) -> Result<Vec<Objectives>, EstimatorError> {
        self.calls.fetch_add(batch.len() as u64, Ordering::Relaxed);
        batch
            .iter()
            .map(|s| {
                let road = self.road_of(s)?;
                if self.obstacles.iter().any(|o| polygons_intersect(road, o)) {
                    return Ok(Objectives::new(vec![f64::INFINITY]));
                }
                let edist: f64 = self
                    .scenario
                    .wells
                    .iter()
                    .map(|w| {
                        road.edges()
                            .map(|(a, b)| point_segment_distance(*w, a, b))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                let npv = self.scenario.r_road * (polygon_length(road) + edist);
                Ok(Objectives::new(vec![npv]))
            })
            .collect()
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Wave shielding scenario: protected targets, the incoming wind direction
/// and the exponential shadow model parameters.
#[derive(Debug, Clone)]
pub struct WaveScenario {
    pub targets: Vec<Point>,
    pub wind_direction: Point,
    pub base_height: f64,
    pub protection_coefficient: f64,
}

impl WaveScenario {
    pub const DEFAULT_BASE_HEIGHT: f64 = 2.5;

    pub fn new(
        targets: Vec<Point>,
        wind_direction: Point,
        base_height: f64,
        protection_coefficient: f64,
        d: &Domain,
    ) -> Result<Self, EstimatorError> {
        let norm = (wind_direction.x.powi(2) + wind_direction.y.powi(2)).sqrt();
        if norm < 1e-12 {
            return Err(EstimatorError::BadScenario("zero wind direction".into()));
        }
        for t in &targets {
            if !d.contains_free(*t) {
                return Err(EstimatorError::BadScenario(format!(
                    "target ({}, {}) is outside the free area",
                    t.x, t.y
                )));
            }
        }
        if protection_coefficient < 0.0 {
            return Err(EstimatorError::BadScenario(
                "protection coefficient must be non-negative".into(),
            ));
        }
        Ok(Self {
            targets,
            wind_direction: Point::new(wind_direction.x / norm, wind_direction.y / norm),
            base_height,
            protection_coefficient,
        })
    }
}

/// Shadow-model wave estimator (m = 2): summed wave heights at the targets
/// and total breakwater length as the cost proxy. The wave height at a
/// target decays exponentially with the number of breakwater segments
/// crossing its upwind ray inside the allowed area.
pub struct ShadowWaveEstimator {
    scenario: WaveScenario,
    allowed: Polygon,
    calls: AtomicU64,
}

impl ShadowWaveEstimator {
    pub fn new(scenario: WaveScenario, d: &Domain) -> Self {
        Self {
            scenario,
            allowed: d.allowed_area().clone(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn scenario(&self) -> &WaveScenario {
        &self.scenario
    }

    /// Number of breakwater segments crossing the upwind ray from `target`
    /// before it leaves the allowed area.
    pub fn blocking_segments(&self, target: Point, s: &Structure) -> usize {
        let dir = Point::new(-self.scenario.wind_direction.x, -self.scenario.wind_direction.y);
        // clip the ray at its last crossing of the allowed-area boundary
        let exit = self
            .allowed
            .edges()
            .filter_map(|(a, b)| ray_segment_hit(target, dir, a, b))
            .fold(0.0f64, f64::max);
        s.polygons
            .iter()
            .flat_map(|p| p.edges())
            .filter_map(|(a, b)| ray_segment_hit(target, dir, a, b))
            .filter(|t| *t <= exit)
            .count()
    }
}

impl Estimator for ShadowWaveEstimator {
    fn objective_count(&self) -> usize {
        2
    }

    fn estimate(&self, batch: &[Structure]) -> Result<Vec<Objectives>, EstimatorError> {
        self.calls.fetch_add(batch.len() as u64, Ordering::Relaxed);
        Ok(batch
            .iter()
            .map(|s| {
                let height: f64 = self
                    .scenario
                    .targets
                    .iter()
                    .map(|t| {
                        let n_block = self.blocking_segments(*t, s) as f64;
                        self.scenario.base_height
                            * (-self.scenario.protection_coefficient * n_block).exp()
                    })
                    .sum();
                Objectives::new(vec![height, s.total_length()])
            })
            .collect())
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Threshold-gated pairing of a cheap and an accurate estimator (m = 1):
/// every sample is screened by the cheap estimator and re-evaluated by the
/// accurate one only when the cheap value falls below the threshold.
pub struct CompositeEstimator {
    cheap: Box<dyn Estimator>,
    accurate: Box<dyn Estimator>,
    threshold: f64,
    calls: AtomicU64,
}

impl CompositeEstimator {
    pub const DEFAULT_THRESHOLD: f64 = 6.0;

    pub fn new(
        cheap: Box<dyn Estimator>,
        accurate: Box<dyn Estimator>,
        threshold: f64,
    ) -> Result<Self, EstimatorError> {
        if cheap.objective_count() != 1 || accurate.objective_count() != 1 {
            return Err(EstimatorError::CompositeArity);
        }
        Ok(Self {
            cheap,
            accurate,
            threshold,
            calls: AtomicU64::new(0),
        })
    }

    pub fn cheap_calls(&self) -> u64 {
        self.cheap.calls()
    }

    pub fn accurate_calls(&self) -> u64 {
        self.accurate.calls()
    }
}

impl Estimator for CompositeEstimator {
    fn objective_count(&self) -> usize {
        1
    }

    fn concurrent_safe(&self) -> bool {
        self.cheap.concurrent_safe() && self.accurate.concurrent_safe()
    }

    fn estimate(&self, batch: &[Structure]) -> Result<Vec<Objectives>, EstimatorError> {
        self.calls.fetch_add(batch.len() as u64, Ordering::Relaxed);
        let mut values = self.cheap.estimate(batch)?;
        let gated: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.scalar() < self.threshold)
            .map(|(i, _)| i)
            .collect();
        if !gated.is_empty() {
            let subset: Vec<Structure> = gated.iter().map(|i| batch[*i].clone()).collect();
            let recalculated = self.accurate.estimate(&subset)?;
            for (slot, value) in gated.into_iter().zip(recalculated) {
                values[slot] = value;
            }
        }
        Ok(values)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn call_breakdown(&self) -> (u64, u64) {
        (self.cheap.calls(), self.accurate.calls())
    }
}

/// Estimator wrapping a plain function; handy for tests and custom suites.
pub struct FnEstimator<F> {
    m: usize,
    f: F,
    calls: AtomicU64,
}

impl<F> FnEstimator<F>
where
    F: Fn(&Structure) -> Vec<f64> + Send + Sync,
{
    pub fn new(m: usize, f: F) -> Self {
        Self {
            m,
            f,
            calls: AtomicU64::new(0),
        }
    }
}

impl<F> Estimator for FnEstimator<F>
where
    F: Fn(&Structure) -> Vec<f64> + Send + Sync,
{
    fn objective_count(&self) -> usize {
        self.m
    }

    fn estimate(&self, batch: &[Structure]) -> Result<Vec<Objectives>, EstimatorError> {
        self.calls.fetch_add(batch.len() as u64, Ordering::Relaxed);
        Ok(batch.iter().map(|s| Objectives::new((self.f)(s))).collect())
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}
