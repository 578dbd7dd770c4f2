//! Built-in desk-scale problem suites.
//!
//! Three ready-made setups exercise the whole engine end to end: synthetic
//! reference reconstruction, bi-objective breakwater shielding under the
//! shadow wave model, and road placement with fixed endpoints around
//! obstacles. The CLI builds its runs from these, and the acceptance suite
//! drives them directly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::Domain;
use crate::estimators::{
    ReferenceDistanceEstimator, RoadNpvEstimator, RoadScenario, ShadowWaveEstimator, WaveScenario,
};
use crate::geometry::{Point, Polygon, PolygonKind, Structure};
use crate::optimizers::{ga_run, GaConfig, GaRun, OptimizeError};
use crate::sampler::StandardSampler;
use crate::toolkit::{Toolkit, VariationConfig};

/// Synthetic reference-reconstruction suite.
pub mod synthetic {
    use super::*;

    /// Square closed-polygon domain, side 100 x `scale`.
    pub fn domain(scale: f64, max_points: usize, max_polygons: usize) -> Domain {
        Domain::rectangular(
            100.0 * scale,
            100.0 * scale,
            3,
            max_points,
            1,
            max_polygons,
            PolygonKind::Closed,
        )
        .expect("suite domain is well-formed")
    }

    /// Draw a reference structure of `n_polygons` polygons.
    pub fn sample_reference(d: &Domain, n_polygons: usize, seed: u64) -> Structure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = StandardSampler::for_domain(d, n_polygons);
        crate::sampler::sample_structure(d, &sampler.cfg, &mut rng)
            .expect("reference sampling succeeds in an open domain")
    }

    /// Reconstruct `reference` with the GA; returns the final normalized
    /// chamfer error and the per-generation best trace.
    pub fn reconstruct(
        d: &Domain,
        reference: &Structure,
        population: usize,
        generations: usize,
        seed: u64,
    ) -> Result<GaRun, OptimizeError> {
        let tk = Toolkit::new(
            Box::new(StandardSampler::for_domain(d, reference.polygons.len())),
            Box::new(ReferenceDistanceEstimator::new(reference.clone(), d)),
            None,
        );
        let cfg = GaConfig::new(population, generations);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ga_run(&tk, d, &cfg, &mut rng)
    }

    /// The swept property of a scaling study.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum SweepAxis {
        Polygons,
        Vertices,
        DomainScale,
    }

    /// One reconstruction repetition of a scaling study.
    #[derive(Debug, Clone)]
    pub struct ScalingRow {
        pub sweep_value: f64,
        pub repetition: usize,
        pub error: f64,
    }

    /// Run `repetitions` independent reconstructions per sweep value, each
    /// against a freshly sampled reference of the swept complexity.
    pub fn scaling_study(
        axis: SweepAxis,
        values: &[f64],
        repetitions: usize,
        population: usize,
        generations: usize,
        seed: u64,
    ) -> Result<Vec<ScalingRow>, OptimizeError> {
        let mut rows = Vec::with_capacity(values.len() * repetitions);
        for (vi, value) in values.iter().enumerate() {
            for rep in 0..repetitions {
                let run_seed = seed
                    .wrapping_add(vi as u64 * 1_000_003)
                    .wrapping_add(rep as u64 * 7919);
                let (d, n_polygons) = match axis {
                    SweepAxis::Polygons => (domain(1.0, 12, value.round() as usize), {
                        value.round() as usize
                    }),
                    SweepAxis::Vertices => {
                        let v = value.round() as usize;
                        let d = Domain::rectangular(
                            100.0,
                            100.0,
                            v.max(3),
                            v.max(3),
                            1,
                            1,
                            PolygonKind::Closed,
                        )
                        .expect("vertex-sweep domain is well-formed");
                        (d, 1)
                    }
                    SweepAxis::DomainScale => (domain(*value, 12, 1), 1),
                };
                let reference = sample_reference(&d, n_polygons, run_seed ^ 0x5EED);
                let run = reconstruct(&d, &reference, population, generations, run_seed)?;
                rows.push(ScalingRow {
                    sweep_value: *value,
                    repetition: rep,
                    error: run.best.objectives().scalar(),
                });
            }
        }
        Ok(rows)
    }

    /// Spearman rank correlation between two equal-length samples.
    pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
        assert_eq!(xs.len(), ys.len());
        let rank = |vals: &[f64]| -> Vec<f64> {
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|a, b| vals[*a].partial_cmp(&vals[*b]).expect("no NaN"));
            let mut ranks = vec![0.0; vals.len()];
            let mut i = 0;
            while i < order.len() {
                // average ranks over ties
                let mut j = i;
                while j + 1 < order.len() && vals[order[j + 1]] == vals[order[i]] {
                    j += 1;
                }
                let avg = (i + j) as f64 / 2.0 + 1.0;
                for &idx in &order[i..=j] {
                    ranks[idx] = avg;
                }
                i = j + 1;
            }
            ranks
        };
        let rx = rank(xs);
        let ry = rank(ys);
        let n = xs.len() as f64;
        let mean = (n + 1.0) / 2.0;
        let (mut num, mut dx, mut dy) = (0.0, 0.0, 0.0);
        for (a, b) in rx.iter().zip(&ry) {
            num += (a - mean) * (b - mean);
            dx += (a - mean).powi(2);
            dy += (b - mean).powi(2);
        }
        if dx == 0.0 || dy == 0.0 {
            return 0.0;
        }
        num / (dx * dy).sqrt()
    }

    /// Median of a sample (empty input is a caller bug).
    pub fn median(values: &[f64]) -> f64 {
        assert!(!values.is_empty());
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        let mid = v.len() / 2;
        if v.len() % 2 == 1 {
            v[mid]
        } else {
            0.5 * (v[mid - 1] + v[mid])
        }
    }
}

/// Breakwater shielding suite under the shadow wave model.
pub mod waves {
    use super::*;

    /// Open-polyline domain for breakwater layouts.
    pub fn domain() -> Domain {
        Domain::rectangular(100.0, 100.0, 2, 6, 1, 4, PolygonKind::Open)
            .expect("suite domain is well-formed")
    }

    /// Three protected targets in the lower half, wind from the north.
    pub fn scenario(d: &Domain) -> WaveScenario {
        WaveScenario::new(
            vec![
                Point::new(25.0, 20.0),
                Point::new(50.0, 15.0),
                Point::new(75.0, 20.0),
            ],
            Point::new(0.0, -1.0),
            WaveScenario::DEFAULT_BASE_HEIGHT,
            std::f64::consts::LN_2,
            d,
        )
        .expect("suite scenario is well-formed")
    }

    /// Sampler + shadow-wave estimator toolkit (no optimizer bound).
    pub fn toolkit(d: &Domain) -> Toolkit {
        Toolkit::new(
            Box::new(StandardSampler::for_domain(d, 2)),
            Box::new(ShadowWaveEstimator::new(scenario(d), d)),
            None,
        )
    }
}

/// Road placement suite: one open road with pinned endpoints serving
/// randomly placed wells around obstacles.
pub mod road {
    use super::*;

    pub const DEFAULT_R_ROAD: f64 = 1000.0;

    /// A random 100 x 100 field: two 10 x 10 obstacles (2% of the area),
    /// `n_wells` wells in free space, road endpoints pinned mid-left and
    /// mid-right.
    pub fn random_scenario(seed: u64, n_wells: usize) -> (Domain, RoadScenario) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let endpoints = (Point::new(3.0, 50.0), Point::new(97.0, 50.0));

        let mut d = Domain::rectangular(100.0, 100.0, 2, 12, 1, 1, PolygonKind::Open)
            .expect("road domain is well-formed");
        let mut placed = 0;
        while placed < 2 {
            let x = rng.gen_range(12.0..78.0);
            let y = rng.gen_range(12.0..78.0);
            let obstacle = Polygon::closed(vec![
                Point::new(x, y),
                Point::new(x + 10.0, y),
                Point::new(x + 10.0, y + 10.0),
                Point::new(x, y + 10.0),
            ]);
            let covers_endpoint = [endpoints.0, endpoints.1].iter().any(|p| {
                crate::geometry::point_in_polygon(*p, &obstacle).expect("closed obstacle")
            });
            if covers_endpoint {
                continue;
            }
            if d.add_prohibited(obstacle).is_ok() {
                placed += 1;
            }
        }

        let mut wells = Vec::with_capacity(n_wells);
        while wells.len() < n_wells {
            let p = Point::new(rng.gen_range(5.0..95.0), rng.gen_range(5.0..95.0));
            if d.contains_free(p) {
                wells.push(p);
            }
        }

        let scenario =
            RoadScenario::new(wells, endpoints, DEFAULT_R_ROAD, &d).expect("scenario in bounds");
        (d, scenario)
    }

    /// Naive baseline: straight segments from the start through every well
    /// (ordered along the start-to-end axis) to the end. All wells sit on
    /// the road, so the cost is purely its length.
    pub fn baseline_npv(sc: &RoadScenario) -> f64 {
        let (start, end) = sc.endpoints;
        let axis = Point::new(end.x - start.x, end.y - start.y);
        let mut wells = sc.wells.clone();
        wells.sort_by(|a, b| {
            let pa = (a.x - start.x) * axis.x + (a.y - start.y) * axis.y;
            let pb = (b.x - start.x) * axis.x + (b.y - start.y) * axis.y;
            pa.partial_cmp(&pb).expect("finite projections")
        });
        let mut length = 0.0;
        let mut prev = start;
        for w in &wells {
            length += prev.distance(*w);
            prev = *w;
        }
        length += prev.distance(end);
        sc.r_road * length
    }

    /// Toolkit with the endpoint-pinning road adapter installed. Variation
    /// leans on point-level edits: roads improve by bending toward wells,
    /// not by rigid-body moves.
    pub fn toolkit(d: &Domain, sc: &RoadScenario) -> Toolkit {
        let pin = sc.clone();
        let mut variation = VariationConfig::default();
        variation.mutation.displacement_fraction = 0.04;
        variation.mutation.operator_weights = [0.5, 0.5, 3.0, 2.0, 1.0, 0.0, 0.0];
        Toolkit::new(
            Box::new(StandardSampler::for_domain(d, 1)),
            Box::new(RoadNpvEstimator::new(sc.clone(), d)),
            None,
        )
        .with_variation(variation)
        .with_adapter(Box::new(move |s: &Structure| pin.adapt_road(s)))
    }

    /// GA optimization of the road layout.
    pub fn optimize(
        d: &Domain,
        sc: &RoadScenario,
        population: usize,
        iterations: usize,
        seed: u64,
    ) -> Result<GaRun, OptimizeError> {
        let tk = toolkit(d, sc);
        let cfg = GaConfig::new(population, iterations);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ga_run(&tk, d, &cfg, &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate;

    #[test]
    fn synthetic_reference_is_valid() {
        let d = synthetic::domain(1.0, 12, 3);
        let r = synthetic::sample_reference(&d, 2, 9);
        assert_eq!(r.polygons.len(), 2);
        assert!(validate(&r, &d).valid());
    }

    #[test]
    fn reconstruction_runs_at_population_forty() {
        let d = synthetic::domain(1.0, 12, 1);
        let reference = synthetic::sample_reference(&d, 1, 40);
        let run = synthetic::reconstruct(&d, &reference, 40, 5, 4).unwrap();
        assert_eq!(run.trace.len(), 5);
        assert!(run.best.objectives().scalar().is_finite());
    }

    #[test]
    fn spearman_detects_monotone_relationships() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let up = [1.0, 4.0, 9.0, 16.0, 25.0];
        let down = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((synthetic::spearman(&xs, &up) - 1.0).abs() < 1e-12);
        assert!((synthetic::spearman(&xs, &down) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(synthetic::median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(synthetic::median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn road_scenario_is_consistent() {
        let (d, sc) = road::random_scenario(5, 5);
        assert_eq!(sc.wells.len(), 5);
        assert_eq!(d.prohibited().len(), 2);
        for w in &sc.wells {
            assert!(d.contains_free(*w));
        }
        assert!(road::baseline_npv(&sc) > 0.0);
    }

    #[test]
    fn road_optimization_short_run_is_feasible_and_monotone() {
        let (d, sc) = road::random_scenario(11, 3);
        let run = road::optimize(&d, &sc, 10, 8, 77).unwrap();
        for w in run.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        let best = &run.best.structure;
        assert!(validate(best, &d).valid());
        assert!(run.best.objectives().scalar().is_finite());
        // endpoints stay pinned
        let road_poly = &best.polygons[0];
        assert!(road_poly.vertices[0].distance(sc.endpoints.0) < 1e-9);
        assert!(
            road_poly
                .vertices
                .last()
                .unwrap()
                .distance(sc.endpoints.1)
                < 1e-9
        );
    }

    #[test]
    fn wave_toolkit_estimates_bi_objective() {
        let d = waves::domain();
        let tk = waves::toolkit(&d);
        assert_eq!(tk.estimator.objective_count(), 2);
    }
}
