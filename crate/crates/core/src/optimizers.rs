//! Pareto machinery and the evolutionary optimizers.
//!
//! Provides dominance tests, Pareto-front extraction, 2D hypervolume, the
//! strength-Pareto fitness assignment with k-th-neighbor density, archive
//! truncation via environmental selection, plus the full SPEA2 loop and a
//! single-objective elitist GA. All objectives are minimized.

use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Domain;
use crate::estimators::{Estimator, EstimatorError};
use crate::evolution::{crossover, mutate};
use crate::geometry::Structure;
use crate::sampler::SampleError;
use crate::toolkit::{adapt_structure, sample_adapted, Toolkit, VariationCtx};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Sampling(#[from] SampleError),
    #[error(transparent)]
    Estimation(#[from] EstimatorError),
}

/// A fixed-length objective vector; minimization convention, NaN forbidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objectives(Vec<f64>);

impl Objectives {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "objective vector must be non-empty");
        assert!(
            values.iter().all(|v| !v.is_nan()),
            "objective values must not be NaN"
        );
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First objective; the scalar objective when m = 1.
    pub fn scalar(&self) -> f64 {
        self.0[0]
    }

    /// Euclidean distance in objective space.
    pub fn distance(&self, other: &Objectives) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A candidate design with its cached objectives and scalar fitness.
/// Fitness is infinity until assigned; lower is better.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub structure: Structure,
    pub objectives: Option<Objectives>,
    pub fitness: f64,
}

impl Individual {
    pub fn new(structure: Structure) -> Self {
        Self {
            structure,
            objectives: None,
            fitness: f64::INFINITY,
        }
    }

    pub fn with_objectives(structure: Structure, objectives: Objectives) -> Self {
        Self {
            structure,
            objectives: Some(objectives),
            fitness: f64::INFINITY,
        }
    }

    pub fn objectives(&self) -> &Objectives {
        self.objectives.as_ref().expect("individual not estimated")
    }
}

/// Strict Pareto domination: `a` is no worse everywhere and better somewhere.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    assert_eq!(a.len(), b.len(), "objective vectors differ in length");
    let mut strictly_better = false;
    for (x, y) in a.values().iter().zip(b.values()) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Indices of the elements dominated by no other element. Duplicates are
/// mutually non-dominating and all retained.
pub fn pareto_front(pop: &[Objectives]) -> Vec<usize> {
    assert!(!pop.is_empty(), "empty population has no front");
    (0..pop.len())
        .filter(|&i| !pop.iter().any(|other| dominates(other, &pop[i])))
        .collect()
}

/// Area dominated by a 2D front relative to a reference point. Points that
/// do not weakly dominate the reference are clipped out.
pub fn hypervolume_2d(front: &[Objectives], reference: &Objectives) -> f64 {
    assert_eq!(reference.len(), 2, "2D hypervolume needs a 2D reference");
    let (rx, ry) = (reference.values()[0], reference.values()[1]);
    let mut pts: Vec<(f64, f64)> = front
        .iter()
        .map(|o| {
            assert_eq!(o.len(), 2, "2D hypervolume needs 2D objectives");
            (o.values()[0], o.values()[1])
        })
        .filter(|(x, y)| *x <= rx && *y <= ry)
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in objectives"));

    // sweep left to right, summing disjoint strips under the staircase
    let mut area = 0.0;
    let mut prev_y = ry;
    for (x, y) in pts {
        if y < prev_y {
            area += (rx - x) * (prev_y - y);
            prev_y = y;
        }
    }
    area
}

/// Population, archive size and step budget of the SPEA2 loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spea2Config {
    pub population_size: usize,
    pub archive_size: usize,
    pub max_steps: usize,
    /// 0 selects the usual sqrt(population + archive) neighbor index.
    #[serde(default)]
    pub k_neighbors: usize,
}

impl Spea2Config {
    pub fn new(population_size: usize, archive_size: usize, max_steps: usize) -> Self {
        assert!(population_size >= 2 && archive_size >= 1 && max_steps >= 1);
        Self {
            population_size,
            archive_size,
            max_steps,
            k_neighbors: 0,
        }
    }

    pub fn k(&self) -> usize {
        if self.k_neighbors > 0 {
            self.k_neighbors
        } else {
            (((self.population_size + self.archive_size) as f64).sqrt().round() as usize).max(1)
        }
    }
}

/// Assign strength-Pareto fitness F = R + D over the union of population
/// and archive: R sums the strengths of an individual's dominators, and
/// D = 1 / (d_k + 2) from the distance to the k-th nearest other member.
pub fn spea2_assign_fitness(pop: &mut [Individual], arch: &mut [Individual], k: usize) {
    assert!(k >= 1, "neighbor index must be at least 1");
    let objs: Vec<Objectives> = pop
        .iter()
        .chain(arch.iter())
        .map(|i| i.objectives().clone())
        .collect();
    let fitness = spea2_fitness_values(&objs, k);
    for (ind, f) in pop.iter_mut().chain(arch.iter_mut()).zip(fitness) {
        ind.fitness = f;
    }
}

/// Raw + density fitness for a set of objective vectors.
pub(crate) fn spea2_fitness_values(objs: &[Objectives], k: usize) -> Vec<f64> {
    let n = objs.len();
    let mut strength = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(&objs[i], &objs[j]) {
                strength[i] += 1;
            }
        }
    }
    let mut raw = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(&objs[j], &objs[i]) {
                raw[i] += strength[j] as f64;
            }
        }
    }
    (0..n)
        .map(|i| {
            let mut dists: Vec<f64> = (0..n)
                .filter(|j| *j != i)
                .map(|j| objs[i].distance(&objs[j]))
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            let d_k = if dists.is_empty() {
                0.0
            } else {
                dists[k.min(dists.len()) - 1]
            };
            raw[i] + 1.0 / (d_k + 2.0)
        })
        .collect()
}

/// Fill the next archive: all non-dominated individuals (F < 1), truncated
/// when too many, topped up with the best dominated individuals when too
/// few. Requires fitness assigned over pop and arch jointly.
///
/// Two-objective truncation removes the member with the smallest exclusive
/// hypervolume contribution (ties broken by the nearest-neighbor rule),
/// which keeps the archive hypervolume from shrinking as the front fills
/// up; other dimensionalities use the nearest-neighbor rule alone.
pub fn environmental_selection(
    pop: &[Individual],
    arch: &[Individual],
    target_size: usize,
) -> Vec<Individual> {
    environmental_selection_ref(pop, arch, target_size, None)
}

/// `environmental_selection` measuring hypervolume contributions against a
/// caller-fixed reference point instead of a self-derived one.
pub fn environmental_selection_ref(
    pop: &[Individual],
    arch: &[Individual],
    target_size: usize,
    reference: Option<&Objectives>,
) -> Vec<Individual> {
    let union: Vec<&Individual> = pop.iter().chain(arch.iter()).collect();
    let mut nondominated: Vec<Individual> = union
        .iter()
        .filter(|i| i.fitness < 1.0)
        .map(|i| (*i).clone())
        .collect();

    if nondominated.len() > target_size {
        let bi_objective = nondominated[0].objectives().len() == 2;
        while nondominated.len() > target_size {
            let idx = if bi_objective {
                least_hv_contributor(&nondominated, reference)
            } else {
                nearest_neighbor_victim(&nondominated)
            };
            nondominated.remove(idx);
        }
        return nondominated;
    }
    if nondominated.len() < target_size {
        let mut dominated: Vec<&Individual> =
            union.iter().filter(|i| i.fitness >= 1.0).copied().collect();
        dominated.sort_by(|a, b| a.fitness.partial_cmp(&b.fitness).expect("finite fitness"));
        for ind in dominated {
            if nondominated.len() == target_size {
                break;
            }
            nondominated.push(ind.clone());
        }
    }
    nondominated
}

/// Index of the member whose removal costs the least hypervolume; ties go
/// to the nearest-neighbor rule, then to the lowest index.
fn least_hv_contributor(members: &[Individual], reference: Option<&Objectives>) -> usize {
    let objs: Vec<Objectives> = members.iter().map(|i| i.objectives().clone()).collect();
    let reference = reference.cloned().unwrap_or_else(|| local_reference(&objs));
    let total = hypervolume_2d(&objs, &reference);

    let mut best_idx = 0usize;
    let mut best_contribution = f64::INFINITY;
    for i in 0..objs.len() {
        let rest: Vec<Objectives> = objs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, o)| o.clone())
            .collect();
        let contribution = total - hypervolume_2d(&rest, &reference);
        if contribution < best_contribution - 1e-12 {
            best_contribution = contribution;
            best_idx = i;
        } else if (contribution - best_contribution).abs() <= 1e-12 && i != best_idx {
            // tie: prefer the member with the lexicographically smaller
            // neighbor-distance vector
            if lex_less(
                &sorted_neighbor_distances(members, i),
                &sorted_neighbor_distances(members, best_idx),
            ) {
                best_idx = i;
            }
        }
    }
    best_idx
}

/// Reference just beyond the componentwise worst of a member set.
fn local_reference(objs: &[Objectives]) -> Objectives {
    let m = objs[0].len();
    let values = (0..m)
        .map(|k| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for o in objs {
                lo = lo.min(o.values()[k]);
                hi = hi.max(o.values()[k]);
            }
            hi + 0.1 * (hi - lo).max(1.0)
        })
        .collect();
    Objectives::new(values)
}

/// Index of the member with the lexicographically smallest sorted distance
/// vector to the others (the classic crowding-out rule).
fn nearest_neighbor_victim(members: &[Individual]) -> usize {
    let mut worst: Option<(usize, Vec<f64>)> = None;
    for i in 0..members.len() {
        let dists = sorted_neighbor_distances(members, i);
        let smaller = match &worst {
            None => true,
            Some((_, best)) => lex_less(&dists, best),
        };
        if smaller {
            worst = Some((i, dists));
        }
    }
    worst.expect("non-empty truncation set").0
}

fn sorted_neighbor_distances(members: &[Individual], i: usize) -> Vec<f64> {
    let mut dists: Vec<f64> = (0..members.len())
        .filter(|j| *j != i)
        .map(|j| members[i].objectives().distance(members[j].objectives()))
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    dists
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// The k best individuals: by the scalar objective when m = 1, by
/// strength-Pareto fitness otherwise. Ties keep insertion order.
pub fn select_k_best(pop: &[Individual], k: usize) -> Vec<Individual> {
    assert!(k >= 1, "selection needs k >= 1");
    let mut out: Vec<Individual> = pop.to_vec();
    let m = out
        .first()
        .map(|i| i.objectives().len())
        .unwrap_or(1);
    if m == 1 {
        out.sort_by(|a, b| {
            a.objectives()
                .scalar()
                .partial_cmp(&b.objectives().scalar())
                .expect("no NaN objectives")
        });
    } else {
        let k_n = ((out.len() as f64).sqrt().round() as usize).max(1);
        spea2_assign_fitness(&mut out, &mut [], k_n);
        out.sort_by(|a, b| a.fitness.partial_cmp(&b.fitness).expect("finite fitness"));
    }
    out.truncate(k);
    out
}

/// Worse-than-anything reference point derived from a set of objective
/// vectors: componentwise max pushed 10% further from the ideal.
pub fn reference_point(objs: &[Objectives]) -> Objectives {
    assert!(!objs.is_empty());
    let m = objs[0].len();
    let values = (0..m)
        .map(|i| {
            let max = objs
                .iter()
                .map(|o| o.values()[i])
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            if max > 0.0 {
                max * 1.1
            } else if max == 0.0 {
                0.1
            } else if max.is_finite() {
                max * 0.9
            } else {
                1.0
            }
        })
        .collect();
    Objectives::new(values)
}

/// Estimate every individual that has no cached objectives yet.
pub fn estimate_missing(
    estimator: &dyn Estimator,
    pop: &mut [Individual],
) -> Result<(), OptimizeError> {
    let missing: Vec<usize> = pop
        .iter()
        .enumerate()
        .filter(|(_, i)| i.objectives.is_none())
        .map(|(i, _)| i)
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    let batch: Vec<Structure> = missing.iter().map(|i| pop[*i].structure.clone()).collect();
    let values = estimator.estimate(&batch)?;
    for (slot, value) in missing.into_iter().zip(values) {
        pop[slot].objectives = Some(value);
    }
    Ok(())
}

/// Binary tournament by a fitness key; lower wins, ties go to the first draw.
fn binary_tournament<'a, F>(pool: &'a [Individual], key: &F, rng: &mut dyn RngCore) -> &'a Individual
where
    F: Fn(&Individual) -> f64,
{
    let a = &pool[rng.gen_range(0..pool.len())];
    let b = &pool[rng.gen_range(0..pool.len())];
    if key(a) <= key(b) {
        a
    } else {
        b
    }
}

/// Produce `count` offspring from the mating pool: crossover with
/// probability `crossover_prob` (falling back to the first parent when it
/// fails), then mutation with probability `mutation_prob` (falling back to
/// a fresh sample when repair fails — the death penalty).
pub(crate) fn breed_offspring<F>(
    pool: &[Individual],
    key: F,
    count: usize,
    ctx: &mut VariationCtx<'_>,
) -> Result<Vec<Individual>, OptimizeError>
where
    F: Fn(&Individual) -> f64,
{
    let d = ctx.domain;
    let mut offspring = Vec::with_capacity(count);
    for _ in 0..count {
        let a = binary_tournament(pool, &key, ctx.rng);
        let b = binary_tournament(pool, &key, ctx.rng);
        let mut structure = if ctx.rng.gen_bool(ctx.variation.crossover_prob) {
            crossover(&a.structure, &b.structure, d, ctx.rng)
                .unwrap_or_else(|_| a.structure.clone())
        } else {
            a.structure.clone()
        };
        if ctx.rng.gen_bool(ctx.variation.mutation_prob) {
            structure = match mutate(&structure, d, &ctx.variation.mutation, ctx.rng) {
                Ok(s) => s,
                Err(_) => ctx
                    .sampler
                    .sample_batch(d, 1, ctx.rng)?
                    .pop()
                    .expect("batch of one"),
            };
        }
        let structure = adapt_structure(structure, d, ctx.adapter, ctx.sampler, ctx.rng)?;
        offspring.push(Individual::new(structure));
    }
    Ok(offspring)
}

/// SPEA2 state: the configuration, the elite archive carried across steps,
/// and (optionally) the fixed reference point hypervolume contributions are
/// measured against during truncation.
#[derive(Debug, Clone)]
pub struct Spea2 {
    pub cfg: Spea2Config,
    pub archive: Vec<Individual>,
    pub reference: Option<Objectives>,
}

impl Spea2 {
    pub fn new(cfg: Spea2Config) -> Self {
        Self {
            cfg,
            archive: Vec::new(),
            reference: None,
        }
    }

    /// One step over an estimated population: fitness assignment over
    /// population and archive, environmental selection into the next
    /// archive, then binary-tournament mating and variation to produce
    /// `n_offspring` new individuals.
    pub fn evolve(
        &mut self,
        mut population: Vec<Individual>,
        n_offspring: usize,
        ctx: &mut VariationCtx<'_>,
    ) -> Result<Vec<Individual>, OptimizeError> {
        spea2_assign_fitness(&mut population, &mut self.archive, self.cfg.k());
        let next_archive = environmental_selection_ref(
            &population,
            &self.archive,
            self.cfg.archive_size,
            self.reference.as_ref(),
        );
        self.archive = next_archive;

        let pool: Vec<Individual> = population
            .iter()
            .chain(self.archive.iter())
            .cloned()
            .collect();
        breed_offspring(&pool, |i: &Individual| i.fitness, n_offspring, ctx)
    }
}

/// Per-step metrics of a SPEA2 run.
#[derive(Debug, Clone, Serialize)]
pub struct StepMetrics {
    pub step: usize,
    pub hypervolume: f64,
    pub archive_size: usize,
}

/// Outcome of a full SPEA2 run: the final archive, the per-step
/// hypervolume trace, and the reference point the trace was measured from.
#[derive(Debug)]
pub struct Spea2Run {
    pub archive: Vec<Individual>,
    pub metrics: Vec<StepMetrics>,
    pub reference: Objectives,
}

/// The complete SPEA2 loop: random initialization from the toolkit's
/// sampler, then `max_steps` rounds of estimation, fitness assignment,
/// environmental selection, mating and variation.
pub fn spea2_run(
    tk: &Toolkit,
    d: &Domain,
    cfg: &Spea2Config,
    rng: &mut dyn RngCore,
) -> Result<Spea2Run, OptimizeError> {
    let mut population: Vec<Individual> = sample_adapted(
        d,
        tk.sampler.as_ref(),
        tk.adapter.as_deref(),
        cfg.population_size,
        rng,
    )?
    .into_iter()
    .map(Individual::new)
    .collect();

    let mut algo = Spea2::new(cfg.clone());
    let mut metrics = Vec::with_capacity(cfg.max_steps);
    let mut reference: Option<Objectives> = None;

    for step in 0..cfg.max_steps {
        estimate_missing(tk.estimator.as_ref(), &mut population)?;
        if reference.is_none() {
            let objs: Vec<Objectives> =
                population.iter().map(|i| i.objectives().clone()).collect();
            reference = Some(reference_point(&objs));
            algo.reference = reference.clone();
        }
        let mut ctx = VariationCtx {
            domain: d,
            sampler: tk.sampler.as_ref(),
            variation: &tk.variation,
            adapter: tk.adapter.as_deref(),
            rng,
        };
        let next = algo.evolve(population, cfg.population_size, &mut ctx)?;
        let reference = reference.as_ref().expect("set on first step");
        let front: Vec<Objectives> = algo
            .archive
            .iter()
            .map(|i| i.objectives().clone())
            .collect();
        metrics.push(StepMetrics {
            step,
            hypervolume: hypervolume_2d(&front, reference),
            archive_size: algo.archive.len(),
        });
        population = next;
    }

    Ok(Spea2Run {
        archive: algo.archive,
        metrics,
        reference: reference.expect("at least one step"),
    })
}

/// Elitist generational GA settings (single objective).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Individuals carried unchanged into the next generation.
    #[serde(default = "GaConfig::default_elite")]
    pub elite: usize,
}

impl GaConfig {
    fn default_elite() -> usize {
        2
    }

    pub fn new(population_size: usize, max_generations: usize) -> Self {
        assert!(population_size >= 2 && max_generations >= 1);
        Self {
            population_size,
            max_generations,
            elite: Self::default_elite(),
        }
    }
}

/// Outcome of a GA run: the best individual and the best-objective trace.
#[derive(Debug)]
pub struct GaRun {
    pub best: Individual,
    pub trace: Vec<f64>,
}

/// Elitist generational GA with binary tournament selection.
pub fn ga_run(
    tk: &Toolkit,
    d: &Domain,
    cfg: &GaConfig,
    rng: &mut dyn RngCore,
) -> Result<GaRun, OptimizeError> {
    assert_eq!(
        tk.estimator.objective_count(),
        1,
        "the GA optimizes a single objective"
    );
    let mut population: Vec<Individual> = sample_adapted(
        d,
        tk.sampler.as_ref(),
        tk.adapter.as_deref(),
        cfg.population_size,
        rng,
    )?
    .into_iter()
    .map(Individual::new)
    .collect();

    let mut trace = Vec::with_capacity(cfg.max_generations);
    for generation in 0..cfg.max_generations {
        estimate_missing(tk.estimator.as_ref(), &mut population)?;
        population.sort_by(|a, b| {
            a.objectives()
                .scalar()
                .partial_cmp(&b.objectives().scalar())
                .expect("no NaN objectives")
        });
        trace.push(population[0].objectives().scalar());
        if generation + 1 == cfg.max_generations {
            break;
        }

        let elite = cfg.elite.min(population.len());
        let mut next: Vec<Individual> = population[..elite].to_vec();
        let mut ctx = VariationCtx {
            domain: d,
            sampler: tk.sampler.as_ref(),
            variation: &tk.variation,
            adapter: tk.adapter.as_deref(),
            rng,
        };
        next.extend(breed_offspring(
            &population,
            |i: &Individual| i.objectives().scalar(),
            cfg.population_size - elite,
            &mut ctx,
        )?);
        population = next;
    }

    let best = population
        .into_iter()
        .next()
        .expect("population is non-empty");
    Ok(GaRun { best, trace })
}
