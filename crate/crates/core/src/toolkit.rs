//! The pluggable method bundle: a sampler, an estimator, an optional
//! optimizer, the variation settings shared by the evolutionary loops, and
//! an optional structure adapter applied to every produced structure
//! (e.g. pinning road endpoints after variation).

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::domain::{validate, Domain};
use crate::estimators::Estimator;
use crate::evolution::MutationConfig;
use crate::optimizers::{GaConfig, Individual, OptimizeError, Spea2, Spea2Config};
use crate::sampler::{SampleError, Sampler};
use crate::geometry::Structure;

/// Variation settings used whenever offspring are bred.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationConfig {
    pub mutation: MutationConfig,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            mutation: MutationConfig::default(),
            crossover_prob: 0.7,
            mutation_prob: 0.9,
        }
    }
}

/// Rewrites applied to every structure the engine produces, after sampling
/// and after variation.
pub type StructureAdapter = dyn Fn(&Structure) -> Structure + Send + Sync;

/// Everything an optimizer step may draw on besides the selected individuals.
pub struct VariationCtx<'a> {
    pub domain: &'a Domain,
    pub sampler: &'a dyn Sampler,
    pub variation: &'a VariationConfig,
    pub adapter: Option<&'a StructureAdapter>,
    pub rng: &'a mut dyn RngCore,
}

/// A pluggable optimizer: one improvement step per design epoch over the
/// selected individuals, returning the same number of individuals.
pub trait OptimizerDriver {
    fn step(
        &mut self,
        selected: Vec<Individual>,
        ctx: &mut VariationCtx<'_>,
    ) -> Result<Vec<Individual>, OptimizeError>;

    /// The elite archive, for optimizers that keep one.
    fn archive(&self) -> Option<&[Individual]> {
        None
    }
}

/// The bound method triple driving a design run.
pub struct Toolkit {
    pub sampler: Box<dyn Sampler>,
    pub estimator: Box<dyn Estimator>,
    pub optimizer: Option<Box<dyn OptimizerDriver>>,
    pub variation: VariationConfig,
    pub adapter: Option<Box<StructureAdapter>>,
}

impl Toolkit {
    pub fn new(
        sampler: Box<dyn Sampler>,
        estimator: Box<dyn Estimator>,
        optimizer: Option<Box<dyn OptimizerDriver>>,
    ) -> Self {
        Self {
            sampler,
            estimator,
            optimizer,
            variation: VariationConfig::default(),
            adapter: None,
        }
    }

    pub fn with_variation(mut self, variation: VariationConfig) -> Self {
        self.variation = variation;
        self
    }

    pub fn with_adapter(mut self, adapter: Box<StructureAdapter>) -> Self {
        self.adapter = Some(adapter);
        self
    }
}

/// Apply the adapter to a freshly produced structure and re-establish
/// validity. The adapter may break validity (it rewrites vertices), so
/// invalid results are replaced by adapted fresh samples.
pub(crate) fn adapt_structure(
    structure: Structure,
    d: &Domain,
    adapter: Option<&StructureAdapter>,
    sampler: &dyn Sampler,
    rng: &mut dyn RngCore,
) -> Result<Structure, OptimizeError> {
    let adapter = match adapter {
        None => return Ok(structure),
        Some(f) => f,
    };
    let mut adapted = adapter(&structure);
    for _ in 0..20 {
        if validate(&adapted, d).valid() {
            return Ok(adapted);
        }
        let fresh = sampler
            .sample_batch(d, 1, rng)?
            .pop()
            .expect("batch of one");
        adapted = adapter(&fresh);
    }
    Err(OptimizeError::Sampling(SampleError::Exhausted {
        attempts: 20,
    }))
}

/// Sample a batch and run every structure through the adapter.
pub(crate) fn sample_adapted(
    d: &Domain,
    sampler: &dyn Sampler,
    adapter: Option<&StructureAdapter>,
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<Structure>, OptimizeError> {
    let batch = sampler.sample_batch(d, count, rng)?;
    batch
        .into_iter()
        .map(|s| adapt_structure(s, d, adapter, sampler, rng))
        .collect()
}

/// SPEA2 as a per-epoch optimizer: keeps its archive across epochs and
/// breeds as many offspring as it was handed individuals.
pub struct Spea2Driver {
    algo: Spea2,
}

impl Spea2Driver {
    pub fn new(cfg: Spea2Config) -> Self {
        Self {
            algo: Spea2::new(cfg),
        }
    }
}

impl OptimizerDriver for Spea2Driver {
    fn step(
        &mut self,
        selected: Vec<Individual>,
        ctx: &mut VariationCtx<'_>,
    ) -> Result<Vec<Individual>, OptimizeError> {
        let n = selected.len();
        self.algo.evolve(selected, n, ctx)
    }

    fn archive(&self) -> Option<&[Individual]> {
        Some(&self.algo.archive)
    }
}

/// One elitist GA generation per design epoch over the selected set.
pub struct GaDriver {
    elite: usize,
}

impl GaDriver {
    pub fn new(cfg: &GaConfig) -> Self {
        Self { elite: cfg.elite }
    }
}

impl OptimizerDriver for GaDriver {
    fn step(
        &mut self,
        mut selected: Vec<Individual>,
        ctx: &mut VariationCtx<'_>,
    ) -> Result<Vec<Individual>, OptimizeError> {
        selected.sort_by(|a, b| {
            a.objectives()
                .scalar()
                .partial_cmp(&b.objectives().scalar())
                .expect("no NaN objectives")
        });
        let elite = self.elite.min(selected.len());
        let mut next: Vec<Individual> = selected[..elite].to_vec();
        next.extend(crate::optimizers::breed_offspring(
            &selected,
            |i: &Individual| i.objectives().scalar(),
            selected.len() - elite,
            ctx,
        )?);
        Ok(next)
    }
}
