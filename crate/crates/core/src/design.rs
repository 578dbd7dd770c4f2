//! The generative design loop.
//!
//! Each epoch estimates the current population, selects the k best designs
//! and produces the next population according to the run mode:
//!
//! * `Traditional` — one optimizer step on the selected designs, refilled
//!   to the population size by variation; sampling happens only once.
//! * `ExtraSampling` — one optimizer step on the selected designs, unioned
//!   with a fresh sampler batch each epoch.
//! * `RandomSearch` — no optimizer; the selected designs survive next to a
//!   fresh sampler batch.
//!
//! Epoch records stream to the caller-supplied sink as they are produced,
//! so a failed run still leaves a parseable partial trace.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate, Domain};
use crate::estimators::EstimatorError;
use crate::geometry::Structure;
use crate::optimizers::{
    hypervolume_2d, pareto_front, reference_point, select_k_best, Individual, Objectives,
    OptimizeError,
};
use crate::sampler::SampleError;
use crate::toolkit::{sample_adapted, Toolkit, VariationCtx};

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("invalid design configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Sampling(#[from] SampleError),
    #[error(transparent)]
    Estimation(#[from] EstimatorError),
    #[error("record sink failed: {0}")]
    Sink(String),
}

/// How each epoch turns the selected designs into the next population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    Traditional,
    ExtraSampling,
    RandomSearch,
}

/// Run-level settings of the design loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignConfig {
    pub mode: DesignMode,
    pub population_size: usize,
    pub k_select: usize,
    pub max_epochs: usize,
    #[serde(default)]
    pub time_budget_s: Option<f64>,
    #[serde(default)]
    pub target_value: Option<f64>,
    pub seed: u64,
}

impl DesignConfig {
    pub fn validate(&self) -> Result<(), DesignError> {
        if self.population_size < 1 {
            return Err(DesignError::BadConfig(
                "population_size must be at least 1".into(),
            ));
        }
        if self.k_select < 1 || self.k_select > self.population_size {
            return Err(DesignError::BadConfig(
                "k_select must satisfy 1 <= k_select <= population_size".into(),
            ));
        }
        if self.max_epochs < 1 {
            return Err(DesignError::BadConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// One epoch of observability data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub best_objectives: Objectives,
    pub hypervolume: Option<f64>,
    pub estimator_calls: u64,
    pub population: Vec<Structure>,
}

/// Receives epoch records as the loop produces them.
pub trait EpochSink {
    fn record(&mut self, rec: &EpochRecord) -> Result<(), String>;
}

/// Discards records; the caller still gets them from the outcome.
pub struct NullSink;

impl EpochSink for NullSink {
    fn record(&mut self, _rec: &EpochRecord) -> Result<(), String> {
        Ok(())
    }
}

impl<F> EpochSink for F
where
    F: FnMut(&EpochRecord) -> Result<(), String>,
{
    fn record(&mut self, rec: &EpochRecord) -> Result<(), String> {
        self(rec)
    }
}

/// Final designs plus the full epoch trace.
#[derive(Debug)]
pub struct DesignOutcome {
    pub designs: Vec<Individual>,
    pub records: Vec<EpochRecord>,
    pub epochs_run: usize,
}

/// Run the design loop to completion (or an early stop).
pub fn run_design(
    tk: &mut Toolkit,
    d: &Domain,
    cfg: &DesignConfig,
    sink: &mut dyn EpochSink,
) -> Result<DesignOutcome, DesignError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let multi_objective = tk.estimator.objective_count() >= 2;

    let mut population: Vec<Individual> = sample_adapted(
        d,
        tk.sampler.as_ref(),
        tk.adapter.as_deref(),
        cfg.population_size,
        &mut master,
    )?
    .into_iter()
    .map(Individual::new)
    .collect();

    let mut records: Vec<EpochRecord> = Vec::with_capacity(cfg.max_epochs);
    let mut reference: Option<Objectives> = None;
    let mut front: Vec<Objectives> = Vec::new();
    let mut final_selected: Vec<Individual> = Vec::new();

    for epoch in 0..cfg.max_epochs {
        // an independent stream per epoch, split off the master seed
        let mut epoch_rng = ChaCha8Rng::seed_from_u64(master.gen());

        // estimate the whole population (line 3)
        let batch: Vec<Structure> = population.iter().map(|i| i.structure.clone()).collect();
        let values = tk.estimator.estimate(&batch)?;
        for (ind, value) in population.iter_mut().zip(values) {
            ind.objectives = Some(value);
        }

        if multi_objective {
            if reference.is_none() {
                let objs: Vec<Objectives> =
                    population.iter().map(|i| i.objectives().clone()).collect();
                reference = Some(reference_point(&objs));
            }
            // cumulative non-dominated front; exact duplicates add nothing
            for ind in &population {
                if !front.contains(ind.objectives()) {
                    front.push(ind.objectives().clone());
                }
            }
            let keep = pareto_front(&front);
            front = keep.into_iter().map(|i| front[i].clone()).collect();
        }

        // select the k best (line 4)
        let selected = select_k_best(&population, cfg.k_select);
        let best = selected.first().expect("k_select >= 1").clone();

        let record = EpochRecord {
            epoch,
            best_objectives: best.objectives().clone(),
            hypervolume: reference
                .as_ref()
                .map(|r| hypervolume_2d(&front, r)),
            estimator_calls: tk.estimator.calls(),
            population: population.iter().map(|i| i.structure.clone()).collect(),
        };
        sink.record(&record).map_err(DesignError::Sink)?;
        records.push(record);
        final_selected = selected.clone();

        // stop criteria are checked at epoch boundaries
        let target_reached = cfg
            .target_value
            .map(|t| best.objectives().scalar() <= t)
            .unwrap_or(false);
        let out_of_time = cfg
            .time_budget_s
            .map(|b| started.elapsed().as_secs_f64() >= b)
            .unwrap_or(false);
        if epoch + 1 == cfg.max_epochs || target_reached || out_of_time {
            break;
        }

        // produce the next population
        population = match cfg.mode {
            DesignMode::RandomSearch => {
                let fresh = sample_adapted(
                    d,
                    tk.sampler.as_ref(),
                    tk.adapter.as_deref(),
                    cfg.population_size - cfg.k_select,
                    &mut epoch_rng,
                )?;
                selected
                    .into_iter()
                    .chain(fresh.into_iter().map(Individual::new))
                    .collect()
            }
            DesignMode::Traditional => {
                let mut ctx = VariationCtx {
                    domain: d,
                    sampler: tk.sampler.as_ref(),
                    variation: &tk.variation,
                    adapter: tk.adapter.as_deref(),
                    rng: &mut epoch_rng,
                };
                let stepped = match tk.optimizer.as_mut() {
                    Some(driver) => driver.step(selected, &mut ctx)?,
                    None => selected,
                };
                // refill to population size by variation over the stepped set
                let deficit = cfg.population_size.saturating_sub(stepped.len());
                let refill = vary_uniform(&stepped, deficit, &mut ctx)?;
                stepped.into_iter().chain(refill).collect()
            }
            DesignMode::ExtraSampling => {
                let stepped = {
                    let mut ctx = VariationCtx {
                        domain: d,
                        sampler: tk.sampler.as_ref(),
                        variation: &tk.variation,
                        adapter: tk.adapter.as_deref(),
                        rng: &mut epoch_rng,
                    };
                    match tk.optimizer.as_mut() {
                        Some(driver) => driver.step(selected, &mut ctx)?,
                        None => selected,
                    }
                };
                let fresh = sample_adapted(
                    d,
                    tk.sampler.as_ref(),
                    tk.adapter.as_deref(),
                    cfg.population_size.saturating_sub(stepped.len()),
                    &mut epoch_rng,
                )?;
                let mut next: Vec<Individual> = stepped
                    .into_iter()
                    .chain(fresh.into_iter().map(Individual::new))
                    .collect();
                next.truncate(cfg.population_size);
                next
            }
        };
        debug_assert_eq!(population.len(), cfg.population_size);
    }

    let epochs_run = records.len();
    Ok(DesignOutcome {
        designs: final_selected,
        records,
        epochs_run,
    })
}

/// Breed `count` new individuals by uniform parent choice over `pool`:
/// crossover with the configured probability, then mutation, with the
/// death-penalty fallback to a fresh sample.
fn vary_uniform(
    pool: &[Individual],
    count: usize,
    ctx: &mut VariationCtx<'_>,
) -> Result<Vec<Individual>, OptimizeError> {
    use crate::evolution::{crossover, mutate};
    use crate::toolkit::adapt_structure;

    let d = ctx.domain;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let a = &pool[ctx.rng.gen_range(0..pool.len())];
        let b = &pool[ctx.rng.gen_range(0..pool.len())];
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
        out.push(Individual::new(structure));
    }
    Ok(out)
}

/// Convenience check used by tests: every recorded structure validates.
pub fn records_all_valid(records: &[EpochRecord], d: &Domain) -> bool {
    records
        .iter()
        .flat_map(|r| &r.population)
        .all(|s| validate(s, d).valid())
}
