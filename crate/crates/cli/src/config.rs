//! Experiment configuration: schema, validation and toolkit assembly.
//!
//! Configs are JSON documents with four blocks — domain, sampler, toolkit,
//! design — plus an output path and an optional scaling block. Unknown keys
//! are rejected so typos fail loudly before a run starts.

use serde::Deserialize;

use gendesign::design::{DesignConfig, DesignMode};
use gendesign::domain::Domain;
use gendesign::estimators::{
    CompositeEstimator, Estimator, ReferenceDistanceEstimator, RoadNpvEstimator, RoadScenario,
    ShadowWaveEstimator, WaveScenario,
};
use gendesign::geometry::{Point, Polygon, PolygonKind, Structure};
use gendesign::optimizers::{GaConfig, Spea2Config};
use gendesign::sampler::{SamplerConfig, StandardSampler};
use gendesign::suites::synthetic;
use gendesign::toolkit::{GaDriver, OptimizerDriver, Spea2Driver, Toolkit, VariationConfig};

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Schema(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(msg) => write!(f, "cannot read config: {msg}"),
            ConfigError::Schema(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainBlock,
    #[serde(default)]
    pub sampler: SamplerBlock,
    pub toolkit: ToolkitBlock,
    pub design: DesignBlock,
    pub output: Option<String>,
    #[serde(default)]
    pub scaling: Option<ScalingBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub allowed_area: Vec<[f64; 2]>,
    #[serde(default)]
    pub prohibited: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub targets: Vec<[f64; 2]>,
    pub min_points: usize,
    pub max_points: usize,
    pub min_polygons: usize,
    pub max_polygons: usize,
    pub polygon_kind: PolygonKind,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SamplerBlock {
    /// Polygons per sampled structure; defaults to the domain minimum.
    pub n_polygons: Option<usize>,
    pub max_points: Option<usize>,
    pub attempt_cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitBlock {
    pub mode: DesignMode,
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub optimizer: Option<OptimizerSpec>,
    #[serde(default)]
    pub variation: Option<VariationConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    ReferenceDistance {
        /// Explicit reference structure; sampled fresh when absent.
        #[serde(default)]
        reference: Option<Vec<PolygonSpec>>,
        #[serde(default)]
        reference_polygons: Option<usize>,
        #[serde(default)]
        reference_seed: Option<u64>,
    },
    RoadNpv {
        wells: Vec<[f64; 2]>,
        endpoints: [[f64; 2]; 2],
        r_road: f64,
    },
    ShadowWaves {
        /// Defaults to the domain's target points.
        #[serde(default)]
        targets: Option<Vec<[f64; 2]>>,
        wind_direction: [f64; 2],
        #[serde(default)]
        base_height: Option<f64>,
        #[serde(default)]
        protection_coefficient: Option<f64>,
    },
    Composite {
        cheap: Box<EstimatorSpec>,
        accurate: Box<EstimatorSpec>,
        threshold: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonSpec {
    pub kind: PolygonKind,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerSpec {
    Ga {
        #[serde(default)]
        elite: Option<usize>,
    },
    Spea2 {
        archive_size: usize,
        #[serde(default)]
        k_neighbors: Option<usize>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub population_size: usize,
    pub k_select: usize,
    pub max_epochs: usize,
    pub seed: u64,
    #[serde(default)]
    pub time_budget_s: Option<f64>,
    #[serde(default)]
    pub target_value: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBlock {
    pub axis: ScalingAxis,
    pub values: Vec<f64>,
    pub repetitions: usize,
    pub population: usize,
    pub generations: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingAxis {
    Polygons,
    Vertices,
    DomainScale,
}

impl From<ScalingAxis> for synthetic::SweepAxis {
    fn from(axis: ScalingAxis) -> Self {
        match axis {
            ScalingAxis::Polygons => synthetic::SweepAxis::Polygons,
            ScalingAxis::Vertices => synthetic::SweepAxis::Vertices,
            ScalingAxis::DomainScale => synthetic::SweepAxis::DomainScale,
        }
    }
}

fn to_points(raw: &[[f64; 2]]) -> Vec<Point> {
    raw.iter().map(|[x, y]| Point::new(*x, *y)).collect()
}

/// Everything a run needs, assembled from a parsed config.
pub struct Experiment {
    pub domain: Domain,
    pub toolkit: Toolkit,
    pub design: DesignConfig,
    pub sampler_cfg: SamplerConfig,
    pub output: Option<String>,
    pub scaling: Option<ScalingBlock>,
    pub digest: String,
}

impl ExperimentConfig {
    pub fn load(path: &str) -> Result<(Self, String), ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        let cfg: ExperimentConfig = serde_json::from_slice(&bytes)
            .map_err(|e| ConfigError::Schema(e.to_string()))?;
        Ok((cfg, fnv1a_hex(&bytes)))
    }

    pub fn build(self, digest: String) -> Result<Experiment, ConfigError> {
        let domain = Domain::new(
            Polygon::closed(to_points(&self.domain.allowed_area)),
            self.domain
                .prohibited
                .iter()
                .map(|p| Polygon::closed(to_points(p)))
                .collect(),
            to_points(&self.domain.targets),
            self.domain.min_points,
            self.domain.max_points,
            self.domain.min_polygons,
            self.domain.max_polygons,
            self.domain.polygon_kind,
        )
        .map_err(|e| ConfigError::Schema(format!("domain: {e}")))?;

        let mut sampler_cfg =
            SamplerConfig::for_domain(&domain, self.sampler.n_polygons.unwrap_or_else(|| {
                domain.min_polygons()
            }));
        if let Some(mp) = self.sampler.max_points {
            if mp < domain.min_points() {
                return Err(ConfigError::Schema(
                    "sampler.max_points is below domain.min_points".into(),
                ));
            }
            sampler_cfg.max_points = mp;
        }
        if let Some(cap) = self.sampler.attempt_cap {
            if cap == 0 {
                return Err(ConfigError::Schema("sampler.attempt_cap must be >= 1".into()));
            }
            sampler_cfg.attempt_cap = cap;
        }

        let design = DesignConfig {
            mode: self.toolkit.mode,
            population_size: self.design.population_size,
            k_select: self.design.k_select,
            max_epochs: self.design.max_epochs,
            time_budget_s: self.design.time_budget_s,
            target_value: self.design.target_value,
            seed: self.design.seed,
        };
        design
            .validate()
            .map_err(|e| ConfigError::Schema(format!("design: {e}")))?;

        let estimator = build_estimator(&self.toolkit.estimator, &domain, &sampler_cfg, design.seed)?;
        let objective_count = estimator.objective_count();

        let optimizer: Option<Box<dyn OptimizerDriver>> = match &self.toolkit.optimizer {
            None => None,
            Some(OptimizerSpec::Ga { elite }) => {
                if objective_count != 1 {
                    return Err(ConfigError::Schema(
                        "toolkit.optimizer: ga requires a single-objective estimator".into(),
                    ));
                }
                let mut cfg = GaConfig::new(design.population_size.max(2), design.max_epochs);
                if let Some(e) = elite {
                    cfg.elite = *e;
                }
                Some(Box::new(GaDriver::new(&cfg)))
            }
            Some(OptimizerSpec::Spea2 {
                archive_size,
                k_neighbors,
            }) => {
                let mut cfg = Spea2Config::new(
                    design.population_size.max(2),
                    (*archive_size).max(1),
                    design.max_epochs,
                );
                if let Some(k) = k_neighbors {
                    cfg.k_neighbors = *k;
                }
                Some(Box::new(Spea2Driver::new(cfg)))
            }
        };

        if matches!(
            self.toolkit.mode,
            DesignMode::Traditional | DesignMode::ExtraSampling
        ) && optimizer.is_none()
        {
            // allowed: the loop degenerates gracefully, but flag it
            eprintln!("note: {:?} mode without an optimizer skips optimization", self.toolkit.mode);
        }

        let mut toolkit = Toolkit::new(
            Box::new(StandardSampler::new(sampler_cfg)),
            estimator,
            optimizer,
        );
        if let Some(v) = self.toolkit.variation {
            toolkit = toolkit.with_variation(v);
        }
        if let EstimatorSpec::RoadNpv {
            wells,
            endpoints,
            r_road,
        } = &self.toolkit.estimator
        {
            let scenario = RoadScenario::new(
                to_points(wells),
                (
                    Point::new(endpoints[0][0], endpoints[0][1]),
                    Point::new(endpoints[1][0], endpoints[1][1]),
                ),
                *r_road,
                &domain,
            )
            .map_err(|e| ConfigError::Schema(format!("toolkit.estimator: {e}")))?;
            toolkit =
                toolkit.with_adapter(Box::new(move |s: &Structure| scenario.adapt_road(s)));
        }

        Ok(Experiment {
            domain,
            toolkit,
            design,
            sampler_cfg,
            output: self.output,
            scaling: self.scaling,
            digest,
        })
    }
}

fn build_estimator(
    spec: &EstimatorSpec,
    domain: &Domain,
    sampler_cfg: &SamplerConfig,
    seed: u64,
) -> Result<Box<dyn Estimator>, ConfigError> {
    match spec {
        EstimatorSpec::ReferenceDistance {
            reference,
            reference_polygons,
            reference_seed,
        } => {
            let reference = match reference {
                Some(polys) => Structure::new(
                    polys
                        .iter()
                        .map(|p| Polygon::new(to_points(&p.vertices), p.kind))
                        .collect(),
                ),
                None => {
                    let n = reference_polygons.unwrap_or_else(|| sampler_cfg.n_polygons.max(1));
                    let s = reference_seed.unwrap_or(seed ^ 0x5EED);
                    synthetic::sample_reference(domain, n, s)
                }
            };
            let report = gendesign::domain::validate(&reference, domain);
            if !report.valid() {
                return Err(ConfigError::Schema(format!(
                    "toolkit.estimator.reference does not satisfy the domain: {:?}",
                    report.violations
                )));
            }
            Ok(Box::new(ReferenceDistanceEstimator::new(reference, domain)))
        }
        EstimatorSpec::RoadNpv {
            wells,
            endpoints,
            r_road,
        } => {
            let scenario = RoadScenario::new(
                to_points(wells),
                (
                    Point::new(endpoints[0][0], endpoints[0][1]),
                    Point::new(endpoints[1][0], endpoints[1][1]),
                ),
                *r_road,
                domain,
            )
            .map_err(|e| ConfigError::Schema(format!("toolkit.estimator: {e}")))?;
            Ok(Box::new(RoadNpvEstimator::new(scenario, domain)))
        }
        EstimatorSpec::ShadowWaves {
            targets,
            wind_direction,
            base_height,
            protection_coefficient,
        } => {
            let targets = match targets {
                Some(t) => to_points(t),
                None => domain.targets().to_vec(),
            };
            if targets.is_empty() {
                return Err(ConfigError::Schema(
                    "toolkit.estimator: shadow_waves needs targets (block or domain)".into(),
                ));
            }
            let scenario = WaveScenario::new(
                targets,
                Point::new(wind_direction[0], wind_direction[1]),
                base_height.unwrap_or(WaveScenario::DEFAULT_BASE_HEIGHT),
                protection_coefficient.unwrap_or(std::f64::consts::LN_2),
                domain,
            )
            .map_err(|e| ConfigError::Schema(format!("toolkit.estimator: {e}")))?;
            Ok(Box::new(ShadowWaveEstimator::new(scenario, domain)))
        }
        EstimatorSpec::Composite {
            cheap,
            accurate,
            threshold,
        } => {
            let cheap = build_estimator(cheap, domain, sampler_cfg, seed)?;
            let accurate = build_estimator(accurate, domain, sampler_cfg, seed)?;
            CompositeEstimator::new(cheap, accurate, *threshold)
                .map(|c| Box::new(c) as Box<dyn Estimator>)
                .map_err(|e| ConfigError::Schema(format!("toolkit.estimator: {e}")))
        }
    }
}

/// Stable 64-bit FNV-1a digest of the raw config bytes, as hex.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
