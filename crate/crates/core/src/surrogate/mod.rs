//! Monte-Carlo surrogate of the physics model: scenario sampling, polynomial
//! features, elastic-net fitting and prediction.

mod elastic_net;
mod features;
mod model;
mod scenario;

pub use elastic_net::{coordinate_descent, objective, run_sweeps, soft_threshold, CdFit, ElasticNetConfig};
pub use features::{build_features, eval_monomial, monomial_exponents, raw_monomials, ColumnScale, Exponents, FeatureMatrix};
pub use model::{fit_elastic_net, predict, rmse, train_test_split, SurrogateModel};
pub use scenario::{sample_scenarios, MixtureComponent, ScenarioDistributions, ScenarioSample};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{segment_energy_efficiency, BusSpec, DriveCycle, EnergyError, EnvConditions, HvacModel};

pub const DEFAULT_DEGREE: u32 = 6;
pub const DEFAULT_SAMPLES: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum SurrogateError {
    #[error("grade source is empty; enrich the feed first")]
    EmptyGradeSource,
    #[error("invalid scenario distribution: {0}")]
    InvalidDistribution(String),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("design matrix has {rows} rows but {targets} targets")]
    DimensionMismatch { rows: usize, targets: usize },
    #[error("need at least 2 rows to fit, got {rows}")]
    InsufficientData { rows: usize },
    #[error("invalid elastic-net configuration: {0}")]
    InvalidConfig(String),
    #[error("coordinate descent did not converge after {iterations} sweeps (last max change {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },
    #[error("physics oracle failed: {0}")]
    Energy(#[from] EnergyError),
    #[error("model file: {0}")]
    ModelIo(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
}

/// The physics model evaluated on one drive cycle.
#[derive(Clone, Copy, Debug)]
pub struct PhysicsOracle<'a> {
    pub cycle: &'a DriveCycle,
    pub spec: &'a BusSpec,
    pub hvac: &'a HvacModel,
}

impl PhysicsOracle<'_> {
    pub fn energy_efficiency(&self, s: &ScenarioSample) -> Result<f64, EnergyError> {
        let env = EnvConditions::new(s.passengers, s.ambient_temp_c, s.grade_rad);
        segment_energy_efficiency(self.cycle, &env, self.spec, self.hvac)
    }

    /// Evaluates every sample in parallel, preserving order.
    pub fn targets(&self, samples: &[ScenarioSample]) -> Result<Vec<f64>, EnergyError> {
        samples.par_iter().map(|s| self.energy_efficiency(s)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOptions {
    pub samples: usize,
    /// Seeds both scenario sampling and the train/test split.
    pub seed: u64,
    pub degree: u32,
    pub net: ElasticNetConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { samples: DEFAULT_SAMPLES, seed: 0, degree: DEFAULT_DEGREE, net: ElasticNetConfig::default() }
    }
}

/// Samples scenarios, labels them with the physics oracle and fits the
/// surrogate.
pub fn train_surrogate(
    oracle: &PhysicsOracle<'_>,
    dists: &ScenarioDistributions,
    opts: &TrainOptions,
) -> Result<SurrogateModel, SurrogateError> {
    let samples = sample_scenarios(dists, opts.samples, opts.seed)?;
    let y = oracle.targets(&samples)?;
    let features = build_features(&samples, opts.degree)?;
    let cfg = ElasticNetConfig { seed: opts.seed, ..opts.net };
    log::info!("fitting degree-{} surrogate on {} samples", opts.degree, samples.len());
    fit_elastic_net(&features, &y, &cfg)
}
