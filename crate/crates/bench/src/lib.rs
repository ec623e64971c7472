//! Seeded workloads shared by the benchmarks.

use electrify_core::analysis::RouteRatios;
use electrify_core::energy::DriveCycle;
use electrify_core::params::ParamProfile;
use electrify_core::surrogate::{
    build_features, sample_scenarios, train_surrogate, FeatureMatrix, PhysicsOracle, ScenarioSample, SurrogateModel,
    TrainOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grades spread over a hilly city, in radians.
pub fn grade_pool() -> Vec<f64> {
    (0..64).map(|i| (i as f64 - 32.0) * 0.002).collect()
}

pub fn scenarios(n: usize, seed: u64) -> Vec<ScenarioSample> {
    let dists = ParamProfile::boston().scenario_distributions(grade_pool());
    sample_scenarios(&dists, n, seed).expect("valid distributions")
}

/// Degree-6 feature matrix and physics targets for `n` scenarios.
pub fn regression_problem(n: usize, seed: u64) -> (FeatureMatrix, Vec<f64>) {
    let profile = ParamProfile::boston();
    let cycle = DriveCycle::synthetic_stop_and_go();
    let oracle = PhysicsOracle { cycle: &cycle, spec: &profile.bus, hvac: &profile.hvac };
    let samples = scenarios(n, seed);
    let y = oracle.targets(&samples).expect("oracle runs");
    (build_features(&samples, 6).expect("features build"), y)
}

pub fn small_model() -> SurrogateModel {
    let profile = ParamProfile::boston();
    let cycle = DriveCycle::synthetic_stop_and_go();
    let oracle = PhysicsOracle { cycle: &cycle, spec: &profile.bus, hvac: &profile.hvac };
    let dists = profile.scenario_distributions(grade_pool());
    train_surrogate(&oracle, &dists, &TrainOptions { samples: 1000, seed: 1, ..Default::default() }).expect("fit")
}

pub fn ratio_cloud(n: usize, seed: u64) -> Vec<RouteRatios> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| RouteRatios {
            route_id: format!("r{i:05}"),
            tco_ratio: rng.random_range(0.5..2.5),
            ghg_ratio: rng.random_range(0.0..1.2),
        })
        .collect()
}
