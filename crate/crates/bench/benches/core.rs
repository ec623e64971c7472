use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use electrify_bench::{ratio_cloud, regression_problem, scenarios, small_model};
use electrify_core::analysis::pareto_frontier;
use electrify_core::energy::{step_energy, BusSpec, DriveCycle, EnvConditions, HvacModel};
use electrify_core::surrogate::{coordinate_descent, ElasticNetConfig, PhysicsOracle};
use ndarray::Array1;

fn physics(c: &mut Criterion) {
    let spec = BusSpec::default();
    let hvac = HvacModel::default();
    let env = EnvConditions::new(30, -5.0, 0.02);
    c.bench_function("step_energy", |b| b.iter(|| step_energy(black_box(8.0), black_box(9.2), 1.0, &env, &spec, &hvac)));

    let cycle = DriveCycle::synthetic_stop_and_go();
    let oracle = PhysicsOracle { cycle: &cycle, spec: &spec, hvac: &hvac };
    let s = scenarios(1, 3)[0];
    c.bench_function("cycle_energy_efficiency", |b| b.iter(|| oracle.energy_efficiency(black_box(&s))));
}

fn surrogate(c: &mut Criterion) {
    let model = small_model();
    let batch = scenarios(10_000, 5);
    c.bench_function("predict_batch_10k", |b| b.iter(|| model.predict_batch(black_box(&batch))));

    let (features, y) = regression_problem(2000, 9);
    let y = Array1::from(y);
    let frozen: Vec<bool> = features.scales.iter().map(|s| s.constant).collect();
    let cfg = ElasticNetConfig::default();
    let mut group = c.benchmark_group("elastic_net");
    group.sample_size(10);
    group.bench_function("coordinate_descent_2000x83", |b| {
        b.iter(|| coordinate_descent(features.values.view(), y.view(), &cfg, &frozen).expect("converges"))
    });
    group.finish();
}

fn analysis(c: &mut Criterion) {
    c.bench_function("pareto_frontier_5000", |b| {
        b.iter_batched(|| ratio_cloud(5000, 11), |pts| pareto_frontier(&pts), BatchSize::SmallInput)
    });
}

criterion_group!(benches, physics, surrogate, analysis);
criterion_main!(benches);
