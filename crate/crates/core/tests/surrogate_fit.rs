use electrify_core::energy::{BusSpec, DriveCycle, HvacModel};
use electrify_core::surrogate::*;
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

const BOSTON_MONTHS: [f64; 12] = [-5.0, -2.5, 3.5, 9.5, 15.5, 21.0, 25.0, 24.0, 20.0, 13.5, 7.5, 0.0];

fn dists() -> ScenarioDistributions {
    let grades: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.002).collect();
    ScenarioDistributions::monthly(40, &BOSTON_MONTHS, 3.0, grades)
}

/// Least squares with intercept through the normal equations, solved by
/// Cholesky: an implementation independent of coordinate descent.
fn normal_equations(x: &Array2<f64>, y: &[f64]) -> (f64, Vec<f64>) {
    let (n, p) = x.dim();
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let b = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let sol = ata.cholesky().expect("full rank").solve(&atb);
    (sol[0], sol.iter().skip(1).copied().collect())
}

#[test]
fn unregularized_fit_matches_normal_equations() {
    // Up to 10 features: a degree-2 expansion has 9.
    let samples = sample_scenarios(&dists(), 300, 11).unwrap();
    let f = build_features(&samples, 2).unwrap();
    assert_eq!(f.n_features(), 9);
    let cycle = DriveCycle::synthetic_stop_and_go();
    let (spec, hvac) = (BusSpec::default(), HvacModel::default());
    let y = PhysicsOracle { cycle: &cycle, spec: &spec, hvac: &hvac }.targets(&samples).unwrap();

    let cfg = ElasticNetConfig { l1_weight: 0.0, l2_weight: 0.0, tolerance: 1e-13, max_iterations: 1_000_000, holdout_fraction: 0.0, seed: 0 };
    let model = fit_elastic_net(&f, &y, &cfg).unwrap();
    let (b, w) = normal_equations(&f.values, &y);
    for (i, s) in samples.iter().enumerate() {
        let reference = b + f.values.row(i).iter().zip(&w).map(|(x, c)| x * c).sum::<f64>();
        assert!((model.predict(s) - reference).abs() < 1e-6, "row {i}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_full_rank_problems_match_normal_equations(
        n in 12usize..40,
        p in 1usize..=10,
        seed in 0u64..1000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0));
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = ElasticNetConfig { l1_weight: 0.0, l2_weight: 0.0, tolerance: 1e-12, max_iterations: 2_000_000, holdout_fraction: 0.0, seed: 0 };
        let fit = coordinate_descent(x.view(), Array1::from(y.clone()).view(), &cfg, &vec![false; p]).unwrap();
        let (b, w) = normal_equations(&x, &y);
        for i in 0..n {
            let row = x.row(i);
            let ours = fit.intercept + row.iter().zip(&fit.coefficients).map(|(a, c)| a * c).sum::<f64>();
            let theirs = b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            prop_assert!((ours - theirs).abs() < 1e-6, "{} vs {}", ours, theirs);
        }
        for pair in fit.objective_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12);
        }
    }
}

#[test]
fn training_is_deterministic_and_accurate() {
    let cycle = DriveCycle::synthetic_stop_and_go();
    let (spec, hvac) = (BusSpec::default(), HvacModel::default());
    let oracle = PhysicsOracle { cycle: &cycle, spec: &spec, hvac: &hvac };
    let opts = TrainOptions { samples: 2000, seed: 42, ..Default::default() };
    let a = train_surrogate(&oracle, &dists(), &opts).unwrap();
    let b = train_surrogate(&oracle, &dists(), &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.coefficients.len(), 83);
    assert_eq!((a.n_train, a.n_test), (1600, 400));

    // Fresh scenarios, never seen in training.
    let fresh = sample_scenarios(&dists(), 500, 4242).unwrap();
    let truth = oracle.targets(&fresh).unwrap();
    let pred = a.predict_batch(&fresh);
    let mean_abs = truth.iter().map(|v| v.abs()).sum::<f64>() / truth.len() as f64;
    assert!(rmse(&pred, &truth) <= 0.05 * mean_abs);
    assert!(a.test_rmse.unwrap() <= 0.05 * mean_abs);
}
