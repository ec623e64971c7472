use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::elastic_net::{coordinate_descent, ElasticNetConfig};
use super::features::{eval_monomial, ColumnScale, Exponents, FeatureMatrix};
use super::scenario::ScenarioSample;
use super::SurrogateError;

/// Fitted polynomial energy-efficiency predictor (kWh/km).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub degree: u32,
    /// Exponents of (passengers, temperature °C, grade rad) per coefficient.
    pub exponents: Vec<Exponents>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub standardization: Vec<ColumnScale>,
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub l1_weight: f64,
    pub l2_weight: f64,
    pub seed: u64,
    pub sweeps: usize,
    /// Hex SHA-256 of the model serialized with this field empty.
    #[serde(default)]
    pub content_hash: String,
}

impl SurrogateModel {
    /// A model that predicts `intercept` everywhere.
    pub fn constant(degree: u32, intercept: f64) -> Self {
        let exponents = super::features::monomial_exponents(degree);
        let p = exponents.len();
        let mut m = SurrogateModel {
            degree,
            exponents,
            coefficients: vec![0.0; p],
            intercept,
            standardization: vec![ColumnScale { mean: 0.0, scale: 1.0, constant: false }; p],
            train_rmse: 0.0,
            test_rmse: None,
            n_train: 0,
            n_test: 0,
            l1_weight: 0.0,
            l2_weight: 0.0,
            seed: 0,
            sweeps: 0,
            content_hash: String::new(),
        };
        m.content_hash = m.compute_hash();
        m
    }

    pub fn compute_hash(&self) -> String {
        let mut unhashed = self.clone();
        unhashed.content_hash.clear();
        let bytes = serde_json::to_vec(&unhashed).expect("model serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn check(&self) -> Result<(), SurrogateError> {
        let p = self.exponents.len();
        if self.coefficients.len() != p || self.standardization.len() != p {
            return Err(SurrogateError::CorruptModel(format!(
                "{} exponents, {} coefficients, {} standardization entries",
                p,
                self.coefficients.len(),
                self.standardization.len()
            )));
        }
        if let Some(s) = self.standardization.iter().find(|s| !(s.scale > 0.0)) {
            return Err(SurrogateError::CorruptModel(format!("non-positive scale {}", s.scale)));
        }
        let expected = self.compute_hash();
        if self.content_hash != expected {
            return Err(SurrogateError::CorruptModel(format!(
                "content hash {} does not match {}",
                self.content_hash, expected
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SurrogateError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).map_err(|e| SurrogateError::ModelIo(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| SurrogateError::ModelIo(format!("{}: {e}", path.display())))
    }

    /// Loads and verifies a model file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SurrogateError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| SurrogateError::ModelIo(format!("{}: {e}", path.display())))?;
        let model: SurrogateModel =
            serde_json::from_str(&raw).map_err(|e| SurrogateError::ModelIo(format!("{}: {e}", path.display())))?;
        model.check()?;
        Ok(model)
    }

    pub fn predict(&self, s: &ScenarioSample) -> f64 {
        self.intercept
            + self
                .exponents
                .iter()
                .zip(&self.coefficients)
                .zip(&self.standardization)
                .filter(|((_, &w), _)| w != 0.0)
                .map(|((&e, &w), sc)| w * sc.apply(eval_monomial(e, s)))
                .sum::<f64>()
    }

    pub fn predict_batch(&self, samples: &[ScenarioSample]) -> Vec<f64> {
        samples.par_iter().map(|s| self.predict(s)).collect()
    }
}

pub fn predict(model: &SurrogateModel, scenario: &ScenarioSample) -> f64 {
    model.predict(scenario)
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Seeded split of `n` row indices into (train, test).
pub fn train_test_split(n: usize, holdout_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let n_test = ((n as f64 * holdout_fraction).round() as usize).min(n.saturating_sub(2));
    if n_test == 0 {
        return (idx, Vec::new());
    }
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(n - n_test);
    (idx, test)
}

fn predict_rows(x: &Array2<f64>, w: &[f64], b: f64) -> Vec<f64> {
    (x.dot(&Array1::from(w.to_vec())) + b).to_vec()
}

/// Fits the elastic net on a seeded train split of `(features, y)` and
/// reports train and held-out RMSE.
pub fn fit_elastic_net(features: &FeatureMatrix, y: &[f64], cfg: &ElasticNetConfig) -> Result<SurrogateModel, SurrogateError> {
    cfg.validate()?;
    let n = features.n_rows();
    if n != y.len() {
        return Err(SurrogateError::DimensionMismatch { rows: n, targets: y.len() });
    }
    if n < 2 {
        return Err(SurrogateError::InsufficientData { rows: n });
    }
    let (train, test) = train_test_split(n, cfg.holdout_fraction, cfg.seed);
    let x_train = features.values.select(Axis(0), &train);
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let frozen: Vec<bool> = features.scales.iter().map(|s| s.constant).collect();

    let fit = coordinate_descent(x_train.view(), Array1::from(y_train.clone()).view(), cfg, &frozen)?;

    let train_rmse = rmse(&predict_rows(&x_train, &fit.coefficients, fit.intercept), &y_train);
    let test_rmse = (!test.is_empty()).then(|| {
        let x_test = features.values.select(Axis(0), &test);
        let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        rmse(&predict_rows(&x_test, &fit.coefficients, fit.intercept), &y_test)
    });

    let mut model = SurrogateModel {
        degree: features.degree,
        exponents: features.exponents.clone(),
        coefficients: fit.coefficients,
        intercept: fit.intercept,
        standardization: features.scales.clone(),
        train_rmse,
        test_rmse,
        n_train: train.len(),
        n_test: test.len(),
        l1_weight: cfg.l1_weight,
        l2_weight: cfg.l2_weight,
        seed: cfg.seed,
        sweeps: fit.sweeps,
        content_hash: String::new(),
    };
    model.content_hash = model.compute_hash();
    Ok(model)
}
