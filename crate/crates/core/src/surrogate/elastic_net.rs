use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::SurrogateError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElasticNetConfig {
    pub l1_weight: f64,
    pub l2_weight: f64,
    /// Maximum number of full coordinate sweeps.
    pub max_iterations: usize,
    /// Stop once the largest coefficient change in a sweep is below this.
    pub tolerance: f64,
    /// Seeds the train/test shuffle.
    pub seed: u64,
    /// Fraction of rows held out for the test RMSE; 0 keeps every row.
    pub holdout_fraction: f64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        ElasticNetConfig {
            l1_weight: 1e-4,
            l2_weight: 1e-4,
            max_iterations: 10_000,
            tolerance: 1e-8,
            seed: 0,
            holdout_fraction: 0.2,
        }
    }
}

impl ElasticNetConfig {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        let bad = |field: &str, why: &str| Err(SurrogateError::InvalidConfig(format!("{field} {why}")));
        if !(self.l1_weight >= 0.0) || !self.l1_weight.is_finite() {
            return bad("l1_weight", "must be finite and >= 0");
        }
        if !(self.l2_weight >= 0.0) || !self.l2_weight.is_finite() {
            return bad("l2_weight", "must be finite and >= 0");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance", "must be > 0");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations", "must be >= 1");
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad("holdout_fraction", "must be in [0, 1)");
        }
        Ok(())
    }
}

/// Result of a coordinate-descent run.
#[derive(Clone, Debug, PartialEq)]
pub struct CdFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub sweeps: usize,
    pub last_delta: f64,
    /// Objective value before the first sweep followed by the value after each sweep.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `(1/2n)·‖y − b − Xw‖² + λ₁‖w‖₁ + (λ₂/2)‖w‖²`.
pub fn objective(x: ArrayView2<f64>, y: ArrayView1<f64>, w: &[f64], intercept: f64, l1: f64, l2: f64) -> f64 {
    let n = y.len() as f64;
    let rss: f64 = x
        .rows()
        .into_iter()
        .zip(y.iter())
        .map(|(row, &yi)| {
            let pred = intercept + row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            (yi - pred).powi(2)
        })
        .sum();
    rss / (2.0 * n) + penalty(w, l1, l2)
}

fn penalty(w: &[f64], l1: f64, l2: f64) -> f64 {
    l1 * w.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Cyclic coordinate descent for the elastic net with an unpenalized
/// intercept. Columns flagged in `frozen` keep a zero weight.
pub fn coordinate_descent(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &ElasticNetConfig,
    frozen: &[bool],
) -> Result<CdFit, SurrogateError> {
    let fit = run_sweeps(x, y, cfg, frozen)?;
    if fit.converged {
        Ok(fit)
    } else {
        Err(SurrogateError::NonConvergence { iterations: fit.sweeps, last_delta: fit.last_delta })
    }
}

/// Same as [`coordinate_descent`] but returns the last iterate when the sweep
/// budget runs out, with `converged` unset.
pub fn run_sweeps(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &ElasticNetConfig,
    frozen: &[bool],
) -> Result<CdFit, SurrogateError> {
    cfg.validate()?;
    let (n, p) = x.dim();
    if n != y.len() {
        return Err(SurrogateError::DimensionMismatch { rows: n, targets: y.len() });
    }
    if n < 2 {
        return Err(SurrogateError::InsufficientData { rows: n });
    }
    if frozen.len() != p {
        return Err(SurrogateError::DimensionMismatch { rows: p, targets: frozen.len() });
    }
    let nf = n as f64;
    let (l1, l2) = (cfg.l1_weight, cfg.l2_weight);

    // Column-major copy for contiguous access.
    let cols: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
    let z: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();
    let active: Vec<usize> = (0..p).filter(|&j| !frozen[j] && z[j] > 0.0).collect();

    let mut w = vec![0.0; p];
    let mut intercept = y.sum() / nf;
    let mut r: Vec<f64> = y.iter().map(|v| v - intercept).collect();

    let half_mse = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>() / (2.0 * nf);
    let mut trace = vec![half_mse(&r)];
    let mut last_delta = f64::INFINITY;
    let mut sweeps = 0;

    while sweeps < cfg.max_iterations {
        sweeps += 1;
        let mut max_delta = 0.0f64;
        for &j in &active {
            let col = &cols[j];
            let old = w[j];
            let rho = col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / nf + z[j] * old;
            let new = soft_threshold(rho, l1) / (z[j] + l2);
            let d = new - old;
            if d != 0.0 {
                for (ri, xi) in r.iter_mut().zip(col) {
                    *ri -= xi * d;
                }
                w[j] = new;
                max_delta = max_delta.max(d.abs());
            }
        }
        let shift = r.iter().sum::<f64>() / nf;
        if shift != 0.0 {
            intercept += shift;
            r.iter_mut().for_each(|ri| *ri -= shift);
        }
        trace.push(half_mse(&r) + penalty(&w, l1, l2));
        last_delta = max_delta;
        if max_delta < cfg.tolerance {
            break;
        }
    }
    Ok(CdFit {
        coefficients: w,
        intercept,
        sweeps,
        converged: last_delta < cfg.tolerance,
        last_delta,
        objective_trace: trace,
    })
}
