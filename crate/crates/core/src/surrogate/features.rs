use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioSample;
use super::SurrogateError;

/// Exponents of (passengers, temperature, grade) in one monomial.
pub type Exponents = [u32; 3];

/// All monomials of total degree 1..=`degree` in three variables.
///
/// Ordered by total degree, then by descending passenger exponent, then by
/// descending temperature exponent. There are C(degree+3, 3) - 1 of them
/// (83 for degree 6, so 84 parameters with the intercept).
pub fn monomial_exponents(degree: u32) -> Vec<Exponents> {
    let mut out = Vec::new();
    for total in 1..=degree {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

pub fn eval_monomial(e: Exponents, s: &ScenarioSample) -> f64 {
    (s.passengers as f64).powi(e[0] as i32) * s.ambient_temp_c.powi(e[1] as i32) * s.grade_rad.powi(e[2] as i32)
}

/// Centering and scaling constants of one feature column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub mean: f64,
    pub scale: f64,
    /// The column was constant; its scale is 1 and its weight is pinned at 0.
    #[serde(default)]
    pub constant: bool,
}

impl ColumnScale {
    pub fn apply(&self, raw: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (raw - self.mean) / self.scale
        }
    }
}

/// Standardized polynomial design matrix (rows are samples).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub degree: u32,
    pub exponents: Vec<Exponents>,
    pub scales: Vec<ColumnScale>,
    pub values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.exponents.len()
    }

    /// Undoes the standardization, giving back the raw monomials (constant
    /// columns come back as their mean).
    pub fn destandardize(&self) -> Array2<f64> {
        let mut raw = self.values.clone();
        for (mut col, s) in raw.columns_mut().into_iter().zip(&self.scales) {
            col.mapv_inplace(|z| z * s.scale + s.mean);
        }
        raw
    }
}

/// Raw (unstandardized) monomial matrix.
pub fn raw_monomials(samples: &[ScenarioSample], exponents: &[Exponents]) -> Array2<f64> {
    Array2::from_shape_fn((samples.len(), exponents.len()), |(i, j)| eval_monomial(exponents[j], &samples[i]))
}

/// Builds the degree-`degree` design matrix and standardizes every column to
/// zero mean and unit population standard deviation.
pub fn build_features(samples: &[ScenarioSample], degree: u32) -> Result<FeatureMatrix, SurrogateError> {
    if samples.is_empty() {
        return Err(SurrogateError::NoSamples);
    }
    let exponents = monomial_exponents(degree);
    let mut values = raw_monomials(samples, &exponents);
    let n = samples.len() as f64;
    let mut scales = Vec::with_capacity(exponents.len());
    for mut col in values.columns_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let constant = !(sd > 1e-12 * mean.abs().max(f64::MIN_POSITIVE));
        let s = ColumnScale { mean, scale: if constant { 1.0 } else { sd }, constant };
        col.mapv_inplace(|x| s.apply(x));
        scales.push(s);
    }
    Ok(FeatureMatrix { degree, exponents, scales, values })
}
