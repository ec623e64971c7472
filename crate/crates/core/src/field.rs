use std::fmt;

use serde::{Deserialize, Serialize};

/// A parameter that violates its invariant, named by its path in the
/// parameter schema (for example `tco.energy_price_usd_per_kwh`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FieldError { field: field.into(), reason: reason.into() }
    }

    /// Prefixes the field path with its section name.
    pub fn within(self, section: &str) -> Self {
        FieldError { field: format!("{section}.{}", self.field), reason: self.reason }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

pub(crate) fn positive(field: &str, v: f64) -> Result<(), FieldError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FieldError::new(field, format!("must be positive, got {v}")))
    }
}

pub(crate) fn non_negative(field: &str, v: f64) -> Result<(), FieldError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FieldError::new(field, format!("must be non-negative, got {v}")))
    }
}

pub(crate) fn fraction(field: &str, v: f64) -> Result<(), FieldError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(FieldError::new(field, format!("must be in (0, 1], got {v}")))
    }
}
