//! Route-level electric bus valuation: GTFS ingestion, stop-pair geometry,
//! longitudinal energy physics, a polynomial surrogate, fleet sizing, and
//! cost, emission and health valuation.

// `!(x > 0.0)` is the NaN-rejecting form used throughout validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod energy;
mod error;
pub mod field;
pub mod fleet;
pub mod geo;
pub mod gtfs;
pub mod params;
pub mod pipeline;
pub mod report;
pub mod surrogate;
pub mod valuation;

pub use config::RunConfig;
pub use error::Error;
pub use field::FieldError;
pub use pipeline::{CityState, ValuationRequest, ValuationResponse};
pub use report::Report;
