use serde::{Deserialize, Serialize};

use super::{EmissionFactors, HealthParams, ValuationError};
use crate::fleet::DAYS_PER_YEAR;

/// Diesel fuel economy in miles per gallon at an average speed in km/h:
/// `-0.0032·x² + 0.2143·x + 0.9726` with `x` in mph.
pub fn fuel_economy(avg_speed_kmh: f64, km_to_miles: f64) -> Result<f64, ValuationError> {
    if !(avg_speed_kmh > 0.0) {
        return Err(ValuationError::NonPositiveSpeed(avg_speed_kmh));
    }
    let fe = fuel_economy_mph(km_to_miles * avg_speed_kmh);
    if !(fe > 0.0) {
        return Err(ValuationError::NonPositiveFuelEconomy { speed_kmh: avg_speed_kmh, fe });
    }
    Ok(fe)
}

/// The fuel-economy polynomial evaluated directly in mph.
pub fn fuel_economy_mph(x: f64) -> f64 {
    -0.0032 * x * x + 0.2143 * x + 0.9726
}

/// Gallons of diesel burnt per year.
pub fn diesel_fuel_gal(annual_vkt_km: f64, fe_mpg: f64, km_to_miles: f64) -> f64 {
    annual_vkt_km * km_to_miles / fe_mpg
}

/// Well-to-wheel diesel CO₂ in tonnes per year: the upstream per-km factor
/// (g/km) plus combustion of the fuel burnt (kg/gal).
pub fn co2_diesel(annual_vkt_km: f64, fe_mpg: f64, ef: &EmissionFactors, km_to_miles: f64) -> f64 {
    annual_vkt_km * ef.diesel_w2t_g_per_km / 1e6
        + diesel_fuel_gal(annual_vkt_km, fe_mpg, km_to_miles) * ef.diesel_t2w_kg_per_gal / 1000.0
}

/// Grid CO₂ of charging in tonnes per year from daily cluster energies.
pub fn co2_electric(daily_energies_kwh: &[f64], ef: &EmissionFactors) -> f64 {
    daily_energies_kwh.iter().sum::<f64>() * ef.electric_w2t_kg_per_kwh * DAYS_PER_YEAR / 1000.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HealthImpact {
    pub pm25_g_yr: f64,
    pub intake_kg_yr: f64,
    pub usd_yr: f64,
}

/// PM2.5 exhaust, population intake and its monetized damage per year.
pub fn health_impact(annual_vkt_km: f64, ef: &EmissionFactors, hp: &HealthParams) -> HealthImpact {
    let pm25_g_yr = annual_vkt_km * ef.pm25_t2w_g_per_km;
    let intake_kg_yr = hp.intake_fraction_ppm * 1e-6 * pm25_g_yr / 1000.0;
    HealthImpact { pm25_g_yr, intake_kg_yr, usd_yr: intake_kg_yr * hp.effect_factor_daly_per_kg * hp.vsl_musd * 1e6 }
}
