//! Fuel economy, CO₂, PM2.5 health cost and 12-year NPV total cost of
//! ownership of electric and diesel fleets.

mod emissions;
mod tco;

pub use emissions::{co2_diesel, co2_electric, diesel_fuel_gal, fuel_economy, fuel_economy_mph, health_impact, HealthImpact};
pub use tco::{annuity_factor, discount_factor, escalated, tco_npv_diesel, tco_npv_electric, DieselTco, ElectricTco, TcoInputs};

use serde::{Deserialize, Serialize};

use crate::energy::BusSpec;
use crate::field::{non_negative, positive, FieldError};
use crate::fleet::{ChargerSpec, FleetEstimate};

pub const KM_TO_MILES: f64 = 0.621371;

#[derive(Debug, thiserror::Error)]
pub enum ValuationError {
    #[error("average speed must be positive for fuel economy, got {0} km/h")]
    NonPositiveSpeed(f64),
    #[error("fuel economy is {fe} MPG at {speed_kmh} km/h; the polynomial is only valid where it stays positive")]
    NonPositiveFuelEconomy { speed_kmh: f64, fe: f64 },
    #[error("invalid parameter {0}")]
    InvalidParam(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcoParams {
    pub energy_price_usd_per_kwh: f64,
    pub energy_price_growth: f64,
    pub demand_charge_usd_per_kw: f64,
    pub demand_charge_growth: f64,
    pub fuel_price_usd_per_gal: f64,
    pub fuel_price_growth: f64,
    pub ebus_cost_usd: f64,
    pub dbus_cost_usd: f64,
    pub charger_unit_usd: f64,
    pub charger_install_usd: f64,
    pub om_electric_usd_per_mile: f64,
    pub om_diesel_usd_per_mile: f64,
    pub om_charger_usd_per_year: f64,
    pub residual_bus: f64,
    pub residual_charger: f64,
    pub discount_rate: f64,
    pub horizon_years: u32,
    pub km_to_miles: f64,
}

impl TcoParams {
    pub fn validate(&self) -> Result<(), FieldError> {
        for (name, v) in [
            ("energy_price_usd_per_kwh", self.energy_price_usd_per_kwh),
            ("demand_charge_usd_per_kw", self.demand_charge_usd_per_kw),
            ("fuel_price_usd_per_gal", self.fuel_price_usd_per_gal),
            ("ebus_cost_usd", self.ebus_cost_usd),
            ("dbus_cost_usd", self.dbus_cost_usd),
            ("charger_unit_usd", self.charger_unit_usd),
            ("charger_install_usd", self.charger_install_usd),
            ("om_electric_usd_per_mile", self.om_electric_usd_per_mile),
            ("om_diesel_usd_per_mile", self.om_diesel_usd_per_mile),
            ("om_charger_usd_per_year", self.om_charger_usd_per_year),
        ] {
            non_negative(name, v)?;
        }
        for (name, v) in [
            ("energy_price_growth", self.energy_price_growth),
            ("demand_charge_growth", self.demand_charge_growth),
            ("fuel_price_growth", self.fuel_price_growth),
            ("residual_bus", self.residual_bus),
            ("residual_charger", self.residual_charger),
        ] {
            if !(v > -1.0) || !v.is_finite() {
                return Err(FieldError::new(name, format!("must be finite and greater than -1, got {v}")));
            }
        }
        positive("discount_rate", self.discount_rate)?;
        if self.horizon_years < 1 {
            return Err(FieldError::new("horizon_years", "must be at least 1"));
        }
        positive("km_to_miles", self.km_to_miles)
    }

    /// Copy with every monetary amount multiplied by `k`.
    pub fn scale_money(&self, k: f64) -> Self {
        TcoParams {
            energy_price_usd_per_kwh: self.energy_price_usd_per_kwh * k,
            demand_charge_usd_per_kw: self.demand_charge_usd_per_kw * k,
            fuel_price_usd_per_gal: self.fuel_price_usd_per_gal * k,
            ebus_cost_usd: self.ebus_cost_usd * k,
            dbus_cost_usd: self.dbus_cost_usd * k,
            charger_unit_usd: self.charger_unit_usd * k,
            charger_install_usd: self.charger_install_usd * k,
            om_electric_usd_per_mile: self.om_electric_usd_per_mile * k,
            om_diesel_usd_per_mile: self.om_diesel_usd_per_mile * k,
            om_charger_usd_per_year: self.om_charger_usd_per_year * k,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionFactors {
    pub diesel_w2t_g_per_km: f64,
    pub diesel_t2w_kg_per_gal: f64,
    pub electric_w2t_kg_per_kwh: f64,
    pub pm25_t2w_g_per_km: f64,
}

impl EmissionFactors {
    pub fn validate(&self) -> Result<(), FieldError> {
        non_negative("diesel_w2t_g_per_km", self.diesel_w2t_g_per_km)?;
        non_negative("diesel_t2w_kg_per_gal", self.diesel_t2w_kg_per_gal)?;
        non_negative("electric_w2t_kg_per_kwh", self.electric_w2t_kg_per_kwh)?;
        non_negative("pm25_t2w_g_per_km", self.pm25_t2w_g_per_km)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HealthParams {
    pub intake_fraction_ppm: f64,
    pub effect_factor_daly_per_kg: f64,
    pub vsl_musd: f64,
}

impl HealthParams {
    pub fn validate(&self) -> Result<(), FieldError> {
        non_negative("intake_fraction_ppm", self.intake_fraction_ppm)?;
        non_negative("effect_factor_daly_per_kg", self.effect_factor_daly_per_kg)?;
        non_negative("vsl_musd", self.vsl_musd)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectricValuation {
    pub energy_kwh_yr: f64,
    pub co2_t_yr: f64,
    #[serde(flatten)]
    pub tco: ElectricTco,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DieselValuation {
    pub fuel_economy_mpg: f64,
    pub fuel_gal_yr: f64,
    pub co2_t_yr: f64,
    pub pm25_g_yr: f64,
    pub health_usd_yr: f64,
    /// Diesel buses refuel quickly, so range never binds.
    pub feasible: bool,
    #[serde(flatten)]
    pub tco: DieselTco,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteValuation {
    pub route_id: String,
    pub route_name: String,
    pub electric: ElectricValuation,
    pub diesel: DieselValuation,
    pub fleet: FleetEstimate,
}

impl RouteValuation {
    pub fn tco_ratio(&self) -> f64 {
        self.electric.tco.tco_npv_usd / self.diesel.tco.tco_npv_usd
    }

    pub fn ghg_ratio(&self) -> f64 {
        self.electric.co2_t_yr / self.diesel.co2_t_yr
    }
}

/// Parameters the valuation of one route reads.
#[derive(Clone, Copy, Debug)]
pub struct ValuationParams<'a> {
    pub tco: &'a TcoParams,
    pub emissions: &'a EmissionFactors,
    pub health: &'a HealthParams,
    pub bus: &'a BusSpec,
    pub charger: &'a ChargerSpec,
}

/// Values one route from its fleet estimate.
pub fn valuate_route(route_name: &str, fleet: FleetEstimate, p: &ValuationParams<'_>) -> Result<RouteValuation, ValuationError> {
    let fe = fuel_economy(fleet.route_speed_kmh, p.tco.km_to_miles)?;
    let daily: Vec<f64> = fleet.daily_energy_kwh.values().copied().collect();
    let inputs = TcoInputs {
        buses: fleet.buses_total,
        chargers: fleet.chargers,
        annual_vkt_km: fleet.annual_vkt_km,
        annual_energy_kwh: fleet.annual_energy_kwh,
        charger_power_kw: p.charger.effective_power_kw(p.bus),
    };
    let health = health_impact(fleet.annual_vkt_km, p.emissions, p.health);
    Ok(RouteValuation {
        route_id: fleet.route_id.clone(),
        route_name: route_name.to_string(),
        electric: ElectricValuation {
            energy_kwh_yr: fleet.annual_energy_kwh,
            co2_t_yr: co2_electric(&daily, p.emissions),
            tco: tco_npv_electric(&inputs, p.tco, p.charger),
        },
        diesel: DieselValuation {
            fuel_economy_mpg: fe,
            fuel_gal_yr: diesel_fuel_gal(fleet.annual_vkt_km, fe, p.tco.km_to_miles),
            co2_t_yr: co2_diesel(fleet.annual_vkt_km, fe, p.emissions, p.tco.km_to_miles),
            pm25_g_yr: health.pm25_g_yr,
            health_usd_yr: health.usd_yr,
            feasible: true,
            tco: tco_npv_diesel(&inputs, fe, p.tco),
        },
        fleet,
    })
}
