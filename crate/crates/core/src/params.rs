//! Named parameter profiles and per-request overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::energy::{BusSpec, HvacModel};
use crate::field::{positive, FieldError};
use crate::fleet::{ChargerSpec, OperatingConditions};
use crate::surrogate::ScenarioDistributions;
use crate::valuation::{EmissionFactors, HealthParams, TcoParams, ValuationParams, KM_TO_MILES};

pub const PROFILE_NAMES: [&str; 2] = ["boston", "milan"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weather {
    /// Mean temperature of each calendar month, January first.
    pub monthly_mean_temp_c: Vec<f64>,
    /// Spread of each monthly mixture component.
    pub temp_stddev_c: f64,
    pub yearly_avg_temp_c: f64,
    pub yearly_lowest_temp_c: f64,
}

impl Weather {
    pub fn validate(&self) -> Result<(), FieldError> {
        if self.monthly_mean_temp_c.len() != 12 {
            return Err(FieldError::new(
                "monthly_mean_temp_c",
                format!("needs 12 values, got {}", self.monthly_mean_temp_c.len()),
            ));
        }
        if let Some(t) = self.monthly_mean_temp_c.iter().find(|t| !t.is_finite()) {
            return Err(FieldError::new("monthly_mean_temp_c", format!("{t} is not finite")));
        }
        positive("temp_stddev_c", self.temp_stddev_c)?;
        for (name, v) in [("yearly_avg_temp_c", self.yearly_avg_temp_c), ("yearly_lowest_temp_c", self.yearly_lowest_temp_c)] {
            if !v.is_finite() {
                return Err(FieldError::new(name, "must be finite"));
            }
        }
        if self.yearly_lowest_temp_c > self.yearly_avg_temp_c {
            return Err(FieldError::new("yearly_lowest_temp_c", "must not exceed yearly_avg_temp_c"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ridership {
    /// Capacity used when sampling training scenarios.
    pub passenger_max: u32,
    /// Load assumed when predicting route energy.
    pub mean_passengers: u32,
}

impl Ridership {
    pub fn validate(&self) -> Result<(), FieldError> {
        if self.mean_passengers > self.passenger_max {
            return Err(FieldError::new(
                "mean_passengers",
                format!("{} exceeds passenger_max {}", self.mean_passengers, self.passenger_max),
            ));
        }
        Ok(())
    }
}

/// Every tunable input of a valuation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamProfile {
    pub name: String,
    pub tco: TcoParams,
    pub emissions: EmissionFactors,
    pub health: HealthParams,
    pub bus: BusSpec,
    pub charger: ChargerSpec,
    pub hvac: HvacModel,
    pub weather: Weather,
    pub ridership: Ridership,
}

fn shared_tco() -> TcoParams {
    TcoParams {
        energy_price_usd_per_kwh: 0.0,
        energy_price_growth: 0.0,
        demand_charge_usd_per_kw: 8.0,
        demand_charge_growth: 0.0,
        fuel_price_usd_per_gal: 0.0,
        fuel_price_growth: 0.0,
        ebus_cost_usd: 0.0,
        dbus_cost_usd: 0.0,
        charger_unit_usd: 27_549.0,
        charger_install_usd: 17_692.0,
        om_electric_usd_per_mile: 0.64,
        om_diesel_usd_per_mile: 0.88,
        om_charger_usd_per_year: 500.0,
        residual_bus: 0.15,
        residual_charger: 0.15,
        discount_rate: 0.035,
        horizon_years: 12,
        km_to_miles: KM_TO_MILES,
    }
}

fn weather(monthly: [f64; 12], lowest: f64) -> Weather {
    Weather {
        yearly_avg_temp_c: monthly.iter().sum::<f64>() / 12.0,
        monthly_mean_temp_c: monthly.to_vec(),
        temp_stddev_c: 3.0,
        yearly_lowest_temp_c: lowest,
    }
}

const RIDERSHIP: Ridership = Ridership { passenger_max: 40, mean_passengers: 20 };

impl ParamProfile {
    pub fn boston() -> Self {
        ParamProfile {
            name: "boston".into(),
            tco: TcoParams {
                energy_price_usd_per_kwh: 0.098,
                energy_price_growth: -0.001,
                fuel_price_usd_per_gal: 2.546,
                fuel_price_growth: 0.007,
                ebus_cost_usd: 750_000.0,
                dbus_cost_usd: 485_000.0,
                ..shared_tco()
            },
            emissions: EmissionFactors {
                diesel_w2t_g_per_km: 310.0,
                diesel_t2w_kg_per_gal: 10.21,
                electric_w2t_kg_per_kwh: 0.2369,
                pm25_t2w_g_per_km: 0.583,
            },
            health: HealthParams { intake_fraction_ppm: 25.8, effect_factor_daly_per_kg: 260.110, vsl_musd: 6.267 },
            bus: BusSpec::default(),
            charger: ChargerSpec::default(),
            hvac: HvacModel::default(),
            weather: weather([-5.0, -2.5, 3.5, 9.5, 15.5, 21.0, 25.0, 24.0, 20.0, 13.5, 7.5, 0.0], -5.0),
            ridership: RIDERSHIP,
        }
    }

    pub fn milan() -> Self {
        ParamProfile {
            name: "milan".into(),
            tco: TcoParams {
                energy_price_usd_per_kwh: 0.232,
                energy_price_growth: 0.011,
                fuel_price_usd_per_gal: 5.8,
                fuel_price_growth: 0.043,
                ebus_cost_usd: 450_000.0,
                dbus_cost_usd: 360_000.0,
                ..shared_tco()
            },
            emissions: EmissionFactors {
                diesel_w2t_g_per_km: 149.1,
                diesel_t2w_kg_per_gal: 10.21,
                electric_w2t_kg_per_kwh: 0.483,
                pm25_t2w_g_per_km: 0.583,
            },
            health: HealthParams { intake_fraction_ppm: 35.3, effect_factor_daly_per_kg: 79.802, vsl_musd: 4.303 },
            bus: BusSpec::default(),
            charger: ChargerSpec::default(),
            hvac: HvacModel::default(),
            weather: weather([0.0, 3.5, 9.5, 14.5, 19.5, 24.0, 27.0, 26.5, 22.0, 16.0, 9.0, 2.5], 0.0),
            ridership: RIDERSHIP,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "boston" => Some(Self::boston()),
            "milan" => Some(Self::milan()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        self.tco.validate().map_err(|e| e.within("tco"))?;
        self.emissions.validate().map_err(|e| e.within("emissions"))?;
        self.health.validate().map_err(|e| e.within("health"))?;
        self.bus.validate().map_err(|e| e.within("bus"))?;
        self.charger.validate().map_err(|e| e.within("charger"))?;
        self.hvac.validate().map_err(|e| e.within("hvac"))?;
        self.weather.validate().map_err(|e| e.within("weather"))?;
        self.ridership.validate().map_err(|e| e.within("ridership"))
    }

    /// Deep-merges `overrides` (a partial profile as JSON) onto a copy of this
    /// profile and validates the result. Unknown fields and type mismatches
    /// are reported by their dotted path.
    pub fn with_overrides(&self, overrides: &Value) -> Result<Self, FieldError> {
        if overrides.is_null() {
            return Ok(self.clone());
        }
        let mut merged = serde_json::to_value(self).expect("profile serializes");
        merge(&mut merged, overrides, "")?;
        let profile: ParamProfile =
            serde_json::from_value(merged).map_err(|e| FieldError::new("overrides", e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn valuation_params(&self) -> ValuationParams<'_> {
        ValuationParams { tco: &self.tco, emissions: &self.emissions, health: &self.health, bus: &self.bus, charger: &self.charger }
    }

    pub fn operating_conditions(&self) -> OperatingConditions {
        OperatingConditions {
            mean_passengers: self.ridership.mean_passengers,
            avg_temp_c: self.weather.yearly_avg_temp_c,
            lowest_temp_c: self.weather.yearly_lowest_temp_c,
        }
    }

    pub fn scenario_distributions(&self, grade_source: Vec<f64>) -> ScenarioDistributions {
        ScenarioDistributions::monthly(
            self.ridership.passenger_max,
            &self.weather.monthly_mean_temp_c,
            self.weather.temp_stddev_c,
            grade_source,
        )
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn merge(base: &mut Value, patch: &Value, path: &str) -> Result<(), FieldError> {
    let here = || if path.is_empty() { "overrides".to_string() } else { path.to_string() };
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let sub = join(path, k);
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v, &sub)?,
                    None => return Err(FieldError::new(sub, "unknown parameter")),
                }
            }
            Ok(())
        }
        (b @ Value::Number(_), Value::Number(n)) => {
            let integral = b.as_u64().is_some() && !b.is_f64();
            if integral && n.as_u64().is_none() {
                return Err(FieldError::new(here(), format!("must be a non-negative integer, got {n}")));
            }
            *b = Value::Number(n.clone());
            Ok(())
        }
        // Optional numeric fields default to null.
        (b @ Value::Null, v @ (Value::Number(_) | Value::Null)) => {
            *b = v.clone();
            Ok(())
        }
        (b @ Value::Number(_), Value::Null) if path.ends_with("max_charge_power_kw") => {
            *b = Value::Null;
            Ok(())
        }
        (b @ Value::Array(_), Value::Array(items)) => {
            if let Some(bad) = items.iter().find(|v| !v.is_number()) {
                return Err(FieldError::new(here(), format!("array entries must be numbers, got {}", kind(bad))));
            }
            *b = Value::Array(items.clone());
            Ok(())
        }
        (b @ Value::String(_), v @ Value::String(_)) | (b @ Value::Bool(_), v @ Value::Bool(_)) => {
            *b = v.clone();
            Ok(())
        }
        (b, v) => Err(FieldError::new(here(), format!("expected {}, got {}", kind(b), kind(v)))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn shipped_profiles_are_valid() {
        for name in PROFILE_NAMES {
            ParamProfile::by_name(name).unwrap().validate().unwrap();
        }
        assert!(ParamProfile::by_name("paris").is_none());
        assert_eq!(ParamProfile::by_name("Boston").unwrap().name, "boston");
    }

    #[test]
    fn weather_means_match_the_yearly_averages() {
        assert!((ParamProfile::boston().weather.yearly_avg_temp_c - 11.0).abs() < 1e-12);
        assert!((ParamProfile::milan().weather.yearly_avg_temp_c - 14.5).abs() < 1e-12);
    }

    #[test]
    fn overrides_merge_deeply() {
        let p = ParamProfile::boston()
            .with_overrides(&json!({"tco": {"fuel_price_usd_per_gal": 5.8}, "charger": {"power_kw": 150}}))
            .unwrap();
        assert_eq!(p.tco.fuel_price_usd_per_gal, 5.8);
        assert_eq!(p.charger.power_kw, 150.0);
        assert_eq!(p.tco.ebus_cost_usd, 750_000.0);
        assert_eq!(ParamProfile::boston().with_overrides(&Value::Null).unwrap(), ParamProfile::boston());
        let capped = ParamProfile::boston().with_overrides(&json!({"bus": {"max_charge_power_kw": 40}})).unwrap();
        assert_eq!(capped.bus.max_charge_power_kw, Some(40.0));
    }

    #[test]
    fn invalid_overrides_name_the_field() {
        let err = ParamProfile::boston().with_overrides(&json!({"tco": {"energy_price_usd_per_kwh": -0.1}})).unwrap_err();
        assert_eq!(err.field, "tco.energy_price_usd_per_kwh");
        let err = ParamProfile::boston().with_overrides(&json!({"tco": {"fuel_prise": 1}})).unwrap_err();
        assert_eq!(err.field, "tco.fuel_prise");
        let err = ParamProfile::boston().with_overrides(&json!({"tco": {"horizon_years": 12.5}})).unwrap_err();
        assert_eq!(err.field, "tco.horizon_years");
        let err = ParamProfile::boston().with_overrides(&json!({"charger": {"efficiency": "high"}})).unwrap_err();
        assert_eq!(err.field, "charger.efficiency");
        let err = ParamProfile::boston().with_overrides(&json!({"charger": {"efficiency": 1.5}})).unwrap_err();
        assert_eq!(err.field, "charger.efficiency");
        let err = ParamProfile::boston().with_overrides(&json!([1, 2])).unwrap_err();
        assert_eq!(err.field, "overrides");
    }
}
