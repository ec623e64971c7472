use serde::{Deserialize, Serialize};

use super::TcoParams;
use crate::fleet::ChargerSpec;

/// `((1+r)^n − 1) / (r·(1+r)^n)`; equals `n` at `r = 0`.
pub fn annuity_factor(rate: f64, years: u32) -> f64 {
    if rate == 0.0 {
        return years as f64;
    }
    let growth_m1 = (years as f64 * rate.ln_1p()).exp_m1();
    growth_m1 / (rate * (1.0 + growth_m1))
}

/// `(1+r)^−n`.
pub fn discount_factor(rate: f64, years: u32) -> f64 {
    (-(years as f64) * rate.ln_1p()).exp()
}

/// Year-by-year amounts `base·(1+g)^y` for `y = 1..=years`.
pub fn escalated(base: f64, growth: f64, years: u32) -> Vec<f64> {
    (1..=years).map(|y| base * (1.0 + growth).powi(y as i32)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectricTco {
    pub capex_usd: f64,
    pub bus_capex_usd: f64,
    pub charger_capex_usd: f64,
    /// Energy cost per year, years 1 through the horizon.
    pub energy_cost_by_year_usd: Vec<f64>,
    pub energy_cost_usd: f64,
    pub demand_charge_by_year_usd: Vec<f64>,
    pub demand_charge_usd: f64,
    /// O&M cost of one year, before annuitizing.
    pub om_annual_usd: f64,
    pub om_npv_usd: f64,
    /// Undiscounted salvage credit (negative).
    pub salvage_usd: f64,
    pub salvage_npv_usd: f64,
    pub tco_npv_usd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DieselTco {
    pub capex_usd: f64,
    pub fuel_cost_by_year_usd: Vec<f64>,
    pub fuel_cost_usd: f64,
    pub om_annual_usd: f64,
    pub om_npv_usd: f64,
    pub salvage_usd: f64,
    pub salvage_npv_usd: f64,
    pub tco_npv_usd: f64,
}

/// Physical quantities the TCO formulas consume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcoInputs {
    pub buses: u32,
    pub chargers: u32,
    pub annual_vkt_km: f64,
    pub annual_energy_kwh: f64,
    /// Power every charger is assumed to draw at the monthly peak.
    pub charger_power_kw: f64,
}

/// Electric fleet NPV. Energy and demand charges are summed over the horizon
/// without discounting, O&M is annuitized, and salvage is discounted.
pub fn tco_npv_electric(x: &TcoInputs, p: &TcoParams, charger: &ChargerSpec) -> ElectricTco {
    let (nv, nc) = (x.buses as f64, x.chargers as f64);
    let bus_capex_usd = p.ebus_cost_usd * nv;
    let charger_capex_usd = (p.charger_install_usd + p.charger_unit_usd) * nc;
    let capex_usd = bus_capex_usd + charger_capex_usd;

    let energy_cost_by_year_usd = escalated(
        p.energy_price_usd_per_kwh * x.annual_energy_kwh / charger.efficiency,
        p.energy_price_growth,
        p.horizon_years,
    );
    let demand_charge_by_year_usd = escalated(
        p.demand_charge_usd_per_kw * nc * x.charger_power_kw * 12.0,
        p.demand_charge_growth,
        p.horizon_years,
    );
    let energy_cost_usd = energy_cost_by_year_usd.iter().sum();
    let demand_charge_usd = demand_charge_by_year_usd.iter().sum();

    let om_annual_usd = p.om_electric_usd_per_mile * nv * p.km_to_miles * x.annual_vkt_km + p.om_charger_usd_per_year * nc;
    let om_npv_usd = annuity_factor(p.discount_rate, p.horizon_years) * om_annual_usd;
    let salvage_usd = -(p.residual_bus * p.ebus_cost_usd * nv + p.residual_charger * p.charger_unit_usd * nc);
    let salvage_npv_usd = salvage_usd * discount_factor(p.discount_rate, p.horizon_years);

    ElectricTco {
        capex_usd,
        bus_capex_usd,
        charger_capex_usd,
        tco_npv_usd: capex_usd + om_npv_usd + energy_cost_usd + demand_charge_usd + salvage_npv_usd,
        energy_cost_by_year_usd,
        energy_cost_usd,
        demand_charge_by_year_usd,
        demand_charge_usd,
        om_annual_usd,
        om_npv_usd,
        salvage_usd,
        salvage_npv_usd,
    }
}

/// Diesel fleet NPV with the same conventions as the electric side.
pub fn tco_npv_diesel(x: &TcoInputs, fe_mpg: f64, p: &TcoParams) -> DieselTco {
    let nv = x.buses as f64;
    let capex_usd = p.dbus_cost_usd * nv;
    let fuel_cost_by_year_usd = escalated(
        p.fuel_price_usd_per_gal * p.km_to_miles * x.annual_vkt_km / fe_mpg,
        p.fuel_price_growth,
        p.horizon_years,
    );
    let fuel_cost_usd = fuel_cost_by_year_usd.iter().sum();
    let om_annual_usd = p.om_diesel_usd_per_mile * nv * p.km_to_miles * x.annual_vkt_km;
    let om_npv_usd = annuity_factor(p.discount_rate, p.horizon_years) * om_annual_usd;
    let salvage_usd = -(p.residual_bus * p.dbus_cost_usd * nv);
    let salvage_npv_usd = salvage_usd * discount_factor(p.discount_rate, p.horizon_years);
    DieselTco {
        capex_usd,
        tco_npv_usd: capex_usd + om_npv_usd + fuel_cost_usd + salvage_npv_usd,
        fuel_cost_by_year_usd,
        fuel_cost_usd,
        om_annual_usd,
        om_npv_usd,
        salvage_usd,
        salvage_npv_usd,
    }
}
