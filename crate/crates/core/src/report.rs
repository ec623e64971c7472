//! Valuation report: full JSON document plus a flat per-route CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{health_savings_curve, pareto_frontier, AnalysisError, HealthCurvePoint, RouteRatios};
use crate::valuation::RouteValuation;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

/// Formula readings that differ from a literal transcription of the
/// published equations; every report carries them.
pub const FORMULA_DEVIATIONS: &[&str] = &[
    "diesel CO2: upstream factor in g/km converted with 1e-6 t/g (the printed 1000 kg/g factor is inverted)",
    "cluster speed: mean trip distance over mean cycle length (the printed numerator sums distance over all trips)",
    "charger count: the 1000 W/kW factor is dropped, kWh/(kW*h) is already dimensionless",
    "daily cluster energy: mean trip energy times the representative day's trip count",
    "range feasibility: route buses apportioned to clusters by representative-day trip share, rounded up",
    "intake fraction read as parts per million; VSL read in millions of USD",
    "energy, demand-charge and fuel costs are summed undiscounted over the horizon as printed; only O&M is annuitized",
];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report needs at least one route valuation")]
    Empty,
    #[error("writing {path}: {source}")]
    WriteFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("reading {path}: {reason}")]
    ReadFailure { path: PathBuf, reason: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub city_id: String,
    pub profile: String,
    pub bus_size: String,
    pub seed: u64,
    pub model_hash: String,
    pub representative_day: Option<String>,
    /// Parameter overrides applied on top of the profile.
    pub overrides: Value,
    pub formula_deviations: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    #[serde(flatten)]
    pub valuation: RouteValuation,
    /// `None` when a denominator is zero.
    pub tco_ratio: Option<f64>,
    pub ghg_ratio: Option<f64>,
    pub pareto: bool,
    pub health_rank: Option<usize>,
    pub health_cumulative_pct: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub pareto_frontier: Vec<String>,
    pub health_curve: Vec<HealthCurvePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: ReportMetadata,
    pub routes: Vec<RouteReport>,
    pub analysis: AnalysisSummary,
}

fn finite_ratio(num: f64, den: f64) -> Option<f64> {
    let r = num / den;
    (den > 0.0 && r.is_finite()).then_some(r)
}

/// Runs the cross-route analysis and assembles the report, keeping the
/// valuations in the given order.
pub fn build_report(mut metadata: ReportMetadata, valuations: Vec<RouteValuation>) -> Result<Report, ReportError> {
    if valuations.is_empty() {
        return Err(ReportError::Empty);
    }
    let ratios: Vec<RouteRatios> = valuations
        .iter()
        .filter_map(|v| {
            let t = finite_ratio(v.electric.tco.tco_npv_usd, v.diesel.tco.tco_npv_usd)?;
            let g = finite_ratio(v.electric.co2_t_yr, v.diesel.co2_t_yr)?;
            Some(RouteRatios { route_id: v.route_id.clone(), tco_ratio: t, ghg_ratio: g })
        })
        .collect();
    if ratios.len() < valuations.len() {
        metadata.warnings.push(format!(
            "{} route(s) without diesel cost or emissions are left out of the Pareto analysis",
            valuations.len() - ratios.len()
        ));
    }
    let frontier = if ratios.is_empty() { Vec::new() } else { pareto_frontier(&ratios)? };

    let impacts: BTreeMap<String, f64> =
        valuations.iter().map(|v| (v.route_id.clone(), v.diesel.health_usd_yr)).collect();
    let curve = match health_savings_curve(&impacts) {
        Ok(c) => c,
        Err(AnalysisError::AllZeroImpacts) => {
            metadata.warnings.push("all routes have zero health impact; no health-savings curve".into());
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };

    let routes = valuations
        .into_iter()
        .map(|v| {
            let point = curve.iter().find(|p| p.route_id == v.route_id);
            RouteReport {
                tco_ratio: finite_ratio(v.electric.tco.tco_npv_usd, v.diesel.tco.tco_npv_usd),
                ghg_ratio: finite_ratio(v.electric.co2_t_yr, v.diesel.co2_t_yr),
                pareto: frontier.contains(&v.route_id),
                health_rank: point.map(|p| p.rank),
                health_cumulative_pct: point.map(|p| p.cumulative_savings_pct),
                valuation: v,
            }
        })
        .collect();
    Ok(Report { metadata, routes, analysis: AnalysisSummary { pareto_frontier: frontier, health_curve: curve } })
}

/// Column order of `report.csv`.
pub const CSV_COLUMNS: &[&str] = &[
    "route_id",
    "route_name",
    "buses_inbound",
    "buses_outbound",
    "buses_total",
    "chargers",
    "route_speed_kmh",
    "annual_vkt_km",
    "annual_energy_kwh",
    "feasible",
    "needs_fast_charging",
    "electric_capex_usd",
    "electric_energy_cost_usd",
    "electric_demand_charge_usd",
    "electric_om_npv_usd",
    "electric_salvage_npv_usd",
    "electric_tco_npv_usd",
    "diesel_capex_usd",
    "diesel_fuel_cost_usd",
    "diesel_om_npv_usd",
    "diesel_salvage_npv_usd",
    "diesel_tco_npv_usd",
    "electric_co2_t_yr",
    "diesel_co2_t_yr",
    "diesel_pm25_g_yr",
    "diesel_health_usd_yr",
    "fuel_economy_mpg",
    "tco_ratio",
    "ghg_ratio",
    "pareto",
    "health_rank",
    "health_cumulative_pct",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(raw: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(raw)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.routes {
            let v = &r.valuation;
            let (e, d, f) = (&v.electric, &v.diesel, &v.fleet);
            let row: Vec<String> = vec![
                v.route_id.clone(),
                v.route_name.clone(),
                f.buses_inbound.to_string(),
                f.buses_outbound.to_string(),
                f.buses_total.to_string(),
                f.chargers.to_string(),
                f.route_speed_kmh.to_string(),
                f.annual_vkt_km.to_string(),
                f.annual_energy_kwh.to_string(),
                f.feasible.to_string(),
                f.needs_fast_charging.to_string(),
                e.tco.capex_usd.to_string(),
                e.tco.energy_cost_usd.to_string(),
                e.tco.demand_charge_usd.to_string(),
                e.tco.om_npv_usd.to_string(),
                e.tco.salvage_npv_usd.to_string(),
                e.tco.tco_npv_usd.to_string(),
                d.tco.capex_usd.to_string(),
                d.tco.fuel_cost_usd.to_string(),
                d.tco.om_npv_usd.to_string(),
                d.tco.salvage_npv_usd.to_string(),
                d.tco.tco_npv_usd.to_string(),
                e.co2_t_yr.to_string(),
                d.co2_t_yr.to_string(),
                d.pm25_g_yr.to_string(),
                d.health_usd_yr.to_string(),
                d.fuel_economy_mpg.to_string(),
                opt(r.tco_ratio),
                opt(r.ghg_ratio),
                r.pareto.to_string(),
                opt(r.health_rank),
                opt(r.health_cumulative_pct),
            ];
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReportError> {
        let path = path.as_ref();
        let fail = |reason: String| ReportError::ReadFailure { path: path.to_path_buf(), reason };
        let raw = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        Self::from_json(&raw).map_err(|e| fail(e.to_string()))
    }
}

/// Writes `report.json` and `report.csv` into `dir`, creating it if needed,
/// and returns both paths.
pub fn emit_report(report: &Report, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf), ReportError> {
    let dir = dir.as_ref();
    let write = |path: PathBuf, body: String| {
        std::fs::write(&path, body).map_err(|source| ReportError::WriteFailure { path: path.clone(), source })?;
        Ok::<_, ReportError>(path)
    };
    std::fs::create_dir_all(dir).map_err(|source| ReportError::WriteFailure { path: dir.to_path_buf(), source })?;
    let json = write(dir.join(REPORT_JSON), report.to_json())?;
    let csv = write(dir.join(REPORT_CSV), report.to_csv())?;
    Ok((json, csv))
}
