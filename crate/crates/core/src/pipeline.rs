//! The end-to-end steps shared by the CLI and the service: training input
//! preparation and what-if valuation of loaded city state.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::energy::DriveCycle;
use crate::error::Error;
use crate::fleet::{estimate_route, FleetContext, FleetEstimate};
use crate::geo::{GeoError, GeoTables};
use crate::gtfs::FeedArchive;
use crate::params::ParamProfile;
use crate::report::{build_report, Report, ReportMetadata, FORMULA_DEVIATIONS};
use crate::surrogate::{train_surrogate, PhysicsOracle, SurrogateModel, TrainOptions};
use crate::valuation::valuate_route;

/// Grades of every distinct stop pair the archive's clusters use, ordered by
/// pair. This is the empirical grade distribution surrogate training samples
/// from.
pub fn grade_source(archive: &FeedArchive, geo: &GeoTables) -> Result<Vec<f64>, GeoError> {
    let mut grades = BTreeMap::new();
    for cluster in archive.clusters.values().flatten() {
        for p in geo.enrich_cluster(cluster)? {
            grades.insert((p.from_stop, p.to_stop), p.grade_rad);
        }
    }
    Ok(grades.into_values().collect())
}

/// Trains the surrogate for a feed's grades under a profile's bus, HVAC,
/// weather and ridership.
pub fn train_model(
    archive: &FeedArchive,
    geo: &GeoTables,
    cycle: &DriveCycle,
    profile: &ParamProfile,
    opts: &TrainOptions,
) -> Result<SurrogateModel, Error> {
    let dists = profile.scenario_distributions(grade_source(archive, geo)?);
    let oracle = PhysicsOracle { cycle, spec: &profile.bus, hvac: &profile.hvac };
    Ok(train_surrogate(&oracle, &dists, opts)?)
}

/// Immutable state of one city, loaded once and shared by all requests.
#[derive(Clone, Debug)]
pub struct CityState {
    pub city_id: String,
    pub name: String,
    pub archive: FeedArchive,
    pub geo: GeoTables,
    pub model: SurrogateModel,
    pub profile: ParamProfile,
    /// Profile overrides from the run configuration, applied before any
    /// request overrides.
    pub base_overrides: Value,
    pub seed: u64,
    pub bus_size: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteSummary {
    pub route_id: String,
    pub short_name: String,
    pub long_name: String,
    pub clusters: usize,
    pub trips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CitySummary {
    pub city_id: String,
    pub name: String,
    pub profile: String,
    pub bus_size: String,
    pub routes: usize,
    pub model_hash: String,
}

/// What-if request: which routes, under which parameter changes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationRequest {
    #[serde(default)]
    pub city_id: Option<String>,
    pub route_ids: Vec<String>,
    /// Partial parameter profile, deep-merged per request and never kept.
    #[serde(default)]
    pub overrides: Value,
}

/// The service answers a request with the same document `valuate` writes.
pub type ValuationResponse = Report;

impl CityState {
    pub fn summary(&self) -> CitySummary {
        CitySummary {
            city_id: self.city_id.clone(),
            name: self.name.clone(),
            profile: self.profile.name.clone(),
            bus_size: self.bus_size.clone(),
            routes: self.archive.selected_routes.len(),
            model_hash: self.model.content_hash.clone(),
        }
    }

    /// Selected routes in archive order.
    pub fn routes(&self) -> Vec<RouteSummary> {
        self.archive
            .selected_routes
            .iter()
            .map(|id| {
                let route = self.archive.feed.routes.get(id);
                let clusters = self.archive.clusters_of(id);
                RouteSummary {
                    route_id: id.clone(),
                    short_name: route.map(|r| r.short_name.clone()).unwrap_or_default(),
                    long_name: route.map(|r| r.long_name.clone()).unwrap_or_default(),
                    clusters: clusters.len(),
                    trips: clusters.iter().map(|c| c.trips.len()).sum(),
                }
            })
            .collect()
    }

    fn route_name(&self, route_id: &str) -> String {
        self.archive.feed.routes.get(route_id).map(|r| r.display_name().to_string()).unwrap_or_else(|| route_id.into())
    }

    /// Rejects empty or duplicated selections and lists every unknown id.
    pub fn check_routes(&self, route_ids: &[String]) -> Result<(), Error> {
        if route_ids.is_empty() {
            return Err(Error::BadRequest("route_ids must not be empty".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = route_ids.iter().find(|r| !seen.insert(r.as_str())) {
            return Err(Error::BadRequest(format!("route id {dup} is listed twice")));
        }
        let known: BTreeSet<&str> = self.archive.selected_routes.iter().map(String::as_str).collect();
        let unknown: Vec<String> = route_ids.iter().filter(|r| !known.contains(r.as_str())).cloned().collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::UnknownRoutes(unknown))
        }
    }

    /// Fleet estimates of the given routes under `profile`, in input order.
    pub fn fleet(&self, profile: &ParamProfile, route_ids: &[String]) -> Result<Vec<FleetEstimate>, Error> {
        self.check_routes(route_ids)?;
        let ctx = FleetContext {
            archive: &self.archive,
            geo: &self.geo,
            model: &self.model,
            bus: &profile.bus,
            charger: &profile.charger,
            conditions: profile.operating_conditions(),
        };
        route_ids.par_iter().map(|r| estimate_route(&ctx, r).map_err(Error::from)).collect()
    }

    /// Values the requested routes and runs the cross-route analysis.
    /// Reads shared state only, so identical requests give identical reports.
    pub fn valuate(&self, req: &ValuationRequest) -> Result<ValuationResponse, Error> {
        if let Some(city) = &req.city_id {
            if city != &self.city_id {
                return Err(Error::BadRequest(format!("request is for city {city}, this state is {}", self.city_id)));
            }
        }
        if !(req.overrides.is_null() || req.overrides.is_object()) {
            return Err(Error::BadRequest("overrides must be a JSON object".into()));
        }
        self.check_routes(&req.route_ids)?;
        let profile = self.profile.with_overrides(&req.overrides)?;
        let params = profile.valuation_params();
        let fleets = self.fleet(&profile, &req.route_ids)?;
        let valuations = fleets
            .into_par_iter()
            .map(|f| {
                let name = self.route_name(&f.route_id);
                valuate_route(&name, f, &params).map_err(Error::from)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let metadata = ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            city_id: self.city_id.clone(),
            profile: self.profile.name.clone(),
            bus_size: self.bus_size.clone(),
            seed: self.seed,
            model_hash: self.model.content_hash.clone(),
            representative_day: self.archive.representative_day.as_ref().map(|d| d.label.clone()),
            overrides: combined_overrides(&self.base_overrides, &req.overrides),
            formula_deviations: FORMULA_DEVIATIONS.iter().map(|s| s.to_string()).collect(),
            warnings: self.archive.warnings.clone(),
        };
        Ok(build_report(metadata, valuations)?)
    }
}

/// Run-level overrides with request overrides laid on top, as echoed in the
/// report metadata.
fn combined_overrides(base: &Value, request: &Value) -> Value {
    fn lay(dst: &mut Value, src: &Value) {
        match (dst, src) {
            (Value::Object(d), Value::Object(s)) => {
                for (k, v) in s {
                    lay(d.entry(k.clone()).or_insert(Value::Null), v);
                }
            }
            (d, s) => *d = s.clone(),
        }
    }
    let mut out = if base.is_null() { Value::Object(Default::default()) } else { base.clone() };
    if !request.is_null() {
        lay(&mut out, request);
    }
    out
}
