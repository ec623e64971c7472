//! Fleet parameters derived from the schedule: buses, speeds, annual
//! kilometers, daily cluster energy, chargers and range feasibility.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::energy::BusSpec;
use crate::field::{fraction, positive, FieldError};
use crate::geo::{GeoError, GeoTables, StopPairGeo};
use crate::gtfs::{Direction, FeedArchive, Trip, TripCluster};
use crate::surrogate::{ScenarioSample, SurrogateModel};

pub const DAYS_PER_YEAR: f64 = 365.0;

#[derive(Debug, thiserror::Error)]
pub enum FleetError {
    #[error("route {route_id} has no trips")]
    NoTrips { route_id: String },
    #[error("cluster {cluster_id} has zero mean cycle length")]
    ZeroCycleLength { cluster_id: String },
    #[error("cluster {cluster_id} references unknown trip {trip_id}")]
    UnknownTrip { cluster_id: String, trip_id: String },
    #[error("invalid charger spec: {0}")]
    InvalidCharger(FieldError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChargerSpec {
    pub power_kw: f64,
    pub fastest_charge_h: f64,
    pub efficiency: f64,
}

impl Default for ChargerSpec {
    fn default() -> Self {
        ChargerSpec { power_kw: 50.0, fastest_charge_h: 5.0, efficiency: 0.95 }
    }
}

impl ChargerSpec {
    pub fn validate(&self) -> Result<(), FieldError> {
        positive("power_kw", self.power_kw)?;
        positive("fastest_charge_h", self.fastest_charge_h)?;
        fraction("efficiency", self.efficiency)
    }

    /// Charging power actually available to a bus.
    pub fn effective_power_kw(&self, bus: &BusSpec) -> f64 {
        bus.max_charge_power_kw.map_or(self.power_kw, |p| p.min(self.power_kw))
    }
}

/// Ridership and temperatures used when predicting route energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingConditions {
    pub mean_passengers: u32,
    pub avg_temp_c: f64,
    pub lowest_temp_c: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusCount {
    pub inbound: u32,
    pub outbound: u32,
    pub total: u32,
}

/// Buses needed to run one direction's trips.
///
/// At every stop the arrivals are sorted; each arrival after the first gives
/// the ratio of that trip's cycle length to the gap since the previous bus.
/// The direction needs the ceiling of the largest ratio. A lone trip needs
/// one bus; simultaneous arrivals (zero gap) are skipped.
pub fn direction_buses(trips: &[&Trip]) -> u32 {
    if trips.is_empty() {
        return 0;
    }
    let mut arrivals: BTreeMap<&str, Vec<(u32, u32)>> = BTreeMap::new();
    for t in trips {
        let cycle = t.cycle_length_s();
        for e in &t.stop_events {
            arrivals.entry(e.stop_id.as_str()).or_default().push((e.arrival.seconds(), cycle));
        }
    }
    let mut need = 1u32;
    for list in arrivals.values_mut() {
        list.sort_unstable();
        for w in list.windows(2) {
            let headway = w[1].0 - w[0].0;
            if headway == 0 {
                continue;
            }
            let cycle = w[1].1;
            need = need.max(cycle.div_ceil(headway));
        }
    }
    need
}

/// Bus count of a route from the trips that run on the representative day.
pub fn buses_required(archive: &FeedArchive, route_id: &str) -> Result<BusCount, FleetError> {
    let all: Vec<&Trip> = archive.feed.trips_of_route(route_id).collect();
    if all.is_empty() {
        return Err(FleetError::NoTrips { route_id: route_id.to_string() });
    }
    let day: Vec<&Trip> = all.into_iter().filter(|t| archive.on_representative_day(&t.trip_id)).collect();
    let of = |d: Direction| direction_buses(&day.iter().copied().filter(|t| t.direction == d).collect::<Vec<_>>());
    let (inbound, outbound) = (of(Direction::Inbound), of(Direction::Outbound));
    Ok(BusCount { inbound, outbound, total: inbound + outbound })
}

/// Mean trip distance over mean cycle length, in km/h.
pub fn cluster_speed(mean_distance_km: f64, mean_cycle_min: f64, cluster_id: &str) -> Result<f64, FleetError> {
    if !(mean_cycle_min > 0.0) {
        return Err(FleetError::ZeroCycleLength { cluster_id: cluster_id.to_string() });
    }
    Ok(mean_distance_km / mean_cycle_min * 60.0)
}

pub fn route_speed(cluster_speeds_kmh: &[f64]) -> f64 {
    if cluster_speeds_kmh.is_empty() {
        return 0.0;
    }
    cluster_speeds_kmh.iter().sum::<f64>() / cluster_speeds_kmh.len() as f64
}

/// `E_j = Σ EE(p, T, grade_s)·d_s` over the stop pairs of one trip, in kWh.
pub fn trip_energy(pairs: &[StopPairGeo], model: &SurrogateModel, passengers: u32, temp_c: f64) -> f64 {
    pairs
        .iter()
        .map(|p| {
            let ee = model.predict(&ScenarioSample { passengers, ambient_temp_c: temp_c, grade_rad: p.grade_rad });
            ee * p.distance_km
        })
        .sum()
}

/// Total daily energy of a cluster: mean trip energy times that day's trips.
pub fn daily_cluster_energy(trip_energies_kwh: &[f64], trips_per_day: usize) -> f64 {
    if trip_energies_kwh.is_empty() {
        return 0.0;
    }
    trip_energies_kwh.iter().sum::<f64>() / trip_energies_kwh.len() as f64 * trips_per_day as f64
}

/// `ceil(ΣĒ / (P_c·T_c·η_c))`, where `P_c` already includes the bus limit.
pub fn chargers_required(daily_energies_kwh: &[f64], power_kw: f64, charge_h: f64, efficiency: f64) -> u32 {
    let total: f64 = daily_energies_kwh.iter().sum();
    if !(total > 0.0) {
        return 0;
    }
    let x = total / (power_kw * charge_h * efficiency);
    // Absorb division noise so exact multiples do not round up.
    (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as u32
}

/// `Ē < E_max·N`: the cluster's buses carry enough battery for its day.
pub fn range_feasible(daily_energy_kwh: f64, battery_kwh: f64, buses: u32) -> bool {
    daily_energy_kwh < battery_kwh * buses as f64
}

/// Route bus count apportioned to a cluster by its share of the day's trips,
/// rounded up.
pub fn apportion_buses(route_buses: u32, cluster_trips: usize, route_trips: usize) -> u32 {
    if route_trips == 0 || cluster_trips == 0 {
        return 0;
    }
    (route_buses as u64 * cluster_trips as u64).div_ceil(route_trips as u64) as u32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterFleet {
    pub cluster_id: String,
    pub direction: Direction,
    pub trips_total: usize,
    pub trips_per_day: usize,
    pub trip_distance_km: f64,
    pub mean_cycle_min: f64,
    pub speed_kmh: f64,
    pub trip_energy_kwh: f64,
    /// Daily energy at the yearly-average temperature.
    pub daily_energy_kwh: f64,
    /// Daily energy at the yearly-lowest temperature.
    pub daily_energy_cold_kwh: f64,
    pub buses: u32,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetEstimate {
    pub route_id: String,
    pub buses_inbound: u32,
    pub buses_outbound: u32,
    pub buses_total: u32,
    pub chargers: u32,
    pub cluster_speeds_kmh: BTreeMap<String, f64>,
    pub route_speed_kmh: f64,
    pub annual_vkt_km: f64,
    pub daily_energy_kwh: BTreeMap<String, f64>,
    pub annual_energy_kwh: f64,
    pub feasible: bool,
    pub needs_fast_charging: bool,
    pub clusters: Vec<ClusterFleet>,
}

impl FleetEstimate {
    pub fn total_daily_energy_kwh(&self) -> f64 {
        self.daily_energy_kwh.values().sum()
    }
}

/// Everything fleet estimation reads; all borrowed and never mutated.
#[derive(Clone, Copy, Debug)]
pub struct FleetContext<'a> {
    pub archive: &'a FeedArchive,
    pub geo: &'a GeoTables,
    pub model: &'a SurrogateModel,
    pub bus: &'a BusSpec,
    pub charger: &'a ChargerSpec,
    pub conditions: OperatingConditions,
}

fn cluster_fleet(
    ctx: &FleetContext<'_>,
    cluster: &TripCluster,
    pairs: &[StopPairGeo],
    trips: &HashMap<&str, &Trip>,
) -> Result<ClusterFleet, FleetError> {
    let mut cycles = Vec::with_capacity(cluster.trips.len());
    let mut trips_per_day = 0;
    for id in &cluster.trips {
        let trip = trips.get(id.as_str()).ok_or_else(|| FleetError::UnknownTrip {
            cluster_id: cluster.cluster_id.clone(),
            trip_id: id.clone(),
        })?;
        cycles.push(trip.cycle_length_s() as f64 / 60.0);
        if ctx.archive.on_representative_day(id) {
            trips_per_day += 1;
        }
    }
    let mean_cycle_min = cycles.iter().sum::<f64>() / cycles.len().max(1) as f64;
    // All trips of a cluster share its stop sequence, hence its distance.
    let trip_distance_km: f64 = pairs.iter().map(|p| p.distance_km).sum();
    let speed_kmh = cluster_speed(trip_distance_km, mean_cycle_min, &cluster.cluster_id)?;

    let c = ctx.conditions;
    let trip_energy_kwh = trip_energy(pairs, ctx.model, c.mean_passengers, c.avg_temp_c);
    let cold_trip_kwh = trip_energy(pairs, ctx.model, c.mean_passengers, c.lowest_temp_c);
    Ok(ClusterFleet {
        cluster_id: cluster.cluster_id.clone(),
        direction: cluster.direction,
        trips_total: cluster.trips.len(),
        trips_per_day,
        trip_distance_km,
        mean_cycle_min,
        speed_kmh,
        trip_energy_kwh,
        daily_energy_kwh: daily_cluster_energy(&[trip_energy_kwh], trips_per_day),
        daily_energy_cold_kwh: daily_cluster_energy(&[cold_trip_kwh], trips_per_day),
        buses: 0,
        feasible: true,
    })
}

/// Full fleet estimate of one route.
pub fn estimate_route(ctx: &FleetContext<'_>, route_id: &str) -> Result<FleetEstimate, FleetError> {
    ctx.charger.validate().map_err(FleetError::InvalidCharger)?;
    let buses = buses_required(ctx.archive, route_id)?;

    let trips: HashMap<&str, &Trip> =
        ctx.archive.feed.trips_of_route(route_id).map(|t| (t.trip_id.as_str(), t)).collect();
    let mut clusters = Vec::new();
    for cluster in ctx.archive.clusters_of(route_id) {
        let pairs = ctx.geo.enrich_cluster(cluster)?;
        clusters.push(cluster_fleet(ctx, cluster, &pairs, &trips)?);
    }
    let day_trips: usize = clusters.iter().map(|c| c.trips_per_day).sum();
    for c in &mut clusters {
        c.buses = apportion_buses(buses.total, c.trips_per_day, day_trips);
        // A cluster without service that day has nothing to be infeasible about.
        c.feasible = c.trips_per_day == 0 || range_feasible(c.daily_energy_cold_kwh, ctx.bus.battery_kwh, c.buses);
    }

    let speeds: Vec<f64> = clusters.iter().map(|c| c.speed_kmh).collect();
    let daily: Vec<f64> = clusters.iter().map(|c| c.daily_energy_kwh).collect();
    let annual_vkt_km = clusters.iter().map(|c| c.trip_distance_km * c.trips_per_day as f64).sum::<f64>() * DAYS_PER_YEAR;
    let chargers = chargers_required(
        &daily,
        ctx.charger.effective_power_kw(ctx.bus),
        ctx.charger.fastest_charge_h,
        ctx.charger.efficiency,
    );
    let feasible = clusters.iter().all(|c| c.feasible);

    Ok(FleetEstimate {
        route_id: route_id.to_string(),
        buses_inbound: buses.inbound,
        buses_outbound: buses.outbound,
        buses_total: buses.total,
        chargers,
        cluster_speeds_kmh: clusters.iter().map(|c| (c.cluster_id.clone(), c.speed_kmh)).collect(),
        route_speed_kmh: route_speed(&speeds),
        annual_vkt_km,
        daily_energy_kwh: clusters.iter().map(|c| (c.cluster_id.clone(), c.daily_energy_kwh)).collect(),
        annual_energy_kwh: daily.iter().sum::<f64>() * DAYS_PER_YEAR,
        feasible,
        needs_fast_charging: !feasible,
        clusters,
    })
}
