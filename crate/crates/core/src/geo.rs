//! Inter-stop distance, elevation change and road grade.
//!
//! Distances and elevations come from a [`GeoProvider`] and are persisted in
//! two CSV caches (`from_stop,to_stop,distance_km` and `stop_id,elevation_m`).
//! Once warm, the caches alone are enough to enrich a feed.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gtfs::{FeedArchive, Stop, TripCluster};

/// Mean Earth radius used by the offline provider.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

pub const DISTANCES_FILE: &str = "distances.csv";
pub const ELEVATIONS_FILE: &str = "elevations.csv";

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("segment {from}->{to} has non-positive distance {distance_km} km")]
    DegenerateSegment { from: String, to: String, distance_km: f64 },
    #[error("elevation change {delta_e_m} m over {distance_km} km is steeper than vertical")]
    GradeOutOfRange { delta_e_m: f64, distance_km: f64 },
    #[error("no geo data for {what}")]
    MissingGeoData { what: String },
    #[error("geo provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("provider could not resolve {} stop pair(s): {}", pairs.len(), format_pairs(pairs))]
    PartialCoverage { pairs: Vec<(String, String)> },
    #[error("{file}:{line}: {reason}")]
    MalformedCache { file: String, line: u64, reason: String },
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(", ")
}

/// Geometry of one consecutive stop pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopPairGeo {
    pub from_stop: String,
    pub to_stop: String,
    pub distance_km: f64,
    pub elevation_change_m: f64,
    pub grade_rad: f64,
}

/// Road grade angle `asin(Δe / d)` with Δe in meters and d in kilometers.
///
/// Ratios outside [-1, 1] are rejected rather than clamped.
pub fn compute_grade(delta_e_m: f64, distance_km: f64) -> Result<f64, GeoError> {
    if !(distance_km > 0.0) || !distance_km.is_finite() {
        return Err(GeoError::DegenerateSegment { from: String::new(), to: String::new(), distance_km });
    }
    let ratio = delta_e_m / (1000.0 * distance_km);
    if !(-1.0..=1.0).contains(&ratio) {
        return Err(GeoError::GradeOutOfRange { delta_e_m, distance_km });
    }
    Ok(ratio.asin())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElevationTable(BTreeMap<String, f64>);

impl ElevationTable {
    pub fn get(&self, stop_id: &str) -> Option<f64> {
        self.0.get(stop_id).copied()
    }

    pub fn insert(&mut self, stop_id: impl Into<String>, elevation_m: f64) {
        self.0.insert(stop_id.into(), elevation_m);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, GeoError> {
        let mut table = ElevationTable::default();
        for (line, row) in read_cache::<ElevationRow>(path.as_ref())? {
            if !row.elevation_m.is_finite() {
                return Err(cache_err(path.as_ref(), line, "elevation must be finite"));
            }
            table.insert(row.stop_id, row.elevation_m);
        }
        Ok(table)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), GeoError> {
        write_cache(
            path.as_ref(),
            self.0.iter().map(|(id, e)| ElevationRow { stop_id: id.clone(), elevation_m: *e }),
        )
    }
}

impl FromIterator<(String, f64)> for ElevationTable {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        ElevationTable(iter.into_iter().collect())
    }
}

/// Directed stop-to-stop road distances; A->B may differ from B->A.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistanceTable(BTreeMap<(String, String), f64>);

impl DistanceTable {
    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        self.0.get(&(from.to_string(), to.to_string())).copied()
    }

    pub fn insert(&mut self, from: impl Into<String>, to: impl Into<String>, distance_km: f64) {
        self.0.insert((from.into(), to.into()), distance_km);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, GeoError> {
        let mut table = DistanceTable::default();
        for (line, row) in read_cache::<DistanceRow>(path.as_ref())? {
            if !(row.distance_km > 0.0) || !row.distance_km.is_finite() {
                return Err(cache_err(path.as_ref(), line, "distance must be positive"));
            }
            table.insert(row.from_stop, row.to_stop, row.distance_km);
        }
        Ok(table)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), GeoError> {
        write_cache(
            path.as_ref(),
            self.0.iter().map(|((a, b), d)| DistanceRow { from_stop: a.clone(), to_stop: b.clone(), distance_km: *d }),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ElevationRow {
    stop_id: String,
    elevation_m: f64,
}

#[derive(Serialize, Deserialize)]
struct DistanceRow {
    from_stop: String,
    to_stop: String,
    distance_km: f64,
}

fn cache_err(path: &Path, line: u64, reason: impl Into<String>) -> GeoError {
    GeoError::MalformedCache { file: path.display().to_string(), line, reason: reason.into() }
}

fn read_cache<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<(u64, T)>, GeoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => GeoError::Io { file: path.display().to_string(), source },
            other => cache_err(path, 0, format!("{other:?}")),
        })?;
    let mut rows = Vec::new();
    for result in reader.deserialize::<T>() {
        let row = result.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            cache_err(path, line, e.to_string())
        })?;
        let line = rows.len() as u64 + 2;
        rows.push((line, row));
    }
    Ok(rows)
}

fn write_cache<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<(), GeoError> {
    let io = |source| GeoError::Io { file: path.display().to_string(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io(std::io::Error::other(e)))?;
    for row in rows {
        w.serialize(row).map_err(|e| io(std::io::Error::other(e)))?;
    }
    w.flush().map_err(io)
}

/// Both lookup tables, as loaded from or persisted to a cache directory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeoTables {
    pub distances: DistanceTable,
    pub elevations: ElevationTable,
}

impl GeoTables {
    /// Loads `distances.csv` and `elevations.csv` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, GeoError> {
        let cache = GeoCache::in_dir(dir);
        Ok(GeoTables {
            distances: DistanceTable::load_csv(&cache.distances)?,
            elevations: ElevationTable::load_csv(&cache.elevations)?,
        })
    }

    pub fn enrich_cluster(&self, cluster: &TripCluster) -> Result<Vec<StopPairGeo>, GeoError> {
        enrich_cluster(cluster, &self.distances, &self.elevations)
    }
}

/// One [`StopPairGeo`] per consecutive pair of the cluster's stop sequence.
pub fn enrich_cluster(
    cluster: &TripCluster,
    distances: &DistanceTable,
    elevations: &ElevationTable,
) -> Result<Vec<StopPairGeo>, GeoError> {
    cluster
        .stop_sequence
        .windows(2)
        .map(|w| {
            let (from, to) = (&w[0], &w[1]);
            let missing = |what: String| GeoError::MissingGeoData { what };
            let distance_km = distances
                .get(from, to)
                .ok_or_else(|| missing(format!("distance of pair {from}->{to}")))?;
            let e_from = elevations
                .get(from)
                .ok_or_else(|| missing(format!("elevation of stop {from} (pair {from}->{to})")))?;
            let e_to = elevations
                .get(to)
                .ok_or_else(|| missing(format!("elevation of stop {to} (pair {from}->{to})")))?;
            let elevation_change_m = e_to - e_from;
            let grade_rad = compute_grade(elevation_change_m, distance_km).map_err(|e| match e {
                GeoError::DegenerateSegment { distance_km, .. } => {
                    GeoError::DegenerateSegment { from: from.clone(), to: to.clone(), distance_km }
                }
                other => other,
            })?;
            Ok(StopPairGeo {
                from_stop: from.clone(),
                to_stop: to.clone(),
                distance_km,
                elevation_change_m,
                grade_rad,
            })
        })
        .collect()
}

/// Every directed consecutive stop pair used by the archive's clusters.
pub fn archive_pairs(archive: &FeedArchive) -> Vec<(String, String)> {
    let pairs: BTreeSet<(String, String)> = archive
        .clusters
        .values()
        .flatten()
        .flat_map(|c| c.stop_sequence.windows(2).map(|w| (w[0].clone(), w[1].clone())))
        .collect();
    pairs.into_iter().collect()
}

#[derive(Debug, Error)]
pub enum ProviderError {
    /// The whole provider is down; no further queries are attempted.
    #[error("{0}")]
    Unavailable(String),
    /// This one query has no answer.
    #[error("{0}")]
    NotFound(String),
}

/// Source of point elevations and road distances.
pub trait GeoProvider {
    fn elevation_m(&self, stop: &Stop) -> Result<f64, ProviderError>;
    fn distance_km(&self, from: &Stop, to: &Stop) -> Result<f64, ProviderError>;
}

/// Great-circle distance on a sphere of radius `radius_km`.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64, radius_km: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * radius_km * h.sqrt().asin()
}

/// Deterministic provider needing no network: haversine distances and a
/// constant ("flat earth") elevation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OfflineProvider {
    pub radius_km: f64,
    pub elevation_m: f64,
}

impl Default for OfflineProvider {
    fn default() -> Self {
        OfflineProvider { radius_km: EARTH_RADIUS_KM, elevation_m: 0.0 }
    }
}

impl GeoProvider for OfflineProvider {
    fn elevation_m(&self, _stop: &Stop) -> Result<f64, ProviderError> {
        Ok(self.elevation_m)
    }

    fn distance_km(&self, from: &Stop, to: &Stop) -> Result<f64, ProviderError> {
        Ok(haversine_km(from.lat, from.lon, to.lat, to.lon, self.radius_km))
    }
}

/// Locations of the two cache files.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoCache {
    pub distances: PathBuf,
    pub elevations: PathBuf,
}

impl GeoCache {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        GeoCache { distances: dir.join(DISTANCES_FILE), elevations: dir.join(ELEVATIONS_FILE) }
    }

    fn load_or_empty(&self) -> Result<GeoTables, GeoError> {
        Ok(GeoTables {
            distances: if self.distances.is_file() {
                DistanceTable::load_csv(&self.distances)?
            } else {
                DistanceTable::default()
            },
            elevations: if self.elevations.is_file() {
                ElevationTable::load_csv(&self.elevations)?
            } else {
                ElevationTable::default()
            },
        })
    }
}

/// Fills the cache for `pairs`, asking `provider` only for what is missing.
///
/// Whatever was resolved is written back even when some pairs fail, so a
/// rerun only retries the failures.
pub fn fetch_and_cache(
    provider: &dyn GeoProvider,
    pairs: &[(String, String)],
    stops: &BTreeMap<String, Stop>,
    cache: &GeoCache,
) -> Result<GeoTables, GeoError> {
    let mut tables = cache.load_or_empty()?;
    let mut failed_stops = BTreeSet::new();
    let mut unresolved = Vec::new();
    let mut dirty = false;

    let stop = |id: &str| {
        stops.get(id).ok_or_else(|| GeoError::MissingGeoData { what: format!("coordinates of stop {id}") })
    };

    let needed: BTreeSet<&str> = pairs.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
    for id in needed {
        if tables.elevations.get(id).is_some() {
            continue;
        }
        match provider.elevation_m(stop(id)?) {
            Ok(e) if e.is_finite() => {
                tables.elevations.insert(id, e);
                dirty = true;
            }
            Ok(_) | Err(ProviderError::NotFound(_)) => {
                failed_stops.insert(id.to_string());
            }
            Err(ProviderError::Unavailable(msg)) => return Err(GeoError::ProviderUnavailable(msg)),
        }
    }

    for (from, to) in pairs {
        let mut ok = !failed_stops.contains(from) && !failed_stops.contains(to);
        if tables.distances.get(from, to).is_none() {
            match provider.distance_km(stop(from)?, stop(to)?) {
                Ok(d) if d > 0.0 && d.is_finite() => {
                    tables.distances.insert(from.clone(), to.clone(), d);
                    dirty = true;
                }
                Ok(_) | Err(ProviderError::NotFound(_)) => ok = false,
                Err(ProviderError::Unavailable(msg)) => return Err(GeoError::ProviderUnavailable(msg)),
            }
        }
        if !ok {
            unresolved.push((from.clone(), to.clone()));
        }
    }

    if dirty {
        tables.distances.save_csv(&cache.distances)?;
        tables.elevations.save_csv(&cache.elevations)?;
    }
    if unresolved.is_empty() {
        Ok(tables)
    } else {
        Err(GeoError::PartialCoverage { pairs: unresolved })
    }
}
