//! Route selection and trip clustering.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::model::{Direction, GtfsFeed, RouteMode, StopEvent, Trip};
use super::GtfsError;

/// Trips of one route sharing an exact stop sequence and direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripCluster {
    pub cluster_id: String,
    pub route_id: String,
    pub direction: Direction,
    pub stop_sequence: Vec<String>,
    pub trips: Vec<String>,
}

/// Drops stops the bus skips.
///
/// A run of consecutive events with identical arrival times is read as "the
/// first stop is served, the rest are passed"; only the first of each run is
/// kept.
pub fn filter_skipped_stops(trip: &Trip) -> Trip {
    let mut events: Vec<StopEvent> = Vec::with_capacity(trip.stop_events.len());
    for e in &trip.stop_events {
        match events.last() {
            Some(prev) if prev.arrival == e.arrival => {}
            _ => events.push(e.clone()),
        }
    }
    Trip { stop_events: events, ..trip.clone() }
}

/// Which routes to evaluate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionCriteria {
    /// Route short names (the public line numbers).
    pub allow_list: Vec<String>,
}

impl SelectionCriteria {
    /// One short name per line; blank lines and `#` comments are ignored.
    pub fn parse_allow_list(text: &str) -> Self {
        let allow_list = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        SelectionCriteria { allow_list }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RouteSelection {
    /// Selected route ids, in allow-list order.
    pub route_ids: Vec<String>,
    pub warnings: Vec<String>,
}

/// Resolves the allow-list against the feed, keeping bus routes only.
pub fn select_routes(feed: &GtfsFeed, criteria: &SelectionCriteria) -> Result<RouteSelection, GtfsError> {
    let mut selection = RouteSelection::default();
    let mut seen = BTreeSet::new();
    for name in &criteria.allow_list {
        let route = feed
            .route_by_short_name(name)
            .or_else(|| feed.routes.get(name))
            .ok_or_else(|| GtfsError::UnknownRouteName { name: name.clone() })?;
        if route.mode() != RouteMode::Bus {
            let msg = format!(
                "route {} is a {:?} route (route_type {}), not a bus; excluded",
                route.display_name(),
                route.mode(),
                route.route_type
            );
            log::warn!("{msg}");
            selection.warnings.push(msg);
            continue;
        }
        if seen.insert(route.route_id.clone()) {
            selection.route_ids.push(route.route_id.clone());
        }
    }
    Ok(selection)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterOptions {
    /// Clusters with fewer trips are dropped. The default of 1 keeps all.
    pub min_trips: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions { min_trips: 1 }
    }
}

/// Partitions a route's trips by (direction, filtered stop sequence).
///
/// Clusters come out largest first; equal sizes keep first-seen order. Ids
/// are `<route_id>:<n>` with `n` counting from 1 in that order.
pub fn cluster_trips(feed: &GtfsFeed, route_id: &str) -> Vec<TripCluster> {
    cluster_trips_with(feed, route_id, ClusterOptions::default())
}

pub fn cluster_trips_with(feed: &GtfsFeed, route_id: &str, opts: ClusterOptions) -> Vec<TripCluster> {
    let mut index: HashMap<(Direction, Vec<String>), usize> = HashMap::new();
    let mut groups: Vec<(Direction, Vec<String>, Vec<String>)> = Vec::new();
    for trip in feed.trips_of_route(route_id) {
        let filtered = filter_skipped_stops(trip);
        let seq: Vec<String> = filtered.stop_ids().map(str::to_string).collect();
        let key = (trip.direction, seq);
        let slot = *index.entry(key.clone()).or_insert_with(|| {
            groups.push((key.0, key.1, Vec::new()));
            groups.len() - 1
        });
        groups[slot].2.push(trip.trip_id.clone());
    }
    // Stable sort keeps first-seen order among equal sizes.
    groups.sort_by_key(|g| std::cmp::Reverse(g.2.len()));
    groups
        .into_iter()
        .filter(|g| g.2.len() >= opts.min_trips.max(1))
        .enumerate()
        .map(|(k, (direction, stop_sequence, trips))| TripCluster {
            cluster_id: format!("{route_id}:{}", k + 1),
            route_id: route_id.to_string(),
            direction,
            stop_sequence,
            trips,
        })
        .collect()
}
