use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cluster::{cluster_trips_with, ClusterOptions, RouteSelection, TripCluster};
use super::model::{GtfsFeed, RepresentativeDay};
use super::GtfsError;

const ARCHIVE_VERSION: u32 = 1;

/// Output of `ingest`: the selected routes of a feed, their clusters and the
/// representative service day, serialized as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedArchive {
    pub version: u32,
    pub feed: GtfsFeed,
    pub selected_routes: Vec<String>,
    pub clusters: BTreeMap<String, Vec<TripCluster>>,
    pub representative_day: Option<RepresentativeDay>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FeedArchive {
    pub fn build(feed: &GtfsFeed, selection: &RouteSelection, opts: ClusterOptions) -> Self {
        let feed = feed.restricted_to(&selection.route_ids);
        let clusters = selection
            .route_ids
            .iter()
            .map(|r| (r.clone(), cluster_trips_with(&feed, r, opts)))
            .collect();
        let representative_day = feed.representative_day(&selection.route_ids);
        FeedArchive {
            version: ARCHIVE_VERSION,
            selected_routes: selection.route_ids.clone(),
            clusters,
            representative_day,
            warnings: selection.warnings.clone(),
            feed,
        }
    }

    pub fn clusters_of(&self, route_id: &str) -> &[TripCluster] {
        self.clusters.get(route_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn on_representative_day(&self, trip_id: &str) -> bool {
        self.representative_day.as_ref().is_some_and(|d| d.contains(trip_id))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GtfsError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).map_err(|e| GtfsError::Archive(e.to_string()))?;
        std::fs::write(path, json).map_err(|source| GtfsError::Io { file: path.display().to_string(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GtfsError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| GtfsError::Io { file: path.display().to_string(), source })?;
        let archive: FeedArchive = serde_json::from_str(&raw).map_err(|e| GtfsError::Archive(e.to_string()))?;
        if archive.version != ARCHIVE_VERSION {
            return Err(GtfsError::Archive(format!("unsupported archive version {}", archive.version)));
        }
        Ok(archive)
    }
}
