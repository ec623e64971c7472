//! GTFS static feed ingestion: parsing, route selection, and trip clustering.

mod archive;
mod cluster;
mod io;
mod model;

pub use archive::FeedArchive;
pub use cluster::{
    cluster_trips, cluster_trips_with, filter_skipped_stops, select_routes, ClusterOptions, RouteSelection,
    SelectionCriteria, TripCluster,
};
pub use io::{infer_direction, parse_feed, write_feed};
pub use model::{
    CalendarDate, CalendarEntry, Direction, ExceptionType, GtfsFeed, RepresentativeDay, Route, RouteMode,
    ServiceTime, Stop, StopEvent, Trip,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("required GTFS file {file} is missing")]
    MissingFile { file: String },
    #[error("{file}:{line}: {reason}")]
    MalformedRow { file: String, line: u64, reason: String },
    #[error("{file}:{line}: {field} `{id}` does not resolve")]
    DanglingReference { file: String, line: u64, field: String, id: String },
    #[error("route `{name}` is not in the feed")]
    UnknownRouteName { name: String },
    #[error("feed archive: {0}")]
    Archive(String),
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}
