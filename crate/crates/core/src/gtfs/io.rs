//! Reading and writing GTFS static CSV files.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::model::{
    CalendarDate, CalendarEntry, Direction, ExceptionType, GtfsFeed, Route, ServiceTime, Stop,
    StopEvent, Trip,
};
use super::GtfsError;

#[derive(Debug, Deserialize, Serialize)]
struct StopRow {
    stop_id: String,
    #[serde(default)]
    stop_name: String,
    stop_lat: f64,
    stop_lon: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct RouteRow {
    route_id: String,
    #[serde(default)]
    route_short_name: String,
    #[serde(default)]
    route_long_name: String,
    route_type: u16,
}

#[derive(Debug, Deserialize, Serialize)]
struct TripRow {
    route_id: String,
    service_id: String,
    trip_id: String,
    #[serde(default, deserialize_with = "csv::invalid_option")]
    direction_id: Option<u8>,
}

#[derive(Debug, Deserialize, Serialize)]
struct StopTimeRow {
    trip_id: String,
    #[serde(default)]
    arrival_time: String,
    #[serde(default)]
    departure_time: String,
    stop_id: String,
    stop_sequence: u32,
}

#[derive(Debug, Deserialize, Serialize)]
struct CalendarRow {
    service_id: String,
    monday: u8,
    tuesday: u8,
    wednesday: u8,
    thursday: u8,
    friday: u8,
    saturday: u8,
    sunday: u8,
    start_date: String,
    end_date: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct CalendarDateRow {
    service_id: String,
    date: String,
    exception_type: u8,
}

/// A deserialized row and the 1-based line it came from.
struct Located<T> {
    line: u64,
    row: T,
}

fn read_rows<T: DeserializeOwned>(dir: &Path, file: &str, required: bool) -> Result<Vec<Located<T>>, GtfsError> {
    let path = dir.join(file);
    if !path.is_file() {
        return if required {
            Err(GtfsError::MissingFile { file: file.to_string() })
        } else {
            Ok(Vec::new())
        };
    }
    let mut raw = String::new();
    File::open(&path)
        .and_then(|mut f| f.read_to_string(&mut raw))
        .map_err(|source| GtfsError::Io { file: file.to_string(), source })?;
    // Feeds exported from spreadsheets frequently carry a BOM.
    let raw = raw.strip_prefix('\u{feff}').unwrap_or(&raw);

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(raw.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| malformed(file, 1, e.to_string()))?
        .clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            malformed(file, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record
            .deserialize::<T>(Some(&headers))
            .map_err(|e| malformed(file, line, e.to_string()))?;
        rows.push(Located { line, row });
    }
    Ok(rows)
}

fn malformed(file: &str, line: u64, reason: impl Into<String>) -> GtfsError {
    GtfsError::MalformedRow { file: file.to_string(), line, reason: reason.into() }
}

fn dangling(file: &str, line: u64, field: &str, id: &str) -> GtfsError {
    GtfsError::DanglingReference {
        file: file.to_string(),
        line,
        field: field.to_string(),
        id: id.to_string(),
    }
}

fn parse_date(file: &str, line: u64, raw: &str) -> Result<NaiveDate, GtfsError> {
    NaiveDate::parse_from_str(raw, "%Y%m%d").map_err(|_| malformed(file, line, format!("bad date `{raw}`")))
}

fn parse_flag(file: &str, line: u64, v: u8) -> Result<bool, GtfsError> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(malformed(file, line, format!("weekday flag must be 0 or 1, got {v}"))),
    }
}

/// Reads a GTFS directory into a cross-referenced [`GtfsFeed`].
///
/// `stops.txt`, `routes.txt`, `trips.txt` and `stop_times.txt` are required;
/// `calendar.txt` and `calendar_dates.txt` are read when present.
pub fn parse_feed(dir: impl AsRef<Path>) -> Result<GtfsFeed, GtfsError> {
    let dir = dir.as_ref();
    // Check presence of every mandatory file before reading any of them.
    for file in ["stops.txt", "routes.txt", "trips.txt", "stop_times.txt"] {
        if !dir.join(file).is_file() {
            return Err(GtfsError::MissingFile { file: file.to_string() });
        }
    }

    let mut stops = BTreeMap::new();
    for Located { line, row } in read_rows::<StopRow>(dir, "stops.txt", true)? {
        if !(-90.0..=90.0).contains(&row.stop_lat) || !(-180.0..=180.0).contains(&row.stop_lon) {
            return Err(malformed("stops.txt", line, format!("stop {} has coordinates out of range", row.stop_id)));
        }
        let stop = Stop { stop_id: row.stop_id.clone(), name: row.stop_name, lat: row.stop_lat, lon: row.stop_lon };
        if stops.insert(row.stop_id.clone(), stop).is_some() {
            return Err(malformed("stops.txt", line, format!("duplicate stop_id {}", row.stop_id)));
        }
    }

    let mut routes = BTreeMap::new();
    for Located { line, row } in read_rows::<RouteRow>(dir, "routes.txt", true)? {
        let route = Route {
            route_id: row.route_id.clone(),
            short_name: row.route_short_name,
            long_name: row.route_long_name,
            route_type: row.route_type,
        };
        if routes.insert(row.route_id.clone(), route).is_some() {
            return Err(malformed("routes.txt", line, format!("duplicate route_id {}", row.route_id)));
        }
    }

    let mut calendar = Vec::new();
    for Located { line, row } in read_rows::<CalendarRow>(dir, "calendar.txt", false)? {
        let f = |v| parse_flag("calendar.txt", line, v);
        calendar.push(CalendarEntry {
            weekdays: [
                f(row.monday)?,
                f(row.tuesday)?,
                f(row.wednesday)?,
                f(row.thursday)?,
                f(row.friday)?,
                f(row.saturday)?,
                f(row.sunday)?,
            ],
            start_date: parse_date("calendar.txt", line, &row.start_date)?,
            end_date: parse_date("calendar.txt", line, &row.end_date)?,
            service_id: row.service_id,
        });
    }
    let mut calendar_dates = Vec::new();
    for Located { line, row } in read_rows::<CalendarDateRow>(dir, "calendar_dates.txt", false)? {
        let exception = match row.exception_type {
            1 => ExceptionType::Added,
            2 => ExceptionType::Removed,
            other => return Err(malformed("calendar_dates.txt", line, format!("exception_type {other}"))),
        };
        calendar_dates.push(CalendarDate {
            date: parse_date("calendar_dates.txt", line, &row.date)?,
            service_id: row.service_id,
            exception,
        });
    }
    let has_calendar = !calendar.is_empty() || !calendar_dates.is_empty();
    let services: HashSet<&str> = calendar
        .iter()
        .map(|c| c.service_id.as_str())
        .chain(calendar_dates.iter().map(|c| c.service_id.as_str()))
        .collect();

    let trip_rows = read_rows::<TripRow>(dir, "trips.txt", true)?;
    let mut trip_index: BTreeMap<String, usize> = BTreeMap::new();
    for (i, Located { line, row }) in trip_rows.iter().enumerate() {
        if !routes.contains_key(&row.route_id) {
            return Err(dangling("trips.txt", *line, "route_id", &row.route_id));
        }
        if has_calendar && !services.contains(row.service_id.as_str()) {
            return Err(dangling("trips.txt", *line, "service_id", &row.service_id));
        }
        if let Some(d) = row.direction_id {
            if Direction::from_direction_id(d).is_none() {
                return Err(malformed("trips.txt", *line, format!("direction_id must be 0 or 1, got {d}")));
            }
        }
        if trip_index.insert(row.trip_id.clone(), i).is_some() {
            return Err(malformed("trips.txt", *line, format!("duplicate trip_id {}", row.trip_id)));
        }
    }

    let mut events: Vec<Vec<(u32, u64, StopEvent)>> = vec![Vec::new(); trip_rows.len()];
    for Located { line, row } in read_rows::<StopTimeRow>(dir, "stop_times.txt", true)? {
        let Some(&ti) = trip_index.get(&row.trip_id) else {
            return Err(dangling("stop_times.txt", line, "trip_id", &row.trip_id));
        };
        if !stops.contains_key(&row.stop_id) {
            return Err(dangling("stop_times.txt", line, "stop_id", &row.stop_id));
        }
        let time = |raw: &str| -> Result<Option<ServiceTime>, GtfsError> {
            if raw.is_empty() {
                Ok(None)
            } else {
                raw.parse().map(Some).map_err(|e: String| malformed("stop_times.txt", line, e))
            }
        };
        let (arrival, departure) = match (time(&row.arrival_time)?, time(&row.departure_time)?) {
            (Some(a), Some(d)) => (a, d),
            (Some(a), None) => (a, a),
            (None, Some(d)) => (d, d),
            (None, None) => {
                return Err(malformed("stop_times.txt", line, "untimed stop events are not supported"));
            }
        };
        if arrival > departure {
            return Err(malformed("stop_times.txt", line, "arrival_time is after departure_time"));
        }
        events[ti].push((row.stop_sequence, line, StopEvent { stop_id: row.stop_id, arrival, departure }));
    }

    let mut trips = Vec::with_capacity(trip_rows.len());
    for (Located { line, row }, mut evs) in trip_rows.into_iter().zip(events) {
        if evs.is_empty() {
            return Err(malformed("trips.txt", line, format!("trip {} has no stop_times", row.trip_id)));
        }
        evs.sort_by_key(|(seq, _, _)| *seq);
        for pair in evs.windows(2) {
            let ((s0, _, e0), (s1, l1, e1)) = (&pair[0], &pair[1]);
            if s0 == s1 {
                return Err(malformed("stop_times.txt", *l1, format!("duplicate stop_sequence {s1} in trip {}", row.trip_id)));
            }
            if e1.arrival < e0.arrival {
                return Err(malformed("stop_times.txt", *l1, format!("arrival times decrease along trip {}", row.trip_id)));
            }
        }
        let stop_events: Vec<StopEvent> = evs.into_iter().map(|(_, _, e)| e).collect();
        let direction = match row.direction_id.and_then(Direction::from_direction_id) {
            Some(d) => d,
            None => infer_direction(&stop_events),
        };
        trips.push(Trip {
            trip_id: row.trip_id,
            route_id: row.route_id,
            service_id: row.service_id,
            direction,
            stop_events,
        });
    }

    Ok(GtfsFeed { stops, routes, trips, calendar, calendar_dates })
}

/// Direction for trips without `direction_id`: outbound when the first stop id
/// sorts before the last, inbound otherwise. Reversed sequences therefore
/// always land in opposite directions.
pub fn infer_direction(events: &[StopEvent]) -> Direction {
    match (events.first(), events.last()) {
        (Some(first), Some(last)) if first.stop_id > last.stop_id => Direction::Inbound,
        _ => Direction::Outbound,
    }
}

fn write_rows<T: Serialize>(dir: &Path, file: &str, rows: impl IntoIterator<Item = T>) -> Result<(), GtfsError> {
    let io_err = |e: csv::Error| GtfsError::Io {
        file: file.to_string(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(dir.join(file)).map_err(io_err)?;
    for row in rows {
        w.serialize(row).map_err(io_err)?;
    }
    w.flush().map_err(|source| GtfsError::Io { file: file.to_string(), source })
}

/// Writes `feed` back out as GTFS files; the inverse of [`parse_feed`].
pub fn write_feed(feed: &GtfsFeed, dir: impl AsRef<Path>) -> Result<(), GtfsError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| GtfsError::Io { file: dir.display().to_string(), source })?;

    write_rows(
        dir,
        "stops.txt",
        feed.stops.values().map(|s| StopRow {
            stop_id: s.stop_id.clone(),
            stop_name: s.name.clone(),
            stop_lat: s.lat,
            stop_lon: s.lon,
        }),
    )?;
    write_rows(
        dir,
        "routes.txt",
        feed.routes.values().map(|r| RouteRow {
            route_id: r.route_id.clone(),
            route_short_name: r.short_name.clone(),
            route_long_name: r.long_name.clone(),
            route_type: r.route_type,
        }),
    )?;
    write_rows(
        dir,
        "trips.txt",
        feed.trips.iter().map(|t| TripRow {
            route_id: t.route_id.clone(),
            service_id: t.service_id.clone(),
            trip_id: t.trip_id.clone(),
            direction_id: Some(t.direction.direction_id()),
        }),
    )?;
    write_rows(
        dir,
        "stop_times.txt",
        feed.trips.iter().flat_map(|t| {
            t.stop_events.iter().enumerate().map(|(i, e)| StopTimeRow {
                trip_id: t.trip_id.clone(),
                arrival_time: e.arrival.to_string(),
                departure_time: e.departure.to_string(),
                stop_id: e.stop_id.clone(),
                stop_sequence: i as u32 + 1,
            })
        }),
    )?;
    if !feed.calendar.is_empty() {
        write_rows(
            dir,
            "calendar.txt",
            feed.calendar.iter().map(|c| {
                let d = c.weekdays.map(u8::from);
                CalendarRow {
                    service_id: c.service_id.clone(),
                    monday: d[0],
                    tuesday: d[1],
                    wednesday: d[2],
                    thursday: d[3],
                    friday: d[4],
                    saturday: d[5],
                    sunday: d[6],
                    start_date: c.start_date.format("%Y%m%d").to_string(),
                    end_date: c.end_date.format("%Y%m%d").to_string(),
                }
            }),
        )?;
    }
    if !feed.calendar_dates.is_empty() {
        write_rows(
            dir,
            "calendar_dates.txt",
            feed.calendar_dates.iter().map(|c| CalendarDateRow {
                service_id: c.service_id.clone(),
                date: c.date.format("%Y%m%d").to_string(),
                exception_type: match c.exception {
                    ExceptionType::Added => 1,
                    ExceptionType::Removed => 2,
                },
            }),
        )?;
    }
    Ok(())
}
