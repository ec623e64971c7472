use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Seconds since local midnight of the service day.
///
/// GTFS allows values past `24:00:00` for trips that run past midnight, so
/// this is an unbounded non-negative count rather than a clock time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServiceTime(pub u32);

impl ServiceTime {
    pub fn seconds(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ServiceTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        write!(f, "{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
    }
}

impl FromStr for ServiceTime {
    type Err = String;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let raw = raw.trim();
        let mut parts = raw.split(':');
        let mut next = |what: &str| -> Result<u32, String> {
            parts
                .next()
                .ok_or_else(|| format!("time `{raw}` is missing {what}"))?
                .parse::<u32>()
                .map_err(|_| format!("time `{raw}` has a non-numeric {what}"))
        };
        let (h, m, s) = (next("hours")?, next("minutes")?, next("seconds")?);
        if parts.next().is_some() {
            return Err(format!("time `{raw}` has too many fields"));
        }
        if m >= 60 || s >= 60 {
            return Err(format!("time `{raw}` has minutes or seconds out of range"));
        }
        Ok(ServiceTime(h * 3600 + m * 60 + s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub stop_id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

/// Transport mode decoded from the GTFS `route_type` code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteMode {
    Tram,
    Subway,
    Rail,
    Bus,
    Ferry,
    CableTram,
    AerialLift,
    Funicular,
    Trolleybus,
    Monorail,
    Other,
}

impl RouteMode {
    /// Maps both the basic and the extended (hierarchical) route types.
    pub fn from_route_type(code: u16) -> Self {
        match code {
            0 | 900..=999 => RouteMode::Tram,
            1 | 401..=402 => RouteMode::Subway,
            2 | 100..=199 => RouteMode::Rail,
            3 | 200..=299 | 700..=716 => RouteMode::Bus,
            4 | 1000..=1099 | 1200 => RouteMode::Ferry,
            5 => RouteMode::CableTram,
            6 | 1300..=1399 => RouteMode::AerialLift,
            7 | 1400 => RouteMode::Funicular,
            11 | 800 => RouteMode::Trolleybus,
            12 | 405 => RouteMode::Monorail,
            _ => RouteMode::Other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub route_id: String,
    pub short_name: String,
    pub long_name: String,
    pub route_type: u16,
}

impl Route {
    pub fn mode(&self) -> RouteMode {
        RouteMode::from_route_type(self.route_type)
    }

    /// Short name if present, otherwise the id.
    pub fn display_name(&self) -> &str {
        if self.short_name.is_empty() {
            &self.route_id
        } else {
            &self.short_name
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Outbound,
    Inbound,
}

impl Direction {
    /// GTFS `direction_id`: 0 is outbound, 1 is inbound.
    pub fn from_direction_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(Direction::Outbound),
            1 => Some(Direction::Inbound),
            _ => None,
        }
    }

    pub fn direction_id(self) -> u8 {
        match self {
            Direction::Outbound => 0,
            Direction::Inbound => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopEvent {
    pub stop_id: String,
    pub arrival: ServiceTime,
    pub departure: ServiceTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub trip_id: String,
    pub route_id: String,
    pub service_id: String,
    pub direction: Direction,
    pub stop_events: Vec<StopEvent>,
}

impl Trip {
    /// First departure to last arrival, in seconds.
    pub fn cycle_length_s(&self) -> u32 {
        match (self.stop_events.first(), self.stop_events.last()) {
            (Some(first), Some(last)) => last.arrival.0.saturating_sub(first.departure.0),
            _ => 0,
        }
    }

    pub fn stop_ids(&self) -> impl Iterator<Item = &str> {
        self.stop_events.iter().map(|e| e.stop_id.as_str())
    }
}

/// One row of `calendar.txt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalendarEntry {
    pub service_id: String,
    /// Monday first.
    pub weekdays: [bool; 7],
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
}

impl CalendarEntry {
    pub fn runs_on(&self, date: NaiveDate) -> bool {
        date >= self.start_date
            && date <= self.end_date
            && self.weekdays[date.weekday().num_days_from_monday() as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionType {
    Added,
    Removed,
}

/// One row of `calendar_dates.txt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalendarDate {
    pub service_id: String,
    pub date: NaiveDate,
    pub exception: ExceptionType,
}

/// Fully cross-referenced static schedule.
///
/// Immutable after construction; every trip references an existing route and
/// every stop event an existing stop.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GtfsFeed {
    pub stops: BTreeMap<String, Stop>,
    pub routes: BTreeMap<String, Route>,
    pub trips: Vec<Trip>,
    #[serde(default)]
    pub calendar: Vec<CalendarEntry>,
    #[serde(default)]
    pub calendar_dates: Vec<CalendarDate>,
}

/// The service day whose trips define "daily" quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeDay {
    /// ISO date, or `service:<id>` when the feed has no calendar files.
    pub label: String,
    pub trip_ids: BTreeSet<String>,
}

impl RepresentativeDay {
    pub fn contains(&self, trip_id: &str) -> bool {
        self.trip_ids.contains(trip_id)
    }
}

impl GtfsFeed {
    pub fn trip(&self, trip_id: &str) -> Option<&Trip> {
        self.trips.iter().find(|t| t.trip_id == trip_id)
    }

    pub fn trips_of_route<'a>(&'a self, route_id: &'a str) -> impl Iterator<Item = &'a Trip> + 'a {
        self.trips.iter().filter(move |t| t.route_id == route_id)
    }

    pub fn route_by_short_name(&self, name: &str) -> Option<&Route> {
        self.routes.values().find(|r| r.short_name == name)
    }

    /// Earliest and latest calendar dates mentioned by the feed.
    pub fn feed_window(&self) -> Option<(NaiveDate, NaiveDate)> {
        let dates = self
            .calendar
            .iter()
            .flat_map(|c| [c.start_date, c.end_date])
            .chain(self.calendar_dates.iter().map(|d| d.date));
        dates.fold(None, |acc, d| match acc {
            None => Some((d, d)),
            Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
        })
    }

    pub fn service_active(&self, service_id: &str, date: NaiveDate) -> bool {
        let exception = self
            .calendar_dates
            .iter()
            .find(|d| d.service_id == service_id && d.date == date);
        match exception {
            Some(d) => d.exception == ExceptionType::Added,
            None => self
                .calendar
                .iter()
                .any(|c| c.service_id == service_id && c.runs_on(date)),
        }
    }

    /// The day with the most trips on the given routes.
    ///
    /// With calendar data, every date of the feed window is scanned and the
    /// earliest busiest date wins. Without it, each `service_id` stands for
    /// one day and the busiest one wins (ties broken by id).
    pub fn representative_day(&self, route_ids: &[String]) -> Option<RepresentativeDay> {
        let wanted: BTreeSet<&str> = route_ids.iter().map(String::as_str).collect();
        let trips: Vec<&Trip> = self
            .trips
            .iter()
            .filter(|t| wanted.contains(t.route_id.as_str()))
            .collect();
        if trips.is_empty() {
            return None;
        }

        if let Some((start, end)) = self.feed_window() {
            let mut best: Option<(usize, NaiveDate)> = None;
            for date in start.iter_days().take_while(|d| *d <= end) {
                let n = trips
                    .iter()
                    .filter(|t| self.service_active(&t.service_id, date))
                    .count();
                if best.is_none_or(|(m, _)| n > m) {
                    best = Some((n, date));
                }
            }
            let (_, date) = best?;
            return Some(RepresentativeDay {
                label: date.format("%Y-%m-%d").to_string(),
                trip_ids: trips
                    .iter()
                    .filter(|t| self.service_active(&t.service_id, date))
                    .map(|t| t.trip_id.clone())
                    .collect(),
            });
        }

        let mut per_service: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &trips {
            *per_service.entry(t.service_id.as_str()).or_default() += 1;
        }
        let (service, _) = per_service
            .iter()
            .fold(None, |best: Option<(&str, usize)>, (s, n)| match best {
                Some((_, m)) if m >= *n => best,
                _ => Some((s, *n)),
            })?;
        Some(RepresentativeDay {
            label: format!("service:{service}"),
            trip_ids: trips
                .iter()
                .filter(|t| t.service_id == service)
                .map(|t| t.trip_id.clone())
                .collect(),
        })
    }

    /// Copy of the feed holding only the given routes, their trips, and the
    /// stops and services those trips use.
    pub fn restricted_to(&self, route_ids: &[String]) -> GtfsFeed {
        let wanted: BTreeSet<&str> = route_ids.iter().map(String::as_str).collect();
        let trips: Vec<Trip> = self
            .trips
            .iter()
            .filter(|t| wanted.contains(t.route_id.as_str()))
            .cloned()
            .collect();
        let stop_ids: BTreeSet<&str> = trips.iter().flat_map(|t| t.stop_ids()).collect();
        let services: BTreeSet<&str> = trips.iter().map(|t| t.service_id.as_str()).collect();
        GtfsFeed {
            stops: self
                .stops
                .iter()
                .filter(|(id, _)| stop_ids.contains(id.as_str()))
                .map(|(id, s)| (id.clone(), s.clone()))
                .collect(),
            routes: self
                .routes
                .iter()
                .filter(|(id, _)| wanted.contains(id.as_str()))
                .map(|(id, r)| (id.clone(), r.clone()))
                .collect(),
            calendar: self
                .calendar
                .iter()
                .filter(|c| services.contains(c.service_id.as_str()))
                .cloned()
                .collect(),
            calendar_dates: self
                .calendar_dates
                .iter()
                .filter(|c| services.contains(c.service_id.as_str()))
                .cloned()
                .collect(),
            trips,
        }
    }
}
