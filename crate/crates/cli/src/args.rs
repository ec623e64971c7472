use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "electrify", version, about = "Electric bus route valuation from GTFS feeds")]
pub struct Cli {
    /// Run configuration (JSON). Flags given on the command line win over it.
    #[arg(long, global = true, env = "ELECTRIFY_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a GTFS directory, select routes and cluster their trips.
    Ingest(IngestArgs),
    /// Fill the distance and elevation caches for every stop pair of a feed archive.
    Enrich(EnrichArgs),
    /// Fit the energy-efficiency surrogate by Monte Carlo over the physics model.
    Train(TrainArgs),
    /// Fleet sizing only: buses, chargers, speeds and energy per route.
    Fleet(FleetArgs),
    /// Fleet sizing, valuation and cross-route analysis; writes report.json and report.csv.
    Valuate(ValuateArgs),
    /// Re-emit a report.json as report.json and report.csv.
    Report(ReportArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
    /// Parameter profiles.
    #[command(subcommand)]
    Params(ParamsCommand),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory with the GTFS text files.
    #[arg(long)]
    pub gtfs: Option<PathBuf>,
    /// Route allow-list: one route short name per line.
    #[arg(long)]
    pub routes: Option<PathBuf>,
    /// Feed archive to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drop clusters with fewer trips.
    #[arg(long, default_value_t = 1)]
    pub min_trips: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProviderKind {
    /// Haversine distances and flat terrain for anything not yet cached.
    Offline,
    /// Use the caches as they are; fail on any missing pair.
    Cache,
}

#[derive(Debug, Args)]
pub struct EnrichArgs {
    #[arg(long)]
    pub feed: Option<PathBuf>,
    /// Cache directory; sets both --distances and --elevations.
    #[arg(long)]
    pub geo: Option<PathBuf>,
    #[arg(long)]
    pub distances: Option<PathBuf>,
    #[arg(long)]
    pub elevations: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProviderKind::Offline)]
    pub provider: ProviderKind,
}

/// Inputs every model-consuming subcommand shares.
#[derive(Debug, Args)]
pub struct StateArgs {
    /// Feed archive written by `ingest`.
    #[arg(long)]
    pub feed: Option<PathBuf>,
    /// Directory with distances.csv and elevations.csv.
    #[arg(long)]
    pub geo: Option<PathBuf>,
    /// Parameter profile (boston or milan).
    #[arg(long)]
    pub profile: Option<String>,
    /// JSON file with a partial profile merged over the named one.
    #[arg(long)]
    pub overrides: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Drive-cycle CSV (`time_s,speed_mps`); the built-in synthetic cycle if omitted.
    #[arg(long)]
    pub cycle: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FleetArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated route ids; every selected route if omitted.
    #[arg(long, value_delimiter = ',')]
    pub route_ids: Vec<String>,
    /// JSON file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValuateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated route ids; every selected route if omitted.
    #[arg(long, value_delimiter = ',')]
    pub route_ids: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report.json written by `valuate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Origin allowed by CORS; any origin if omitted.
    #[arg(long)]
    pub cors_origin: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ParamsCommand {
    /// Print a profile with every default.
    Show {
        #[arg(long)]
        profile: Option<String>,
    },
}
