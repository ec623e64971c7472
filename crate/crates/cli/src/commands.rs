use std::path::{Path, PathBuf};
use std::sync::Arc;

use electrify_core::config::RunConfig;
use electrify_core::energy::DriveCycle;
use electrify_core::geo::{archive_pairs, fetch_and_cache, GeoCache, GeoProvider, GeoTables, OfflineProvider, ProviderError};
use electrify_core::gtfs::{parse_feed, select_routes, ClusterOptions, FeedArchive, SelectionCriteria, Stop};
use electrify_core::pipeline::train_model;
use electrify_core::report::{emit_report, REPORT_JSON};
use electrify_core::surrogate::{SurrogateModel, TrainOptions};
use electrify_core::{CityState, Error, Report, ValuationRequest};
use serde_json::{json, Value};

use crate::args::{Cli, Command, EnrichArgs, FleetArgs, IngestArgs, ParamsCommand, ProviderKind, ServeArgs, StateArgs, TrainArgs, ValuateArgs};
use crate::server::{serve, AppState};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A required input is missing; reported as a usage error (exit 2).
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.category(),
            CliError::Io { .. } => "io",
        }
    }

    /// The one-line JSON form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({"error": self.category(), "message": self.to_string()});
        match self {
            CliError::Core(Error::InvalidParam(f)) => v["field"] = json!(f.field),
            CliError::Core(Error::UnknownRoutes(ids)) => v["unknown_route_ids"] = json!(ids),
            _ => {}
        }
        v
    }
}

impl From<electrify_core::surrogate::SurrogateError> for CliError {
    fn from(e: electrify_core::surrogate::SurrogateError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<electrify_core::gtfs::GtfsError> for CliError {
    fn from(e: electrify_core::gtfs::GtfsError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<electrify_core::geo::GeoError> for CliError {
    fn from(e: electrify_core::geo::GeoError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<electrify_core::energy::EnergyError> for CliError {
    fn from(e: electrify_core::energy::EnergyError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<electrify_core::report::ReportError> for CliError {
    fn from(e: electrify_core::report::ReportError) -> Self {
        CliError::Core(e.into())
    }
}

fn pick(flag: &Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| CliError::Usage(format!("the following required argument was not provided: --{name}")))
}

fn existing(path: PathBuf, what: &str) -> Result<PathBuf, CliError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::Config(format!("{what} {} does not exist", path.display())).into())
    }
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
        }
        _ => Ok(()),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    create_parent(path)?;
    let body = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, body).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn print_json(value: Value) {
    println!("{value}");
}

/// The run configuration with the profile, overrides and feed inputs of
/// `args` laid over it.
fn effective_config(cfg: &RunConfig, args: &StateArgs) -> Result<RunConfig, CliError> {
    let mut cfg = cfg.clone();
    if let Some(p) = &args.profile {
        cfg.profile = p.clone();
    }
    if let Some(path) = &args.overrides {
        let raw = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        cfg.overrides = serde_json::from_str(&raw)
            .map_err(|e| Error::Config(format!("overrides file {}: {e}", path.display())))?;
    }
    cfg.feed = Some(pick(&args.feed, &cfg.feed, "feed")?);
    cfg.geo_dir = Some(pick(&args.geo, &cfg.geo_dir, "geo")?);
    Ok(cfg)
}

fn load_inputs(cfg: &RunConfig) -> Result<(FeedArchive, GeoTables), CliError> {
    let feed = existing(cfg.feed.clone().expect("set by effective_config"), "feed archive")?;
    let geo = existing(cfg.geo_dir.clone().expect("set by effective_config"), "geo cache directory")?;
    Ok((FeedArchive::load(feed)?, GeoTables::load_dir(geo)?))
}

/// Loads everything a valuation needs into immutable city state.
pub fn load_state(cfg: &RunConfig, args: &StateArgs, model: &Option<PathBuf>) -> Result<CityState, CliError> {
    let cfg = effective_config(cfg, args)?;
    let model_path = existing(pick(model, &cfg.model, "model")?, "model")?;
    let profile = cfg.profile()?;
    let (archive, geo) = load_inputs(&cfg)?;
    let model = SurrogateModel::load(&model_path)?;
    log::info!(
        "loaded {} routes, {} stop pairs, model {}",
        archive.selected_routes.len(),
        geo.distances.len(),
        &model.content_hash[..12.min(model.content_hash.len())]
    );
    Ok(CityState {
        city_id: cfg.city_id.clone(),
        name: cfg.display_name(),
        archive,
        geo,
        seed: model.seed,
        model,
        profile,
        base_overrides: cfg.overrides.clone(),
        bus_size: cfg.bus_size.clone(),
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Ingest(a) => ingest(&cfg, a),
        Command::Enrich(a) => enrich(&cfg, a),
        Command::Train(a) => train(&cfg, a),
        Command::Fleet(a) => fleet(&cfg, a),
        Command::Valuate(a) => valuate(&cfg, a),
        Command::Report(a) => {
            let report = Report::load(&a.input)?;
            let (json, csv) = emit_report(&report, &a.out)?;
            print_json(json!({"report_json": json, "report_csv": csv}));
            Ok(())
        }
        Command::Serve(a) => serve_cmd(&cfg, a),
        Command::Params(ParamsCommand::Show { profile }) => {
            let mut cfg = cfg.clone();
            if let Some(p) = profile {
                cfg.profile = p;
            }
            println!("{}", serde_json::to_string_pretty(&cfg.profile()?).expect("serializable"));
            Ok(())
        }
    }
}

fn ingest(cfg: &RunConfig, a: IngestArgs) -> Result<(), CliError> {
    let gtfs = existing(pick(&a.gtfs, &cfg.gtfs_dir, "gtfs")?, "GTFS directory")?;
    let routes = existing(pick(&a.routes, &cfg.routes_file, "routes")?, "route allow-list")?;
    let out = pick(&a.out, &cfg.feed, "out")?;
    let feed = parse_feed(&gtfs)?;
    let raw = std::fs::read_to_string(&routes).map_err(|source| CliError::Io { path: routes.clone(), source })?;
    let selection = select_routes(&feed, &SelectionCriteria::parse_allow_list(&raw))?;
    let archive = FeedArchive::build(&feed, &selection, ClusterOptions { min_trips: a.min_trips });
    create_parent(&out)?;
    archive.save(&out)?;
    let clusters: usize = archive.clusters.values().map(Vec::len).sum();
    log::info!("{} routes, {clusters} clusters written to {}", archive.selected_routes.len(), out.display());
    print_json(json!({
        "feed": out,
        "routes": archive.selected_routes,
        "clusters": clusters,
        "representative_day": archive.representative_day.as_ref().map(|d| &d.label),
        "warnings": archive.warnings,
    }));
    Ok(())
}

/// Answers nothing, so only cached values are used.
struct CacheOnly;

impl GeoProvider for CacheOnly {
    fn elevation_m(&self, stop: &Stop) -> Result<f64, ProviderError> {
        Err(ProviderError::NotFound(format!("no cached elevation for {}", stop.stop_id)))
    }

    fn distance_km(&self, from: &Stop, to: &Stop) -> Result<f64, ProviderError> {
        Err(ProviderError::NotFound(format!("no cached distance for {}->{}", from.stop_id, to.stop_id)))
    }
}

fn enrich(cfg: &RunConfig, a: EnrichArgs) -> Result<(), CliError> {
    let feed = existing(pick(&a.feed, &cfg.feed, "feed")?, "feed archive")?;
    let dir = a.geo.clone().or_else(|| cfg.geo_dir.clone());
    let in_dir = dir.as_ref().map(GeoCache::in_dir);
    let cache = GeoCache {
        distances: pick(&a.distances, &in_dir.as_ref().map(|c| c.distances.clone()), "distances")?,
        elevations: pick(&a.elevations, &in_dir.as_ref().map(|c| c.elevations.clone()), "elevations")?,
    };
    create_parent(&cache.distances)?;
    create_parent(&cache.elevations)?;
    let archive = FeedArchive::load(feed)?;
    let pairs = archive_pairs(&archive);
    let provider: Box<dyn GeoProvider> = match a.provider {
        ProviderKind::Offline => Box::new(OfflineProvider::default()),
        ProviderKind::Cache => Box::new(CacheOnly),
    };
    let tables = fetch_and_cache(provider.as_ref(), &pairs, &archive.feed.stops, &cache)?;
    log::info!("{} pairs covered", pairs.len());
    print_json(json!({
        "distances": cache.distances,
        "elevations": cache.elevations,
        "pairs": pairs.len(),
        "cached_distances": tables.distances.len(),
        "cached_elevations": tables.elevations.len(),
    }));
    Ok(())
}

fn train(cfg: &RunConfig, a: TrainArgs) -> Result<(), CliError> {
    let run = effective_config(cfg, &a.state)?;
    let profile = run.profile()?;
    let (archive, geo) = load_inputs(&run)?;
    let out = pick(&a.out, &cfg.model, "out")?;
    let cycle = match a.cycle.clone().or_else(|| cfg.cycle.clone()) {
        Some(path) => DriveCycle::load_csv(existing(path, "drive cycle")?)?,
        None => DriveCycle::synthetic_stop_and_go(),
    };
    let opts = TrainOptions {
        samples: a.samples.unwrap_or(cfg.samples),
        seed: a.seed.unwrap_or(cfg.seed),
        ..Default::default()
    };
    let model = train_model(&archive, &geo, &cycle, &profile, &opts)?;
    create_parent(&out)?;
    model.save(&out)?;
    log::info!("model written to {} (test RMSE {:?})", out.display(), model.test_rmse);
    print_json(json!({
        "model": out,
        "content_hash": model.content_hash,
        "train_rmse": model.train_rmse,
        "test_rmse": model.test_rmse,
        "sweeps": model.sweeps,
    }));
    Ok(())
}

fn route_selection(state: &CityState, ids: Vec<String>) -> Vec<String> {
    if ids.is_empty() {
        state.archive.selected_routes.clone()
    } else {
        ids
    }
}

fn fleet(cfg: &RunConfig, a: FleetArgs) -> Result<(), CliError> {
    let state = load_state(cfg, &a.state, &a.model)?;
    let out = pick(&a.out, &cfg.out_dir.as_ref().map(|d| d.join("fleet.json")), "out")?;
    let ids = route_selection(&state, a.route_ids);
    let fleets = state.fleet(&state.profile, &ids)?;
    write_json(&out, &fleets)?;
    print_json(json!({"fleet": out, "routes": ids.len()}));
    Ok(())
}

fn valuate(cfg: &RunConfig, a: ValuateArgs) -> Result<(), CliError> {
    let state = load_state(cfg, &a.state, &a.model)?;
    let out = pick(&a.out, &cfg.out_dir, "out")?;
    let req = ValuationRequest { city_id: None, route_ids: route_selection(&state, a.route_ids), overrides: Value::Null };
    let report = state.valuate(&req)?;
    let (json, csv) = emit_report(&report, &out)?;
    log::info!("{} routes valued; frontier {:?}", report.routes.len(), report.analysis.pareto_frontier);
    print_json(json!({"report_json": json, "report_csv": csv, "routes": report.routes.len()}));
    Ok(())
}

fn serve_cmd(cfg: &RunConfig, a: ServeArgs) -> Result<(), CliError> {
    let state = load_state(cfg, &a.state, &a.model)?;
    let latest = cfg.out_dir.as_ref().map(|d| d.join(REPORT_JSON)).filter(|p| p.is_file());
    let latest = match latest {
        Some(p) => Some(Report::load(p)?),
        None => None,
    };
    let app = AppState::new(vec![state], latest);
    let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: PathBuf::from("<runtime>"), source })?;
    rt.block_on(serve(Arc::new(app), a.bind, a.cors_origin))
        .map_err(|source| CliError::Io { path: PathBuf::from(a.bind.to_string()), source })
}
