//! JSON run configuration shared by the CLI subcommands and the service.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::params::{ParamProfile, PROFILE_NAMES};
use crate::surrogate::DEFAULT_SAMPLES;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub city_id: String,
    pub city_name: Option<String>,
    /// Directory of GTFS text files.
    pub gtfs_dir: Option<PathBuf>,
    /// Route allow-list, one short name per line.
    pub routes_file: Option<PathBuf>,
    /// Feed archive written by `ingest`.
    pub feed: Option<PathBuf>,
    /// Directory holding `distances.csv` and `elevations.csv`.
    pub geo_dir: Option<PathBuf>,
    /// Drive-cycle CSV; the built-in synthetic cycle when absent.
    pub cycle: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub profile: String,
    /// Partial profile deep-merged onto the named one.
    pub overrides: Value,
    pub seed: u64,
    pub bus_size: String,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            city_id: "boston".into(),
            city_name: None,
            gtfs_dir: None,
            routes_file: None,
            feed: None,
            geo_dir: None,
            cycle: None,
            model: None,
            out_dir: None,
            profile: "boston".into(),
            overrides: Value::Null,
            seed: 0,
            bus_size: "40ft".into(),
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative paths in it are taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        cfg.profile()?;
        Ok(cfg)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        for p in [
            &mut self.gtfs_dir,
            &mut self.routes_file,
            &mut self.feed,
            &mut self.geo_dir,
            &mut self.cycle,
            &mut self.model,
            &mut self.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// The named profile with the overrides applied and validated.
    pub fn profile(&self) -> Result<ParamProfile, Error> {
        let base = ParamProfile::by_name(&self.profile).ok_or_else(|| {
            Error::Config(format!("unknown profile `{}` (known: {})", self.profile, PROFILE_NAMES.join(", ")))
        })?;
        Ok(base.with_overrides(&self.overrides)?)
    }

    pub fn display_name(&self) -> String {
        self.city_name.clone().unwrap_or_else(|| self.city_id.clone())
    }
}

/// Returns the path if it was given and exists.
pub fn require_path<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, Error> {
    let p = path.as_deref().ok_or_else(|| Error::Config(format!("no {what} given")))?;
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::Config(format!("{what} {} does not exist", p.display())))
    }
}
