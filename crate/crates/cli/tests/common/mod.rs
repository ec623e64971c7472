#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use electrify_cli::args::StateArgs;
use electrify_cli::commands::load_state;
use electrify_core::config::RunConfig;
use electrify_core::CityState;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/mini").join(rel)
}

pub fn electrify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_electrify"))
        .args(args)
        .env_remove("ELECTRIFY_CONFIG")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = electrify(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Feed archive, geo caches and a trained model for the mini fixture.
pub struct Prepared {
    pub dir: tempfile::TempDir,
    pub feed: PathBuf,
    pub geo: PathBuf,
    pub model: PathBuf,
}

impl Prepared {
    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn state(&self) -> CityState {
        let args = StateArgs { feed: Some(self.feed.clone()), geo: Some(self.geo.clone()), profile: None, overrides: None };
        load_state(&RunConfig::default(), &args, &Some(self.model.clone())).expect("state loads")
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn prepare(seed: u64, samples: usize) -> Prepared {
    let dir = tempfile::tempdir().unwrap();
    let feed = dir.path().join("feed.json");
    let geo = fixture("geo");
    let model = dir.path().join("model.json");
    ok(&["ingest", "--gtfs", s(&fixture("gtfs")), "--routes", s(&fixture("allow_list.txt")), "--out", s(&feed)]);
    ok(&[
        "train", "--feed", s(&feed), "--geo", s(&geo), "--cycle", s(&fixture("cycle.csv")),
        "--samples", &samples.to_string(), "--seed", &seed.to_string(), "--out", s(&model),
    ]);
    Prepared { dir, feed, geo, model }
}
