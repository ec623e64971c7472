mod common;

use common::{electrify, fixture, ok, prepare, s};
use serde_json::Value;

#[test]
fn missing_feed_is_a_usage_error() {
    let out = electrify(&["valuate", "--geo", "g", "--model", "m.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--feed"));
    assert_eq!(electrify(&["train", "--geo", "g"]).status.code(), Some(2));
    assert_eq!(electrify(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn module_errors_exit_1_with_a_json_category() {
    let out = electrify(&["ingest", "--gtfs", "/nonexistent", "--routes", "/nonexistent", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"], "config");

    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("list.txt");
    std::fs::write(&list, "201\n999\n").unwrap();
    let out = electrify(&["ingest", "--gtfs", s(&fixture("gtfs")), "--routes", s(&list), "--out", s(&dir.path().join("f.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"], "gtfs");
    assert!(line["message"].as_str().unwrap().contains("999"));
}

#[test]
fn train_with_the_same_seed_gives_the_same_hash() {
    let a = prepare(7, 600);
    let b = prepare(7, 600);
    let hash = |p: &std::path::Path| -> String {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["content_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash(&a.model), hash(&b.model));
    let c = prepare(8, 600);
    assert_ne!(hash(&a.model), hash(&c.model));
}

#[test]
fn config_file_and_env_fallback() {
    let p = prepare(3, 600);
    let cfg = p.path("run.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "city_id": "mini",
            "feed": "feed.json",
            "geo_dir": p.geo,
            "model": "model.json",
            "out_dir": "reports",
            "overrides": {"tco": {"fuel_price_usd_per_gal": 3.5}},
            "bus_size": "40ft"
        })
        .to_string(),
    )
    .unwrap();
    ok(&["--config", s(&cfg), "valuate"]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(p.path("reports/report.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["city_id"], "mini");
    assert_eq!(report["metadata"]["overrides"]["tco"]["fuel_price_usd_per_gal"], 3.5);

    let out = std::process::Command::new(env!("CARGO_BIN_EXE_electrify"))
        .args(["valuate", "--route-ids", "203", "--out", s(&p.path("env"))])
        .env("ELECTRIFY_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(p.path("env/report.json")).unwrap()).unwrap();
    assert_eq!(report["routes"].as_array().unwrap().len(), 1);
}

#[test]
fn valuate_is_byte_identical_and_report_reemits() {
    let p = prepare(42, 800);
    let args = |out: &str| {
        vec!["valuate".to_string(), "--feed".into(), s(&p.feed).into(), "--geo".into(), s(&p.geo).into(),
             "--model".into(), s(&p.model).into(), "--out".into(), s(&p.path(out)).into()]
    };
    let run = |out: &str| ok(&args(out).iter().map(String::as_str).collect::<Vec<_>>());
    run("a");
    run("b");
    let read = |rel: &str| std::fs::read(p.path(rel)).unwrap();
    assert_eq!(read("a/report.json"), read("b/report.json"));
    assert_eq!(read("a/report.csv"), read("b/report.csv"));
    ok(&["report", "--input", s(&p.path("a/report.json")), "--out", s(&p.path("c"))]);
    assert_eq!(read("a/report.json"), read("c/report.json"));
    assert_eq!(read("a/report.csv"), read("c/report.csv"));
}

#[test]
fn bad_overrides_name_the_field() {
    let p = prepare(1, 600);
    let ov = p.path("ov.json");
    std::fs::write(&ov, r#"{"tco": {"demand_charge_usd_per_kw": -2}}"#).unwrap();
    let out = electrify(&["valuate", "--feed", s(&p.feed), "--geo", s(&p.geo), "--model", s(&p.model), "--overrides", s(&ov), "--out", s(&p.path("o"))]);
    assert_eq!(out.status.code(), Some(1));
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"], "invalid_param");
    assert_eq!(line["field"], "tco.demand_charge_usd_per_kw");
}

#[test]
fn enrich_offline_fills_missing_pairs_and_cache_mode_checks_coverage() {
    let p = prepare(1, 600);
    let geo = p.path("geo");
    let out = electrify(&["enrich", "--feed", s(&p.feed), "--geo", s(&geo), "--provider", "cache"]);
    assert_eq!(out.status.code(), Some(1));
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"], "geo");
    ok(&["enrich", "--feed", s(&p.feed), "--geo", s(&geo)]);
    ok(&["enrich", "--feed", s(&p.feed), "--geo", s(&geo), "--provider", "cache"]);
    let elev = std::fs::read_to_string(geo.join("elevations.csv")).unwrap();
    assert_eq!(elev.lines().count(), 17);
}

#[test]
fn fleet_and_params_show() {
    let p = prepare(1, 600);
    ok(&["fleet", "--feed", s(&p.feed), "--geo", s(&p.geo), "--model", s(&p.model), "--route-ids", "201,202", "--out", s(&p.path("fleet.json"))]);
    let fleets: Value = serde_json::from_str(&std::fs::read_to_string(p.path("fleet.json")).unwrap()).unwrap();
    assert_eq!(fleets[0]["route_id"], "201");
    assert_eq!(fleets[0]["buses_total"], 3);

    let out = ok(&["params", "show", "--profile", "milan"]);
    let profile: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(profile["tco"]["fuel_price_usd_per_gal"], 5.8);
    assert_eq!(profile["emissions"]["electric_w2t_kg_per_kwh"], 0.483);
    let out = ok(&["params", "show"]);
    let profile: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(profile["name"], "boston");
    assert_eq!(electrify(&["params", "show", "--profile", "paris"]).status.code(), Some(1));
}
