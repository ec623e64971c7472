mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use common::{ok, prepare, s, Prepared};
use electrify_cli::server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(p: &Prepared) -> Router {
    router(Arc::new(AppState::new(vec![p.state()], None)), Some("http://localhost:5173"))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn parse(b: &[u8]) -> Value {
    serde_json::from_slice(b).unwrap()
}

#[tokio::test]
async fn listing_endpoints() {
    let p = prepare(5, 600);
    let app = app(&p);
    let (st, body) = call(&app, "GET", "/api/health", None).await;
    assert_eq!((st, parse(&body)["status"].clone()), (StatusCode::OK, json!("ok")));

    let (st, body) = call(&app, "GET", "/api/cities", None).await;
    assert_eq!(st, StatusCode::OK);
    let cities = parse(&body);
    assert_eq!(cities[0]["city_id"], "boston");
    assert_eq!(cities[0]["routes"], 8);

    let (st, body) = call(&app, "GET", "/api/cities/boston/routes", None).await;
    assert_eq!(st, StatusCode::OK);
    let routes = parse(&body);
    assert_eq!(routes.as_array().unwrap().len(), 8);
    assert_eq!(routes[0]["route_id"], "201");
    assert_eq!(routes[0]["clusters"], 4);

    let (st, _) = call(&app, "GET", "/api/cities/atlantis/routes", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, "GET", "/api/report/latest", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn post_matches_cli_byte_for_byte() {
    let p = prepare(42, 800);
    ok(&["valuate", "--feed", s(&p.feed), "--geo", s(&p.geo), "--model", s(&p.model), "--route-ids", "201", "--out", s(&p.path("cli"))]);
    let cli = std::fs::read(p.path("cli/report.json")).unwrap();

    let app = app(&p);
    let (st, body) = call(&app, "POST", "/api/valuate", Some(r#"{"route_ids": ["201"]}"#)).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(body, cli);
    assert_eq!(parse(&body)["routes"][0]["route_id"], "201");

    let (st, latest) = call(&app, "GET", "/api/report/latest", None).await;
    assert_eq!((st, latest), (StatusCode::OK, body));
}

#[tokio::test]
async fn error_statuses() {
    let p = prepare(5, 600);
    let app = app(&p);

    let (st, body) = call(&app, "POST", "/api/valuate", Some(r#"{"route_ids": ["201", "999"]}"#)).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(parse(&body)["unknown_route_ids"], json!(["999"]));

    let neg = r#"{"route_ids": ["201"], "overrides": {"tco": {"energy_price_usd_per_kwh": -0.05}}}"#;
    let (st, body) = call(&app, "POST", "/api/valuate", Some(neg)).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(parse(&body)["field"], "tco.energy_price_usd_per_kwh");

    let wrong_type = r#"{"route_ids": ["201"], "overrides": {"tco": {"horizon_years": 2.5}}}"#;
    let (st, body) = call(&app, "POST", "/api/valuate", Some(wrong_type)).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(parse(&body)["field"], "tco.horizon_years");

    for bad in ["{", r#"{"routes": ["201"]}"#, r#"{"route_ids": []}"#, r#"{"route_ids": "201"}"#, r#"{"route_ids": ["201"], "overrides": 3}"#] {
        let (st, body) = call(&app, "POST", "/api/valuate", Some(bad)).await;
        assert_eq!(st, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(parse(&body)["error"], "bad_request");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_agree_and_state_is_untouched() {
    let p = prepare(5, 600);
    let app = app(&p);
    let req = r#"{"route_ids": ["206", "201", "204"], "overrides": {"tco": {"fuel_price_usd_per_gal": 5.8}}}"#;
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { call(&app, "POST", "/api/valuate", Some(req)).await })
        })
        .collect();
    let mut results = Vec::new();
    for h in handles {
        results.push(h.await.unwrap());
    }
    for (st, body) in &results {
        assert_eq!(*st, StatusCode::OK);
        assert_eq!(body, &results[0].1);
    }
    let ids: Vec<Value> = parse(&results[0].1)["routes"].as_array().unwrap().iter().map(|r| r["route_id"].clone()).collect();
    assert_eq!(ids, [json!("206"), json!("201"), json!("204")]);
    assert_eq!(parse(&results[0].1)["metadata"]["overrides"]["tco"]["fuel_price_usd_per_gal"], 5.8);

    // Overrides are per request: a plain request sees the profile defaults.
    let (_, plain) = call(&app, "POST", "/api/valuate", Some(r#"{"route_ids": ["201"]}"#)).await;
    let (_, dear) = call(&app, "POST", "/api/valuate", Some(r#"{"route_ids": ["201"], "overrides": {"tco": {"fuel_price_usd_per_gal": 5.8}}}"#)).await;
    let d = |b: &[u8]| parse(b)["routes"][0]["diesel"]["tco_npv_usd"].as_f64().unwrap();
    assert!(d(&dear) > d(&plain));
    let (_, again) = call(&app, "POST", "/api/valuate", Some(r#"{"route_ids": ["201"]}"#)).await;
    assert_eq!(again, plain);
}

#[tokio::test]
async fn cors_preflight_allows_the_dashboard() {
    let p = prepare(5, 600);
    let app = app(&p);
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/api/valuate")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .header("access-control-request-headers", "content-type")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert!(res.status().is_success());
    assert_eq!(res.headers()["access-control-allow-origin"], "http://localhost:5173");
}
