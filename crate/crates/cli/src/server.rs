//! JSON API over immutable, preloaded city state.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use electrify_core::{CityState, Error, Report, ValuationRequest};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub struct AppState {
    cities: BTreeMap<String, Arc<CityState>>,
    /// Last successful valuation; the only thing requests change.
    latest: RwLock<Option<Arc<Report>>>,
}

impl AppState {
    pub fn new(cities: Vec<CityState>, latest: Option<Report>) -> Self {
        AppState {
            cities: cities.into_iter().map(|c| (c.city_id.clone(), Arc::new(c))).collect(),
            latest: RwLock::new(latest.map(Arc::new)),
        }
    }
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let mut body = json!({"error": e.category(), "message": e.to_string()});
        let status = match &e {
            Error::BadRequest(_) => StatusCode::BAD_REQUEST,
            Error::UnknownRoutes(ids) => {
                body["unknown_route_ids"] = json!(ids);
                StatusCode::NOT_FOUND
            }
            Error::InvalidParam(f) => {
                body["field"] = json!(f.field);
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(body)).into_response()
    }
}

fn not_found(message: String) -> Response {
    (StatusCode::NOT_FOUND, Json(json!({"error": "not_found", "message": message}))).into_response()
}

async fn health() -> impl IntoResponse {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

async fn cities(State(app): State<Arc<AppState>>) -> impl IntoResponse {
    Json(app.cities.values().map(|c| c.summary()).collect::<Vec<_>>())
}

async fn city_routes(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match app.cities.get(&id) {
        Some(c) => Json(c.routes()).into_response(),
        None => not_found(format!("unknown city {id}")),
    }
}

fn pick_city(app: &AppState, req: &ValuationRequest) -> Result<Arc<CityState>, Error> {
    match &req.city_id {
        Some(id) => app.cities.get(id).cloned().ok_or_else(|| Error::BadRequest(format!("unknown city {id}"))),
        None if app.cities.len() == 1 => Ok(app.cities.values().next().expect("one city").clone()),
        None => Err(Error::BadRequest("city_id is required when several cities are loaded".into())),
    }
}

/// Reports go out exactly as `report.json` is written.
fn report_response(r: &Report) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], r.to_json()).into_response()
}

async fn valuate(State(app): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    // Parsed by hand so every malformed body is a 400, whatever serde disliked.
    let req: ValuationRequest =
        serde_json::from_slice(&body).map_err(|e| Error::BadRequest(format!("malformed request: {e}")))?;
    let city = pick_city(&app, &req)?;
    let report = tokio::task::spawn_blocking(move || city.valuate(&req))
        .await
        .map_err(|e| Error::Config(format!("valuation task failed: {e}")))??;
    let response = report_response(&report);
    *app.latest.write().expect("latest lock") = Some(Arc::new(report));
    Ok(response)
}

async fn latest(State(app): State<Arc<AppState>>) -> Response {
    match app.latest.read().expect("latest lock").clone() {
        Some(r) => report_response(&r),
        None => not_found("no valuation has been run yet".into()),
    }
}

/// The API routes with CORS for `origin` (any origin when `None`).
pub fn router(app: Arc<AppState>, origin: Option<&str>) -> Router {
    let allow = match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/cities", get(cities))
        .route("/api/cities/{id}/routes", get(city_routes))
        .route("/api/valuate", post(valuate))
        .route("/api/report/latest", get(latest))
        .layer(cors)
        .with_state(app)
}

pub async fn serve(app: Arc<AppState>, bind: SocketAddr, origin: Option<String>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app, origin.as_deref()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
