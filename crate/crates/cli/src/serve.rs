//! Stateless HTTP tile service.
//!
//! Each request is computed on the blocking pool while it holds one of a
//! fixed number of permits; when none is free the request is turned away
//! with 503 and `Retry-After`. Identical queries give identical bytes.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use henonlab::potential::sample_mu;
use henonlab::saddles::SearchBudget;
use henonlab::slices::{
    connectivity, estimate_lambda, ConnectivityConfig, ParamRegion, Probe, ProbeBudget, RenderConfig, Window, MAX_DEPTH,
};
use henonlab::{Error, HenonParams, C64};
use serde::Serialize;
use serde_json::json;
use tokio::sync::Semaphore;

use crate::args::ServeArgs;
use crate::commands::Failure;
use crate::tiles::{dyn_image, encode, param_image, DynRequest, Encoding, ParamRequest};

/// Largest tile side served.
pub const MAX_TILE: u32 = 2048;
const RETRY_AFTER_SECS: &str = "1";
const CACHE_CONTROL: &str = "public, max-age=86400";

#[derive(Clone)]
pub struct AppState {
    permits: Arc<Semaphore>,
    workers: usize,
}

impl AppState {
    pub fn new(workers: usize) -> Self {
        Self {
            permits: Arc::new(Semaphore::new(workers)),
            workers,
        }
    }

    /// The pool's permits; holding them all makes the service report busy.
    pub fn permits(&self) -> Arc<Semaphore> {
        self.permits.clone()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/tile/dyn", get(tile_dyn))
        .route("/tile/param", get(tile_param))
        .route("/verdict", get(verdict))
        .with_state(state)
}

pub fn run(args: &ServeArgs, threads: Option<usize>) -> Result<(), Failure> {
    let workers = args
        .workers
        .or(threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Failure::Validation("invalid workers: must be at least 1".into()));
    }
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Other(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| Failure::Other(format!("binding {}:{}: {e}", args.host, args.port)))?;
        eprintln!(
            "henonlab: serving on http://{}",
            listener.local_addr().map_err(|e| Failure::Other(e.to_string()))?
        );
        axum::serve(listener, router(AppState::new(workers)))
            .await
            .map_err(|e| Failure::Other(e.to_string()))
    })
}

#[derive(Debug, Serialize)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

fn bad_request(errors: Vec<FieldError>) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "errors": errors }))).into_response()
}

fn error_response(e: Error) -> Response {
    match e {
        Error::InvalidParameter { field, reason } => bad_request(vec![FieldError {
            field: field.into(),
            reason,
        }]),
        Error::Resource(reason) => bad_request(vec![FieldError {
            field: "cost".into(),
            reason,
        }]),
        e => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": e.to_string() })),
        )
            .into_response(),
    }
}

fn busy() -> Response {
    let mut r = (
        StatusCode::SERVICE_UNAVAILABLE,
        Json(json!({ "error": "all workers busy" })),
    )
        .into_response();
    r.headers_mut()
        .insert(header::RETRY_AFTER, HeaderValue::from_static(RETRY_AFTER_SECS));
    r
}

/// Runs `work` on the blocking pool if a permit is free.
async fn pooled<F>(state: &AppState, work: F) -> Response
where
    F: FnOnce() -> Response + Send + 'static,
{
    let Ok(permit) = state.permits.clone().try_acquire_owned() else {
        return busy();
    };
    let joined = tokio::task::spawn_blocking(move || {
        let r = work();
        drop(permit);
        r
    })
    .await;
    joined.unwrap_or_else(|e| {
        (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": e.to_string() })),
        )
            .into_response()
    })
}

/// Query fields, collecting one error per bad field.
struct Fields {
    map: HashMap<String, String>,
    errors: Vec<FieldError>,
}

impl Fields {
    fn new(pairs: Vec<(String, String)>, allowed: &[&str]) -> Self {
        let mut f = Fields {
            map: HashMap::new(),
            errors: Vec::new(),
        };
        for (k, v) in pairs {
            if !allowed.contains(&k.as_str()) {
                f.err(&k, "unknown field");
            } else if f.map.insert(k.clone(), v).is_some() {
                f.err(&k, "given more than once");
            }
        }
        f
    }

    fn err(&mut self, field: &str, reason: &str) {
        self.errors.push(FieldError {
            field: field.into(),
            reason: reason.into(),
        });
    }

    fn opt<T: FromStr>(&mut self, key: &str) -> Option<T> {
        let v = self.map.get(key)?;
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                let reason = format!("cannot parse {v:?}");
                self.err(key, &reason);
                None
            }
        }
    }

    fn req<T: FromStr>(&mut self, key: &str) -> Option<T> {
        if !self.map.contains_key(key) {
            self.err(key, "required");
            return None;
        }
        self.opt(key)
    }

    fn or<T: FromStr>(&mut self, key: &str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }

    fn side(&mut self, key: &str, default: u32) -> u32 {
        let v = self.or(key, default);
        if !(1..=MAX_TILE).contains(&v) {
            self.err(key, &format!("must lie in 1..={MAX_TILE}"));
        }
        v
    }

    /// The 400 response, if any field was bad.
    fn rejection(self) -> Option<Response> {
        (!self.errors.is_empty()).then(|| bad_request(self.errors))
    }
}

fn window_fields(f: &mut Fields) -> Option<Window> {
    let x0 = f.or("x0", -3.0);
    let y0 = f.or("y0", -3.0);
    let x1 = f.or("x1", 3.0);
    let y1 = f.or("y1", 3.0);
    match Window::new(x0, y0, x1, y1) {
        Ok(w) => Some(w),
        Err(_) => {
            f.err("window", "need finite corners with x1 > x0 and y1 > y0");
            None
        }
    }
}

fn cacheable(mut r: Response, content_type: &'static str) -> Response {
    let h = r.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    h.insert(header::CACHE_CONTROL, HeaderValue::from_static(CACHE_CONTROL));
    h.insert(header::VARY, HeaderValue::from_static("accept"));
    r
}

fn image_encoding(headers: &HeaderMap) -> Encoding {
    let accept = headers.get(header::ACCEPT).and_then(|v| v.to_str().ok()).unwrap_or("");
    if accept.contains(Encoding::Hslc.content_type()) {
        Encoding::Hslc
    } else if accept.contains(Encoding::Ppm.content_type()) {
        Encoding::Ppm
    } else {
        Encoding::Png
    }
}

async fn meta(State(state): State<AppState>) -> Response {
    let body = json!({
        "name": "henonlab",
        "versions": crate::manifest::Versions::current(),
        "workers": state.workers,
        "endpoints": {
            "/meta": [],
            "/tile/dyn": ["a", "b", "saddle", "x0", "y0", "x1", "y1", "w", "h", "depth", "thicken"],
            "/tile/param": ["probe", "region", "a0", "a1", "b0", "b1", "b", "x0", "y0", "x1", "y1", "w", "h", "grid", "depth", "max_period"],
            "/verdict": ["a", "b", "res", "depth", "max_period"],
        },
        "formats": [Encoding::Png.content_type(), Encoding::Hslc.content_type(), Encoding::Ppm.content_type()],
        "defaults": {
            "window": [-3.0, -3.0, 3.0, 3.0],
            "tile": 256,
            "render": RenderConfig::default(),
            "probe_budget": ProbeBudget::default(),
            "verdict": { "res": 256, "depth": 200, "max_period": 6 },
        },
        "limits": { "max_tile": MAX_TILE, "max_depth": MAX_DEPTH },
    });
    cacheable(Json(body).into_response(), "application/json")
}

async fn tile_dyn(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(pairs): Query<Vec<(String, String)>>,
) -> Response {
    let mut f = Fields::new(
        pairs,
        &["a", "b", "saddle", "x0", "y0", "x1", "y1", "w", "h", "depth", "thicken"],
    );
    let a: Option<C64> = f.req("a");
    let b: Option<C64> = f.req("b");
    let saddle = match f.map.get("saddle").map(String::as_str) {
        None | Some("default") => None,
        Some(_) => f.opt::<usize>("saddle"),
    };
    let window = window_fields(&mut f);
    let width = f.side("w", 256);
    let height = f.side("h", 256);
    let depth = f.or("depth", RenderConfig::default().depth);
    let thicken = f.or("thicken", RenderConfig::default().thicken);
    let (Some(a), Some(b), Some(window)) = (a, b, window) else {
        return f.rejection().unwrap_or_else(|| bad_request(Vec::new()));
    };
    if let Some(r) = f.rejection() {
        return r;
    }
    let req = DynRequest {
        a,
        b,
        saddle,
        window,
        width,
        height,
        depth,
        thicken,
    };
    let enc = image_encoding(&headers);
    pooled(&state, move || match dyn_image(&req) {
        Ok(img) => cacheable(encode(&img, enc).into_response(), enc.content_type()),
        Err(e) => error_response(e),
    })
    .await
}

async fn tile_param(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(pairs): Query<Vec<(String, String)>>,
) -> Response {
    let mut f = Fields::new(
        pairs,
        &[
            "probe",
            "region",
            "a0",
            "a1",
            "b0",
            "b1",
            "b",
            "x0",
            "y0",
            "x1",
            "y1",
            "w",
            "h",
            "grid",
            "depth",
            "max_period",
        ],
    );
    let probe = match f.map.get("probe").map(String::as_str) {
        Some("connectivity") => Some(Probe::Connectivity),
        Some("horseshoe") => Some(Probe::Horseshoe),
        Some("escape_of_measure") => Some(Probe::EscapeOfMeasure),
        Some(_) => {
            f.err("probe", "expected connectivity, horseshoe or escape_of_measure");
            None
        }
        None => {
            f.err("probe", "required");
            None
        }
    };
    let region = match f.map.get("region").map(String::as_str) {
        None | Some("ab") => {
            let (a0, a1, b0, b1) = (f.req("a0"), f.req("a1"), f.req("b0"), f.req("b1"));
            match (a0, a1, b0, b1) {
                (Some(a0), Some(a1), Some(b0), Some(b1)) => Some(ParamRegion::AB { a0, a1, b0, b1 }),
                _ => None,
            }
        }
        Some("complex_a") => {
            let b: Option<C64> = f.req("b");
            let w = window_fields(&mut f);
            b.zip(w).map(|(b, window)| ParamRegion::ComplexA { b, window })
        }
        Some(_) => {
            f.err("region", "expected ab or complex_a");
            None
        }
    };
    let defaults = ProbeBudget::default();
    let width = f.side("w", 64);
    let height = f.side("h", 64);
    let budget = ProbeBudget {
        grid: f.or("grid", defaults.grid),
        depth: f.or("depth", defaults.depth),
        max_period: f.or("max_period", defaults.max_period),
        ..defaults
    };
    let (Some(probe), Some(region)) = (probe, region) else {
        return f.rejection().unwrap_or_else(|| bad_request(Vec::new()));
    };
    if let Some(r) = f.rejection() {
        return r;
    }
    let req = ParamRequest {
        region,
        probe,
        width,
        height,
        budget,
    };
    let enc = image_encoding(&headers);
    pooled(&state, move || match param_image(&req) {
        Ok(img) => cacheable(encode(&img, enc).into_response(), enc.content_type()),
        Err(e) => error_response(e),
    })
    .await
}

async fn verdict(State(state): State<AppState>, Query(pairs): Query<Vec<(String, String)>>) -> Response {
    let mut f = Fields::new(pairs, &["a", "b", "res", "depth", "max_period"]);
    let a: Option<C64> = f.req("a");
    let b: Option<C64> = f.req("b");
    let res = f.side("res", 256);
    let depth = f.or("depth", RenderConfig::default().depth);
    let max_period: u32 = f.or("max_period", 6);
    let (Some(a), Some(b)) = (a, b) else {
        return f.rejection().unwrap_or_else(|| bad_request(Vec::new()));
    };
    if let Some(r) = f.rejection() {
        return r;
    }
    pooled(&state, move || {
        let run = || -> Result<serde_json::Value, Error> {
            let params = HenonParams::new(a, b)?;
            let cfg = ConnectivityConfig {
                resolution: res,
                render: RenderConfig {
                    depth,
                    ..RenderConfig::default()
                },
                ..ConnectivityConfig::default()
            };
            let report = connectivity(&params, &cfg)?;
            let lambda = sample_mu(&params, 1..=max_period, &SearchBudget::default(), 0)
                .and_then(|s| estimate_lambda(&params, &s));
            Ok(json!({
                "params": params,
                "verdict": report.verdict,
                "components": report.components,
                "critical": report.critical,
                "critical_points": report.critical_points,
                "lambda": lambda.as_ref().ok(),
                "lambda_error": lambda.as_ref().err().map(Error::to_string),
            }))
        };
        match run() {
            Ok(v) => cacheable(Json(v).into_response(), "application/json"),
            Err(e) => error_response(e),
        }
    })
    .await
}
