use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use henonlab::slices::Window;
use henonlab::C64;
use henonlab_cli::serve::{router, AppState};
use henonlab_cli::tiles::{dyn_image, encode, DynRequest, Encoding};
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn get(state: &AppState, uri: &str, accept: Option<&str>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let mut req = Request::get(uri);
    if let Some(a) = accept {
        req = req.header(header::ACCEPT, a);
    }
    let resp = router(state.clone())
        .oneshot(req.body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

fn json(body: &[u8]) -> serde_json::Value {
    serde_json::from_slice(body).unwrap()
}

#[tokio::test]
async fn meta_lists_endpoints() {
    let s = AppState::new(2);
    let (status, _, body) = get(&s, "/meta", None).await;
    assert_eq!(status, StatusCode::OK);
    let m = json(&body);
    assert_eq!(m["workers"], 2);
    assert!(m["endpoints"]["/tile/dyn"].as_array().unwrap().len() > 5);
}

#[tokio::test]
async fn zero_b_names_the_field() {
    let s = AppState::new(2);
    for uri in ["/verdict?a=6&b=0", "/tile/dyn?a=6&b=0&w=8&h=8"] {
        let (status, _, body) = get(&s, uri, None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(json(&body)["errors"][0]["field"], "b", "{uri}");
    }
}

#[tokio::test]
async fn malformed_fields_are_all_reported() {
    let s = AppState::new(2);
    let (status, _, body) = get(&s, "/tile/dyn?a=x&b=0.3&w=0&color=red", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let fields: Vec<String> = json(&body)["errors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["field"].as_str().unwrap().to_owned())
        .collect();
    for f in ["a", "w", "color"] {
        assert!(fields.iter().any(|g| g == f), "{f} missing from {fields:?}");
    }
}

#[tokio::test]
async fn saturated_pool_answers_503() {
    let s = AppState::new(1);
    let held = s.permits().acquire_owned().await.unwrap();
    let (status, headers, _) = get(&s, "/tile/dyn?a=6&b=0.3&w=8&h=8", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(headers.contains_key(header::RETRY_AFTER));
    drop(held);
    let (status, _, _) = get(&s, "/tile/dyn?a=6&b=0.3&w=8&h=8", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn dyn_tile_matches_the_cli_render() {
    let s = AppState::new(2);
    let uri = "/tile/dyn?a=6&b=0.3&x0=-3&y0=-3&x1=3&y1=3&w=512&h=512&depth=200";
    let (status, headers, body) = get(&s, uri, Some("application/x-hslc")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::CONTENT_TYPE], "application/x-hslc");

    let d = tempfile::tempdir().unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_henonlab"))
        .args([
            "render-slice",
            "--a",
            "6",
            "--b",
            "0.3",
            "--res",
            "512",
            "--depth",
            "200",
            "--out",
            "s.hslc",
        ])
        .current_dir(d.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(body, std::fs::read(d.path().join("s.hslc")).unwrap());

    let (_, headers, png) = get(&s, uri, None).await;
    assert_eq!(headers[header::CONTENT_TYPE], "image/png");
    let img = henonlab::slices::read_hslc(&body).unwrap();
    assert_eq!(png, henonlab_cli::tiles::write_png(&img));
}

#[tokio::test]
async fn identical_queries_give_identical_bytes() {
    let s = AppState::new(4);
    let uri = "/tile/dyn?a=0.1&b=0.1&x0=-1&y0=-1&x1=1&y1=1&w=48&h=32&depth=100";
    let (_, h1, first) = get(&s, uri, None).await;
    let (_, _, second) = get(&s, uri, None).await;
    assert_eq!(first, second);
    assert!(h1[header::CACHE_CONTROL].to_str().unwrap().contains("max-age"));
    let req = DynRequest {
        a: C64::new(0.1, 0.0),
        b: C64::new(0.1, 0.0),
        saddle: None,
        window: Window::new(-1.0, -1.0, 1.0, 1.0).unwrap(),
        width: 48,
        height: 32,
        depth: 100,
        thicken: 1.0,
    };
    assert_eq!(first, encode(&dyn_image(&req).unwrap(), Encoding::Png));
}

#[tokio::test]
async fn param_tile_serves_horseshoe_probe() {
    let s = AppState::new(2);
    let uri = "/tile/param?probe=horseshoe&region=ab&a0=1&a1=12&b0=0.1&b1=0.3&w=6&h=2";
    let (status, _, body) = get(&s, uri, Some("application/x-hslc")).await;
    assert_eq!(status, StatusCode::OK);
    let img = henonlab::slices::read_hslc(&body).unwrap();
    assert_eq!((img.width, img.height), (6, 2));
    // the rightmost column is deep in the horseshoe locus
    assert_eq!(img.status[5], 1);
    assert_eq!(img.status[0], 0);

    let (status, _, body) = get(&s, "/tile/param?probe=magic&a0=1&a1=2&b0=0.1&b1=0.2", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["errors"][0]["field"], "probe");
}

#[tokio::test]
async fn verdict_at_horseshoe_parameters() {
    let s = AppState::new(2);
    let (status, _, body) = get(&s, "/verdict?a=6&b=0.3", None).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["verdict"], "unstably_disconnected");
    let plus = v["lambda"]["plus"]["value"].as_f64().unwrap();
    assert!(plus > std::f64::consts::LN_2);
}
