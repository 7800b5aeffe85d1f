//! Drive one analysis session through the HTTP API in-process.
//!
//! The same router is what `rankaxis serve` exposes.

use axum::body::Body;
use axum::http::{Method, Request};
use axum::Router;
use http_body_util::BodyExt;
use rankaxis::fixtures::{synthetic_banks, to_csv};
use rankaxis::service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Body) -> (u16, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body)
        .expect("valid request");
    let resp = app.clone().oneshot(req).await.expect("router is infallible");
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

pub fn run_example() -> rankaxis::Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let app = router(AppState::new(ServiceConfig::default()));
        let (dataset, _) = synthetic_banks(30, 4, 2)?;

        let (status, summary) = call(&app, Method::POST, "/sessions", Body::from(to_csv(&dataset))).await;
        println!("POST /sessions -> {status}: {} items", summary["items"]);
        let base = format!("/sessions/{}", summary["id"].as_str().unwrap_or_default());

        let marked: Vec<&Value> =
            summary["ids"].as_array().map(|v| v.iter().take(6).rev().collect()).unwrap_or_default();
        let (status, body) =
            call(&app, Method::POST, &format!("{base}/rerank"), Body::from(json!({ "marked": marked }).to_string()))
                .await;
        println!("POST rerank -> {status}: weights {}", body["weights"]);

        let (status, _) =
            call(&app, Method::POST, &format!("{base}/projection"), Body::from(json!({ "method": "pca" }).to_string()))
                .await;
        println!("POST projection -> {status}");
        let (status, _) =
            call(&app, Method::POST, &format!("{base}/polyline"), Body::from(json!({ "kind": "rating" }).to_string()))
                .await;
        println!("POST polyline -> {status}");
        let (status, axis) = call(&app, Method::POST, &format!("{base}/axis"), Body::empty()).await;
        println!("POST axis -> {status}: {} placements", axis.as_array().map_or(0, Vec::len));

        // New weights make the projection stale until it is recomputed.
        let reversed: Vec<&Value> = marked.iter().rev().copied().collect();
        call(&app, Method::POST, &format!("{base}/rerank"), Body::from(json!({ "marked": reversed }).to_string()))
            .await;
        let (status, err) = call(&app, Method::GET, &format!("{base}/axis"), Body::empty()).await;
        println!("GET axis after rerank -> {status}: {}", err["error"]);
        call(&app, Method::POST, &format!("{base}/projection"), Body::from(json!({ "method": "pca" }).to_string()))
            .await;

        let (status, report) =
            call(&app, Method::GET, &format!("{base}/inconsistencies?budget=3"), Body::empty()).await;
        println!("GET inconsistencies -> {status}: {report}");
        Ok(())
    })
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
