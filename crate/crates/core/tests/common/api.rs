//! HTTP helpers and the endpoint-by-endpoint equivalence suite.

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde::Serialize;
use serde_json::{json, Value};
use tower::ServiceExt;

use rankaxis::axis::{build_axis, rating_line, self_defined_rating_line};
use rankaxis::consistency::enumerate_inconsistencies;
use rankaxis::data::{attribute_contributions, load_csv, CsvOptions, Dataset, ItemId};
use rankaxis::fixtures::{synthetic_banks, to_csv};
use rankaxis::geometry::Point;
use rankaxis::projection::{project_dataset, ProjectionConfig};
use rankaxis::rating::discretize;
use rankaxis::schemes::{
    align_order, attribute_diff_coloring, attribute_similarity, compare_schemes, RankingScheme, SchemeInputs,
};
use rankaxis::service::{router, AppState, ServiceConfig};
use rankaxis::weights::{derive_constraints, rank_all, train_ranking_svm, MarkedRanking, SvmConfig, WeightVector};

pub fn app() -> Router {
    router(AppState::new(ServiceConfig::default()))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => builder.header("content-type", "application/json").body(Body::from(v.to_string())).unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    send(app, req).await
}

pub async fn post_csv(app: &Router, uri: &str, csv: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(Method::POST)
        .uri(uri)
        .header("content-type", "text/csv")
        .body(Body::from(csv.to_owned()))
        .unwrap();
    send(app, req).await
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

/// Creates a session from CSV text and returns its id.
pub async fn create_session(app: &Router, csv: &str) -> String {
    let (status, body) = post_csv(app, "/sessions", csv).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_owned()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap()
}

fn check(name: &str, status: StatusCode, got: &Value, want: Value, out: &mut Vec<(String, Result<(), String>)>) {
    let result = if !status.is_success() {
        Err(format!("status {status}: {got}"))
    } else if *got != want {
        Err(format!("response differs from module output\n got: {got}\nwant: {want}"))
    } else {
        Ok(())
    };
    out.push((name.to_owned(), result));
}

/// Drives every endpoint on a fixture session and compares each response
/// with the module call on the same state. One entry per endpoint.
pub async fn equivalence_suite() -> Vec<(String, Result<(), String>)> {
    let mut out = Vec::new();
    let app = app();
    let (fixture, _) = synthetic_banks(40, 5, 7).unwrap();
    let csv = to_csv(&fixture);
    let ds: Dataset = load_csv(csv.as_bytes(), CsvOptions::default()).unwrap();

    let (status, summary) = post_csv(&app, "/sessions", &csv).await;
    let sid = summary["id"].as_str().unwrap_or_default().to_owned();
    let want_summary = json!({
        "id": sid,
        "items": ds.len(),
        "attributes": ds.schema().names().collect::<Vec<_>>(),
        "constant_attributes": Vec::<String>::new(),
        "ids": ds.ids().collect::<Vec<_>>(),
        "renamed": Vec::<Value>::new(),
        "n_ratings": 5,
        "has_projection": false,
        "projection_stale": false,
        "schemes": 0,
    });
    check("POST /sessions", status, &summary, want_summary.clone(), &mut out);
    let (status, got) = call(&app, Method::GET, &format!("/sessions/{sid}"), None).await;
    check("GET /sessions/{id}", status, &got, want_summary, &mut out);
    let base = format!("/sessions/{sid}");

    // Rerank on six items taken from the middle of the initial order.
    let initial = rank_all(&WeightVector::fixed(vec![1.0; ds.attribute_count()]), &ds).unwrap();
    let mut marked: Vec<ItemId> = initial.ids().skip(10).take(6).cloned().collect();
    marked.swap(0, 5);
    let (status, got) = call(&app, Method::POST, &format!("{base}/rerank"), Some(json!({ "marked": marked }))).await;
    let m = MarkedRanking::new(marked.clone(), &ds).unwrap();
    let weights = train_ranking_svm(&derive_constraints(&m, &ds).unwrap(), &SvmConfig::default()).unwrap();
    let ranking = rank_all(&weights, &ds).unwrap();
    let partition = discretize(&ranking, 5).unwrap();
    check(
        "POST /sessions/{id}/rerank",
        status,
        &got,
        json!({
            "weights": weights.to_named(ds.schema()),
            "weight_vector": weights,
            "ranking": ranking,
            "partition": partition,
        }),
        &mut out,
    );

    let (status, got) = call(&app, Method::POST, &format!("{base}/ratings"), Some(json!({ "n": 4 }))).await;
    let partition = discretize(&ranking, 4).unwrap();
    check("POST /sessions/{id}/ratings", status, &got, to_value(&partition), &mut out);

    let config = ProjectionConfig::pca();
    let (status, got) = call(&app, Method::POST, &format!("{base}/projection"), Some(to_value(&config))).await;
    let projection = project_dataset(&ds, &weights, &config, None).unwrap();
    check("POST /sessions/{id}/projection", status, &got, to_value(&projection), &mut out);
    let (status, got) = call(&app, Method::GET, &format!("{base}/projection"), None).await;
    check("GET /sessions/{id}/projection", status, &got, to_value(&projection), &mut out);

    let (status, got) = call(&app, Method::POST, &format!("{base}/polyline"), Some(json!({ "kind": "rating" }))).await;
    let polyline = rating_line(&partition, &projection).unwrap();
    check("POST /sessions/{id}/polyline (rating)", status, &got, to_value(&polyline), &mut out);
    let (status, got) = call(&app, Method::GET, &format!("{base}/polyline"), None).await;
    check("GET /sessions/{id}/polyline", status, &got, to_value(&polyline), &mut out);

    let (status, got) = call(&app, Method::POST, &format!("{base}/axis"), None).await;
    let axis = build_axis(&partition, &polyline, &projection).unwrap();
    check("POST /sessions/{id}/axis", status, &got, to_value(&axis), &mut out);
    let (status, got) = call(&app, Method::GET, &format!("{base}/axis"), None).await;
    check("GET /sessions/{id}/axis", status, &got, to_value(&axis), &mut out);

    // Two lasso boxes around the left and right halves of the layout.
    let points = projection.points();
    let (min_x, max_x) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (min_y, max_y) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let mid = (min_x + max_x) / 2.0;
    let boxed = |x0: f64, x1: f64| {
        vec![Point::new(x0, min_y), Point::new(x1, min_y), Point::new(x1, max_y), Point::new(x0, max_y)]
    };
    let regions = vec![boxed(mid, max_x), boxed(min_x, mid)];
    let (status, got) = call(
        &app,
        Method::POST,
        &format!("{base}/polyline"),
        Some(json!({ "kind": "self_defined", "regions": regions })),
    )
    .await;
    let lasso = self_defined_rating_line(&regions, &projection).unwrap();
    check("POST /sessions/{id}/polyline (self_defined)", status, &got, to_value(&lasso), &mut out);

    let (status, got) = call(&app, Method::GET, &format!("{base}/inconsistencies?budget=20&seed=3"), None).await;
    let report = enumerate_inconsistencies(&ds, &ranking, &projection, 20, 3).unwrap();
    check("GET /sessions/{id}/inconsistencies", status, &got, to_value(&report), &mut out);

    let (status, saved_a) =
        call(&app, Method::POST, &format!("{base}/schemes"), Some(json!({ "name": "first" }))).await;
    let scheme_a = snapshot(&saved_a, "first", &ds, &weights, &ranking, &partition, config);
    check("POST /sessions/{id}/schemes", status, &saved_a, to_value(&scheme_a), &mut out);

    let mut marked_b = marked.clone();
    marked_b.reverse();
    call(&app, Method::POST, &format!("{base}/rerank"), Some(json!({ "marked": marked_b }))).await;
    let m = MarkedRanking::new(marked_b, &ds).unwrap();
    let weights_b = train_ranking_svm(&derive_constraints(&m, &ds).unwrap(), &SvmConfig::default()).unwrap();
    let ranking_b = rank_all(&weights_b, &ds).unwrap();
    let partition_b = discretize(&ranking_b, 4).unwrap();
    let (_, saved_b) = call(&app, Method::POST, &format!("{base}/schemes"), Some(json!({ "name": "first" }))).await;
    let scheme_b = snapshot(&saved_b, "first-2", &ds, &weights_b, &ranking_b, &partition_b, config);

    let (status, got) = call(&app, Method::GET, &format!("{base}/schemes"), None).await;
    check("GET /sessions/{id}/schemes", status, &got, json!([scheme_a, scheme_b]), &mut out);

    let (status, got) = call(&app, Method::GET, &format!("{base}/schemes/compare?a=first&b=first-2"), None).await;
    let cmp = compare_schemes(&scheme_a, &scheme_b).unwrap();
    check("GET /sessions/{id}/schemes/compare", status, &got, to_value(&cmp), &mut out);

    let (status, got) = call(&app, Method::GET, &format!("{base}/schemes/projections"), None).await;
    let want: Vec<Value> = [&scheme_a, &scheme_b]
        .iter()
        .map(|s| {
            json!({
                "scheme": s.name,
                "projection": project_dataset(&ds, &s.weights, &s.projection_config, None).unwrap(),
            })
        })
        .collect();
    check("GET /sessions/{id}/schemes/projections", status, &got, json!(want), &mut out);

    let item = ds.items()[3].id.clone();
    let other = ds.items()[17].id.clone();
    let (status, got) = call(&app, Method::GET, &format!("{base}/align?item={item}"), None).await;
    check("GET /sessions/{id}/align", status, &got, to_value(&align_order(&ds, &item).unwrap()), &mut out);
    let (status, got) = call(&app, Method::GET, &format!("{base}/attribute-diff?item={item}"), None).await;
    check(
        "GET /sessions/{id}/attribute-diff",
        status,
        &got,
        to_value(&attribute_diff_coloring(&ds, &item).unwrap()),
        &mut out,
    );
    let (status, got) = call(&app, Method::GET, &format!("{base}/similarity?a={item}&b={other}"), None).await;
    check(
        "GET /sessions/{id}/similarity",
        status,
        &got,
        to_value(&attribute_similarity(&ds, &item, &other).unwrap()),
        &mut out,
    );

    let (status, got) = call(&app, Method::GET, &format!("{base}/contributions"), None).await;
    let matrix = attribute_contributions(&ds, &weights_b.values).unwrap();
    let rows: Vec<Value> = ranking_b
        .entries()
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "score": e.score,
                "rank": e.rank,
                "contributions": matrix[ds.index_of(&e.id).unwrap()],
            })
        })
        .collect();
    check(
        "GET /sessions/{id}/contributions",
        status,
        &got,
        json!({ "attributes": ds.schema().names().collect::<Vec<_>>(), "rows": rows }),
        &mut out,
    );

    out.push(("planted inconsistency over HTTP".into(), planted_over_http(&app).await));

    let (status, _) = call(&app, Method::DELETE, &base, None).await;
    let (after, _) = call(&app, Method::GET, &base, None).await;
    out.push((
        "DELETE /sessions/{id}".into(),
        if status == StatusCode::NO_CONTENT && after == StatusCode::NOT_FOUND {
            Ok(())
        } else {
            Err(format!("delete gave {status}, later lookup gave {after}"))
        },
    ));
    out
}

/// Rebuilds a saved scheme from the module side, reusing the server's
/// timestamp.
fn snapshot(
    saved: &Value,
    name: &str,
    ds: &Dataset,
    weights: &WeightVector,
    ranking: &rankaxis::weights::Ranking,
    partition: &rankaxis::rating::RatingPartition,
    config: ProjectionConfig,
) -> RankingScheme {
    let created_at = serde_json::from_value(saved["created_at"].clone()).unwrap_or_default();
    RankingScheme::snapshot(
        name,
        SchemeInputs {
            dataset: ds,
            weights: Some(weights),
            ranking: Some(ranking),
            partition: Some(partition),
            projection_config: config,
        },
        created_at,
    )
    .unwrap()
}

async fn planted_over_http(app: &Router) -> Result<(), String> {
    let sid = create_session(app, super::PLANTED_CSV).await;
    let base = format!("/sessions/{sid}");
    let config = ProjectionConfig::pca();
    call(app, Method::POST, &format!("{base}/projection"), Some(to_value(&config))).await;
    let (status, got) = call(app, Method::GET, &format!("{base}/inconsistencies"), None).await;
    let ds = super::planted_dataset();
    let weights = WeightVector::fixed(vec![1.0; 2]);
    let ranking = rank_all(&weights, &ds).unwrap();
    let projection = project_dataset(&ds, &weights, &config, None).unwrap();
    let want = enumerate_inconsistencies(&ds, &ranking, &projection, 100, 0).unwrap();
    if status != StatusCode::OK {
        return Err(format!("status {status}: {got}"));
    }
    if got != to_value(&want) {
        return Err(format!("got {got}, want {}", to_value(&want)));
    }
    let ids: Vec<&str> = ["i", "j", "k"].iter().map(|f| got[0][f].as_str().unwrap_or("")).collect();
    if want.len() != 1 || ids != ["A", "B", "C"] {
        return Err(format!("expected exactly (A, B; C), got {got}"));
    }
    Ok(())
}
