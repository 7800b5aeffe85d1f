//! Stateful HTTP/JSON API over the analysis pipeline.
//!
//! Each session owns one dataset and the artifacts derived from it. Derived
//! artifacts remember the fingerprints of their inputs; after new weights
//! the old projection is stale and requests that depend on it answer
//! `409 Conflict` until a new projection is computed.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex as StdMutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::axis::{
    build_axis, rating_line, self_defined_rating_line, sequence_ranking_line, AxisPlacement, PolylineKind,
    RatingPolyline,
};
use crate::consistency::{enumerate_inconsistencies, Inconsistency};
use crate::data::{attribute_contributions, load_csv, CsvOptions, Dataset, ItemId};
use crate::error::Error;
use crate::geometry::Point;
use crate::pipeline::DEFAULT_BUDGET;
use crate::projection::{project_dataset, CancelToken, Projection, ProjectionConfig};
use crate::rating::{discretize, RatingPartition, DEFAULT_RATINGS};
use crate::schemes::{
    align_order, attribute_diff_coloring, attribute_similarity, compare_schemes, AttributeDiff, RankingScheme,
    SchemeComparison, SchemeInputs, SchemeStore, COMPARATIVE_PROJECTIONS,
};
use crate::weights::{
    derive_constraints, rank_all, train_ranking_svm, MarkedRanking, Ranking, SvmConfig, WeightVector,
};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_rows: usize,
    pub session_ttl: Duration,
    /// When set, each session persists its schemes under `<dir>/<session id>`.
    pub scheme_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { max_rows: 5_000, session_ttl: Duration::from_secs(3600), scheme_dir: None }
    }
}

/// Error body: `{"error": "..."}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn stale(what: &str) -> Self {
        Self::new(StatusCode::CONFLICT, format!("stale: {what}"))
    }

    fn missing(what: &str) -> Self {
        Self::new(StatusCode::CONFLICT, format!("missing prerequisite: {what}"))
    }

    fn bad_request(err: Error) -> Self {
        Self::new(StatusCode::BAD_REQUEST, err.to_string())
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::UnknownItem(_) | Error::UnknownScheme(_) => StatusCode::NOT_FOUND,
            Error::Parse { .. } | Error::EmptyInput(_) | Error::InvalidSchema(_) | Error::InvalidDataset(_) => {
                StatusCode::BAD_REQUEST
            }
            Error::Cancelled => StatusCode::CONFLICT,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Everything one analysis session holds.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub dataset: Arc<Dataset>,
    pub weights: WeightVector,
    pub ranking: Ranking,
    pub n_ratings: usize,
    pub partition: Option<RatingPartition>,
    pub projection: Option<Projection>,
    pub polyline: Option<RatingPolyline>,
    pub axis: Option<Vec<AxisPlacement>>,
    pub schemes: SchemeStore,
}

impl Session {
    /// Starts from equal weights on every attribute.
    pub fn new(id: String, dataset: Dataset, schemes: SchemeStore) -> crate::Result<Self> {
        let weights = WeightVector::fixed(vec![1.0; dataset.attribute_count()]);
        let ranking = rank_all(&weights, &dataset)?;
        let partition = discretize(&ranking, DEFAULT_RATINGS).ok();
        Ok(Self {
            id,
            dataset: Arc::new(dataset),
            weights,
            ranking,
            n_ratings: DEFAULT_RATINGS,
            partition,
            projection: None,
            polyline: None,
            axis: None,
            schemes,
        })
    }

    fn clear_geometry(&mut self) {
        self.polyline = None;
        self.axis = None;
    }

    /// The current projection, provided it was computed from the current
    /// weights.
    pub fn fresh_projection(&self) -> ApiResult<&Projection> {
        let p = self.projection.as_ref().ok_or_else(|| ApiError::missing("projection"))?;
        if p.weights_fingerprint != self.weights.fingerprint() {
            return Err(ApiError::stale("projection was computed from previous weights"));
        }
        Ok(p)
    }

    fn partition(&self) -> ApiResult<&RatingPartition> {
        self.partition.as_ref().ok_or_else(|| ApiError::missing("rating partition"))
    }
}

struct SessionSlot {
    state: Mutex<Session>,
    pending: StdMutex<Option<CancelToken>>,
    last_access: StdMutex<Instant>,
}

struct Registry {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
    next_id: AtomicU64,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Registry>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self { inner: Arc::new(Registry { config, sessions: RwLock::new(HashMap::new()), next_id: AtomicU64::new(1) }) }
    }

    fn sweep(&self) {
        let ttl = self.inner.config.session_ttl;
        let mut sessions = self.inner.sessions.write().unwrap();
        sessions.retain(|_, slot| slot.last_access.lock().unwrap().elapsed() < ttl);
    }

    fn slot(&self, id: &str) -> ApiResult<Arc<SessionSlot>> {
        self.sweep();
        let slot = self
            .inner
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session: {id}")))?;
        *slot.last_access.lock().unwrap() = Instant::now();
        Ok(slot)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_summary).delete(delete_session))
        .route("/sessions/{id}/rerank", post(rerank))
        .route("/sessions/{id}/ratings", post(set_ratings))
        .route("/sessions/{id}/projection", post(run_projection).get(current_projection).delete(cancel_projection))
        .route("/sessions/{id}/polyline", post(make_polyline).get(current_polyline))
        .route("/sessions/{id}/axis", post(make_axis).get(current_axis))
        .route("/sessions/{id}/inconsistencies", get(inconsistencies))
        .route("/sessions/{id}/schemes", post(save_scheme).get(list_schemes))
        .route("/sessions/{id}/schemes/compare", get(compare))
        .route("/sessions/{id}/schemes/projections", get(comparative_projections))
        .route("/sessions/{id}/align", get(align))
        .route("/sessions/{id}/attribute-diff", get(attribute_diff))
        .route("/sessions/{id}/similarity", get(similarity))
        .route("/sessions/{id}/contributions", get(contributions))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateParams {
    pub delimiter: Option<char>,
    pub header: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenamedItem {
    pub label: String,
    pub id: ItemId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub items: usize,
    pub attributes: Vec<String>,
    pub constant_attributes: Vec<String>,
    pub ids: Vec<ItemId>,
    pub renamed: Vec<RenamedItem>,
    pub n_ratings: usize,
    pub has_projection: bool,
    pub projection_stale: bool,
    pub schemes: usize,
}

fn summary(s: &Session) -> SessionSummary {
    let names: Vec<String> = s.dataset.schema().names().map(str::to_owned).collect();
    SessionSummary {
        id: s.id.clone(),
        items: s.dataset.len(),
        constant_attributes: s.dataset.constant_columns().iter().map(|&j| names[j].clone()).collect(),
        attributes: names,
        ids: s.dataset.ids().cloned().collect(),
        renamed: s
            .dataset
            .renamed_items()
            .iter()
            .map(|(label, id)| RenamedItem { label: label.clone(), id: id.clone() })
            .collect(),
        n_ratings: s.n_ratings,
        has_projection: s.projection.is_some(),
        projection_stale: s.projection.as_ref().is_some_and(|p| p.weights_fingerprint != s.weights.fingerprint()),
        schemes: s.schemes.list().len(),
    }
}

async fn create_session(
    State(state): State<AppState>,
    Query(params): Query<CreateParams>,
    body: String,
) -> ApiResult<(StatusCode, Json<SessionSummary>)> {
    state.sweep();
    let delimiter = params.delimiter.unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "delimiter must be ASCII"));
    }
    let options = CsvOptions { delimiter: delimiter as u8, has_header: params.header.unwrap_or(true) };
    let dataset = load_csv(body.as_bytes(), options).map_err(ApiError::bad_request)?;
    if dataset.len() > state.inner.config.max_rows {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("dataset has {} rows, limit is {}", dataset.len(), state.inner.config.max_rows),
        ));
    }
    let id = format!("s{}", state.inner.next_id.fetch_add(1, Ordering::SeqCst));
    let schemes = match &state.inner.config.scheme_dir {
        Some(dir) => SchemeStore::open(dir.join(&id))?,
        None => SchemeStore::in_memory(),
    };
    let session = Session::new(id.clone(), dataset, schemes)?;
    let body = summary(&session);
    state.inner.sessions.write().unwrap().insert(
        id,
        Arc::new(SessionSlot {
            state: Mutex::new(session),
            pending: StdMutex::new(None),
            last_access: StdMutex::new(Instant::now()),
        }),
    );
    Ok((StatusCode::CREATED, Json(body)))
}

async fn session_summary(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    Ok(Json(summary(&s)))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let removed = state.inner.sessions.write().unwrap().remove(&id);
    match removed {
        Some(slot) => {
            if let Some(token) = slot.pending.lock().unwrap().as_ref() {
                token.cancel();
            }
            Ok(StatusCode::NO_CONTENT)
        }
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown session: {id}"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RerankRequest {
    pub marked: Vec<ItemId>,
    #[serde(default)]
    pub regularization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankResponse {
    pub weights: serde_json::Map<String, serde_json::Value>,
    pub weight_vector: WeightVector,
    pub ranking: Ranking,
    pub partition: RatingPartition,
}

/// derive constraints → train → rank → rate, committed only if every step
/// succeeds.
async fn rerank(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<RerankRequest>,
) -> ApiResult<Json<RerankResponse>> {
    let slot = state.slot(&id)?;
    let mut s = slot.state.lock().await;
    let marked = MarkedRanking::new(req.marked, &s.dataset)?;
    let constraints = derive_constraints(&marked, &s.dataset)?;
    let svm = SvmConfig {
        regularization: req.regularization.unwrap_or(SvmConfig::default().regularization),
        ..SvmConfig::default()
    };
    let weights = train_ranking_svm(&constraints, &svm)?;
    let ranking = rank_all(&weights, &s.dataset)?;
    let partition = discretize(&ranking, s.n_ratings)?;

    s.weights = weights;
    s.ranking = ranking;
    s.partition = Some(partition);
    s.clear_geometry();
    Ok(Json(RerankResponse {
        weights: s.weights.to_named(s.dataset.schema()),
        weight_vector: s.weights.clone(),
        ranking: s.ranking.clone(),
        partition: s.partition.clone().unwrap(),
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingsRequest {
    pub n: usize,
}

async fn set_ratings(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<RatingsRequest>,
) -> ApiResult<Json<RatingPartition>> {
    let slot = state.slot(&id)?;
    let mut s = slot.state.lock().await;
    let partition = discretize(&s.ranking, req.n)?;
    s.n_ratings = req.n;
    s.partition = Some(partition.clone());
    s.clear_geometry();
    Ok(Json(partition))
}

async fn run_projection(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(config): Json<ProjectionConfig>,
) -> ApiResult<Json<Projection>> {
    let slot = state.slot(&id)?;
    let mut s = slot.state.lock().await;
    config.validate(s.dataset.len())?;
    let token = CancelToken::new();
    *slot.pending.lock().unwrap() = Some(token.clone());
    let (dataset, weights) = (s.dataset.clone(), s.weights.clone());
    let result = tokio::task::spawn_blocking(move || project_dataset(&dataset, &weights, &config, Some(&token)))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()));
    *slot.pending.lock().unwrap() = None;
    let projection = result??;
    s.projection = Some(projection.clone());
    s.clear_geometry();
    Ok(Json(projection))
}

async fn current_projection(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Projection>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    Ok(Json(s.fresh_projection()?.clone()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CancelResponse {
    pub cancelled: bool,
}

/// Cancels an in-flight projection without waiting for the session lock.
async fn cancel_projection(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<(StatusCode, Json<CancelResponse>)> {
    let slot = state.slot(&id)?;
    let pending = slot.pending.lock().unwrap();
    let cancelled = pending.as_ref().map(CancelToken::cancel).is_some();
    Ok((StatusCode::ACCEPTED, Json(CancelResponse { cancelled })))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolylineRequest {
    pub kind: PolylineKind,
    #[serde(default)]
    pub regions: Vec<Vec<Point>>,
}

async fn make_polyline(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<PolylineRequest>,
) -> ApiResult<Json<RatingPolyline>> {
    let slot = state.slot(&id)?;
    let mut s = slot.state.lock().await;
    let projection = s.fresh_projection()?;
    let polyline = match req.kind {
        PolylineKind::Sequence => sequence_ranking_line(&s.ranking, projection)?,
        PolylineKind::Rating => rating_line(s.partition()?, projection)?,
        PolylineKind::SelfDefined => self_defined_rating_line(&req.regions, projection)?,
    };
    s.polyline = Some(polyline.clone());
    s.axis = None;
    Ok(Json(polyline))
}

async fn make_axis(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Vec<AxisPlacement>>> {
    let slot = state.slot(&id)?;
    let mut s = slot.state.lock().await;
    let projection = s.fresh_projection()?;
    let polyline = s.polyline.as_ref().ok_or_else(|| ApiError::missing("polyline"))?;
    if polyline.source.projection_fingerprint != projection.fingerprint() {
        return Err(ApiError::stale("polyline was built on another projection"));
    }
    let axis = build_axis(s.partition()?, polyline, projection)?;
    s.axis = Some(axis.clone());
    Ok(Json(axis))
}

async fn current_polyline(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<RatingPolyline>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    s.fresh_projection()?;
    Ok(Json(s.polyline.clone().ok_or_else(|| ApiError::missing("polyline"))?))
}

async fn current_axis(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Vec<AxisPlacement>>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    s.fresh_projection()?;
    Ok(Json(s.axis.clone().ok_or_else(|| ApiError::missing("axis"))?))
}

#[derive(Debug, Default, Deserialize)]
pub struct InconsistencyParams {
    pub budget: Option<usize>,
    pub seed: Option<u64>,
}

async fn inconsistencies(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<InconsistencyParams>,
) -> ApiResult<Json<Vec<Inconsistency>>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    let projection = s.fresh_projection()?;
    Ok(Json(enumerate_inconsistencies(
        &s.dataset,
        &s.ranking,
        projection,
        params.budget.unwrap_or(DEFAULT_BUDGET),
        params.seed.unwrap_or(0),
    )?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaveSchemeRequest {
    pub name: String,
}

async fn save_scheme(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<SaveSchemeRequest>,
) -> ApiResult<(StatusCode, Json<RankingScheme>)> {
    let slot = state.slot(&id)?;
    let mut guard = slot.state.lock().await;
    let s = &mut *guard;
    let config = s.projection.as_ref().map(|p| p.config).unwrap_or_default();
    let scheme = s.schemes.save(
        &req.name,
        SchemeInputs {
            dataset: &s.dataset,
            weights: Some(&s.weights),
            ranking: Some(&s.ranking),
            partition: s.partition.as_ref(),
            projection_config: config,
        },
    )?;
    Ok((StatusCode::CREATED, Json((*scheme).clone())))
}

async fn list_schemes(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Vec<RankingScheme>>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    Ok(Json(s.schemes.list().iter().map(|s| (**s).clone()).collect()))
}

#[derive(Debug, Deserialize)]
pub struct CompareParams {
    pub a: String,
    pub b: String,
}

async fn compare(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<CompareParams>,
) -> ApiResult<Json<SchemeComparison>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    let (a, b) = (s.schemes.get(&params.a)?, s.schemes.get(&params.b)?);
    Ok(Json(compare_schemes(&a, &b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeProjection {
    pub scheme: String,
    pub projection: Projection,
}

/// Projections of the most recent saved schemes, each under its own weights
/// and projection settings.
async fn comparative_projections(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<SchemeProjection>>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    let dataset = s.dataset.clone();
    let schemes: Vec<Arc<RankingScheme>> = s.schemes.latest(COMPARATIVE_PROJECTIONS).to_vec();
    let out = tokio::task::spawn_blocking(move || {
        schemes
            .iter()
            .map(|scheme| {
                Ok(SchemeProjection {
                    scheme: scheme.name.clone(),
                    projection: project_dataset(&dataset, &scheme.weights, &scheme.projection_config, None)?,
                })
            })
            .collect::<crate::Result<Vec<_>>>()
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
pub struct ItemParams {
    pub item: ItemId,
}

async fn align(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<ItemParams>,
) -> ApiResult<Json<Vec<ItemId>>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    Ok(Json(align_order(&s.dataset, &params.item)?))
}

async fn attribute_diff(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<ItemParams>,
) -> ApiResult<Json<Vec<AttributeDiff>>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    Ok(Json(attribute_diff_coloring(&s.dataset, &params.item)?))
}

#[derive(Debug, Deserialize)]
pub struct PairParams {
    pub a: ItemId,
    pub b: ItemId,
}

async fn similarity(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<PairParams>,
) -> ApiResult<Json<f64>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    Ok(Json(attribute_similarity(&s.dataset, &params.a, &params.b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionRow {
    pub id: ItemId,
    pub score: f64,
    pub rank: u32,
    pub contributions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub attributes: Vec<String>,
    pub rows: Vec<ContributionRow>,
}

/// Per-attribute contributions in rank order, for the table view.
async fn contributions(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Contributions>> {
    let slot = state.slot(&id)?;
    let s = slot.state.lock().await;
    let matrix = attribute_contributions(&s.dataset, &s.weights.values)?;
    let rows = s
        .ranking
        .entries()
        .iter()
        .map(|e| {
            Ok(ContributionRow {
                id: e.id.clone(),
                score: e.score,
                rank: e.rank,
                contributions: matrix[s.dataset.index_of(&e.id)?].clone(),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(Json(Contributions { attributes: s.dataset.schema().names().map(str::to_owned).collect(), rows }))
}
