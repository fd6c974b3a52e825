//! HTTP interface over a loaded artifact.
//!
//! Every read endpoint is a pure function of the artifact and the request.
//! The tag store is the only mutable state; writers take an exclusive lock
//! and persist the sidecar file before releasing it.

use std::collections::HashMap;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Engine;
use crate::ingest::{Detection, GroundTruthObject, ImageInfo};
use crate::matcher::{AgreementCluster, ClusterId, ClusterStatus, EvalParams};
use crate::metrics::{metrics_report, MetricsReport};
use crate::query::{query, sidecar_path, IntersectionBar, QuerySpec, StatusFilter, TagDocument, TagStore};

pub const LISTEN_ENV: &str = "AGREESET_LISTEN";
pub const IMAGE_ROOT_ENV: &str = "AGREESET_IMAGE_ROOT";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub artifact_path: PathBuf,
    pub listen_address: String,
    pub static_image_root: PathBuf,
    pub defaults: EvalParams,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Tags(#[from] crate::query::TagError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(#[source] std::io::Error),
}

/// A rejected request, rendered as `{"error": code, "message": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: &'static str,
    pub message: String,
}

impl ApiError {
    fn bad_request(error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: 400,
            error,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: 404,
            error: "not_found",
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: 500,
            error: "internal",
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Evaluation criteria from query-string style pairs; absent keys take the
/// defaults, present but invalid ones are rejected.
pub fn parse_params(raw: &HashMap<String, String>, defaults: EvalParams) -> ApiResult<EvalParams> {
    let field = |key: &str, fallback: f64| -> ApiResult<f64> {
        match raw.get(key) {
            None => Ok(fallback),
            Some(s) => s.trim().parse::<f64>().map_err(|_| {
                ApiError::bad_request("invalid_parameter", format!("{key}: {s:?} is not a number"))
            }),
        }
    };
    let p = EvalParams {
        eval_iou: field("eval_iou", defaults.eval_iou)?,
        conf_min: field("conf_min", defaults.conf_min)?,
        conf_max: field("conf_max", defaults.conf_max)?,
    };
    p.validate()
        .map_err(|e| ApiError::bad_request("parameter_out_of_range", e.to_string()))?;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub images: usize,
    pub detections: usize,
    pub ground_truth: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaResponse {
    pub models: Vec<String>,
    pub object_class: String,
    pub set_iou: f64,
    pub format_version: u32,
    pub tool_version: String,
    pub counts: Counts,
    pub defaults: EvalParams,
}

pub fn meta(engine: &Engine, defaults: EvalParams) -> MetaResponse {
    let a = engine.artifact();
    MetaResponse {
        models: a.dataset.models.clone(),
        object_class: a.dataset.object_class.clone(),
        set_iou: a.set_iou,
        format_version: a.format_version,
        tool_version: a.build.tool_version.clone(),
        counts: Counts {
            images: a.dataset.images.len(),
            detections: a.dataset.detections.len(),
            ground_truth: a.dataset.ground_truth.len(),
            edges: a.edges.len(),
        },
        defaults,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionsResponse {
    pub params: EvalParams,
    pub total_clusters: usize,
    pub bars: Vec<IntersectionBar>,
}

pub fn intersections(engine: &Engine, p: &EvalParams) -> IntersectionsResponse {
    let evaluation = engine.evaluate(p);
    IntersectionsResponse {
        params: *p,
        total_clusters: evaluation.clusters.len(),
        bars: evaluation.bars(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterDetail {
    pub cluster: AgreementCluster,
    pub status: ClusterStatus,
    pub members: Vec<Detection>,
    pub matched_gt: Option<GroundTruthObject>,
}

fn detail(engine: &Engine, cluster: &AgreementCluster, status: &ClusterStatus) -> ClusterDetail {
    ClusterDetail {
        cluster: cluster.clone(),
        status: status.clone(),
        members: cluster
            .members
            .iter()
            .filter_map(|id| engine.detection(*id).cloned())
            .collect(),
        matched_gt: status.matched_gt.and_then(|g| {
            engine
                .dataset()
                .ground_truth
                .iter()
                .find(|o| o.gt_id == g)
                .cloned()
        }),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default)]
    pub neutral: Vec<String>,
    #[serde(default)]
    pub status: Option<String>,
    pub eval_iou: Option<f64>,
    pub conf_min: Option<f64>,
    pub conf_max: Option<f64>,
}

impl QueryRequest {
    pub fn to_spec(&self, models: &[String], defaults: EvalParams) -> ApiResult<QuerySpec> {
        let params = EvalParams {
            eval_iou: self.eval_iou.unwrap_or(defaults.eval_iou),
            conf_min: self.conf_min.unwrap_or(defaults.conf_min),
            conf_max: self.conf_max.unwrap_or(defaults.conf_max),
        };
        params
            .validate()
            .map_err(|e| ApiError::bad_request("parameter_out_of_range", e.to_string()))?;
        let status = match &self.status {
            None => StatusFilter::All,
            Some(s) => s
                .parse()
                .map_err(|e: crate::query::QueryError| ApiError::bad_request("invalid_query", e.to_string()))?,
        };
        QuerySpec::from_lists(models, &self.include, &self.exclude, &self.neutral, status, params)
            .map_err(|e| ApiError::bad_request("invalid_query", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub spec: QuerySpec,
    pub cluster_ids: Vec<ClusterId>,
    pub clusters: Vec<ClusterDetail>,
}

pub fn run_query(engine: &Engine, spec: &QuerySpec) -> QueryResponse {
    let evaluation = engine.evaluate(&spec.params);
    let ids = query(spec, &evaluation.clusters, &evaluation.statuses);
    let clusters = ids
        .iter()
        .filter_map(|id| evaluation.cluster(*id))
        .map(|(c, s)| detail(engine, c, s))
        .collect();
    QueryResponse {
        spec: spec.clone(),
        cluster_ids: ids,
        clusters,
    }
}

pub fn cluster_detail(engine: &Engine, id: ClusterId, p: &EvalParams) -> Option<ClusterDetail> {
    let evaluation = engine.evaluate(p);
    evaluation.cluster(id).map(|(c, s)| detail(engine, c, s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationsResponse {
    pub image_id: String,
    pub image: ImageInfo,
    /// Every detection on the image, regardless of confidence.
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<GroundTruthObject>,
    /// Clusters on the image under the requested criteria.
    pub clusters: Vec<(AgreementCluster, ClusterStatus)>,
}

pub fn annotations(engine: &Engine, image_id: &str, p: &EvalParams) -> Option<AnnotationsResponse> {
    let dataset = engine.dataset();
    let image = dataset.images.get(image_id)?.clone();
    let evaluation = engine.evaluate(p);
    Some(AnnotationsResponse {
        image_id: image_id.to_string(),
        image,
        detections: dataset
            .detections
            .iter()
            .filter(|d| d.image_id == image_id)
            .cloned()
            .collect(),
        ground_truth: dataset
            .ground_truth
            .iter()
            .filter(|g| g.image_id == image_id)
            .cloned()
            .collect(),
        clusters: evaluation
            .clusters
            .into_iter()
            .zip(evaluation.statuses)
            .filter(|(c, _)| c.image_id == image_id)
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagRequest {
    pub tag: String,
    pub image_ids: Vec<String>,
}

/// Shared service state.
pub struct AppState {
    engine: Engine,
    defaults: EvalParams,
    image_root: PathBuf,
    tags: RwLock<TagStore>,
    tag_path: Option<PathBuf>,
}

impl AppState {
    /// `tag_path` is where tag changes are persisted; `None` keeps them in
    /// memory only.
    pub fn new(engine: Engine, defaults: EvalParams, image_root: PathBuf, tags: TagStore, tag_path: Option<PathBuf>) -> Self {
        AppState {
            engine,
            defaults,
            image_root,
            tags: RwLock::new(tags),
            tag_path,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn tag_document(&self) -> TagDocument {
        let tags = self.tags.read().unwrap_or_else(|e| e.into_inner());
        tags.export_document(&self.engine.dataset().images)
    }

    fn assign_tags(&self, req: &TagRequest) -> ApiResult<TagDocument> {
        let images = &self.engine.dataset().images;
        let mut tags = self.tags.write().unwrap_or_else(|e| e.into_inner());
        let mut next = tags.clone();
        next.assign(&req.tag, &req.image_ids, images)
            .map_err(|e| ApiError::bad_request("invalid_tag", e.to_string()))?;
        if next.is_dirty() {
            if let Some(path) = &self.tag_path {
                next.export(path, images)
                    .map_err(|e| ApiError::internal(e.to_string()))?;
            }
            next.mark_clean();
        }
        *tags = next;
        Ok(tags.export_document(images))
    }
}

fn params_of(state: &AppState, raw: &HashMap<String, String>) -> ApiResult<EvalParams> {
    parse_params(raw, state.defaults)
}

async fn get_meta(State(state): State<Arc<AppState>>) -> Json<MetaResponse> {
    Json(meta(&state.engine, state.defaults))
}

async fn get_intersections(
    State(state): State<Arc<AppState>>,
    Query(raw): Query<HashMap<String, String>>,
) -> ApiResult<Json<IntersectionsResponse>> {
    let p = params_of(&state, &raw)?;
    Ok(Json(intersections(&state.engine, &p)))
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("malformed_body", e.to_string()))
}

async fn post_query(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<QueryResponse>> {
    let req: QueryRequest = parse_json(&body)?;
    let spec = req.to_spec(state.engine.models(), state.defaults)?;
    Ok(Json(run_query(&state.engine, &spec)))
}

async fn get_cluster(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(raw): Query<HashMap<String, String>>,
) -> ApiResult<Json<ClusterDetail>> {
    let p = params_of(&state, &raw)?;
    let n: u32 = id
        .trim_start_matches('c')
        .parse()
        .map_err(|_| ApiError::bad_request("invalid_parameter", format!("bad cluster id {id:?}")))?;
    cluster_detail(&state.engine, ClusterId(n), &p)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no cluster {id} under these criteria")))
}

async fn get_annotations(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(raw): Query<HashMap<String, String>>,
) -> ApiResult<Json<AnnotationsResponse>> {
    let p = params_of(&state, &raw)?;
    annotations(&state.engine, &id, &p)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown image {id:?}")))
}

/// Resolve an image file under `root`, refusing anything that escapes it.
pub fn resolve_image(root: &Path, file: &str) -> ApiResult<PathBuf> {
    let rel = Path::new(file);
    if rel
        .components()
        .any(|c| !matches!(c, Component::Normal(_) | Component::CurDir))
    {
        return Err(ApiError::bad_request("forbidden_path", format!("image path {file:?} leaves the image root")));
    }
    let root = root
        .canonicalize()
        .map_err(|e| ApiError::not_found(format!("image root: {e}")))?;
    let full = root
        .join(rel)
        .canonicalize()
        .map_err(|_| ApiError::not_found(format!("image file {file:?} not found")))?;
    if !full.starts_with(&root) {
        return Err(ApiError::bad_request("forbidden_path", format!("image path {file:?} leaves the image root")));
    }
    Ok(full)
}

fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("gif") => "image/gif",
        Some("bmp") => "image/bmp",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}

async fn get_image(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let info = state
        .engine
        .dataset()
        .images
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown image {id:?}")))?;
    let path = resolve_image(&state.image_root, &info.file)?;
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], Body::from(bytes)).into_response())
}

async fn get_metrics(
    State(state): State<Arc<AppState>>,
    Query(raw): Query<HashMap<String, String>>,
) -> ApiResult<Json<MetricsReport>> {
    let p = params_of(&state, &raw)?;
    Ok(Json(metrics_report(&state.engine, &p)))
}

async fn get_tags(State(state): State<Arc<AppState>>) -> Json<TagDocument> {
    Json(state.tag_document())
}

async fn post_tags(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<TagDocument>> {
    let req: TagRequest = parse_json(&body)?;
    Ok(Json(state.assign_tags(&req)?))
}

async fn export_tags(State(state): State<Arc<AppState>>) -> Response {
    (
        [(header::CONTENT_DISPOSITION, "attachment; filename=\"tags.json\"")],
        Json(state.tag_document()),
    )
        .into_response()
}

async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/meta", get(get_meta))
        .route("/api/intersections", get(get_intersections))
        .route("/api/query", axum::routing::post(post_query))
        .route("/api/clusters/{id}", get(get_cluster))
        .route("/api/images/{id}", get(get_image))
        .route("/api/images/{id}/annotations", get(get_annotations))
        .route("/api/metrics", get(get_metrics))
        .route("/api/tags", get(get_tags).post(post_tags))
        .route("/api/export/tags", get(export_tags))
        .fallback(fallback)
        .with_state(state)
}

/// Load the artifact and its tag sidecar and build the shared state.
pub fn load_state(config: &ServiceConfig) -> Result<AppState, ServiceError> {
    let artifact = crate::ingest::load_artifact(&config.artifact_path)?;
    let tag_path = sidecar_path(&config.artifact_path);
    let tags = TagStore::load_or_default(&tag_path)?;
    Ok(AppState::new(
        Engine::new(artifact),
        config.defaults,
        config.static_image_root.clone(),
        tags,
        Some(tag_path),
    ))
}

/// Serve until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = Arc::new(load_state(&config)?);
    let listener = tokio::net::TcpListener::bind(&config.listen_address)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.listen_address.clone(),
            source,
        })?;
    if let Ok(addr) = listener.local_addr() {
        eprintln!("listening on http://{addr}");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Serve)
}
