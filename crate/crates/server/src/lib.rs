//! HTTP/JSON service that generates episodes and scores answers.
//!
//! Every handler is a pure function of its request and the built-in catalog:
//! episodes are regenerated from `(config, task, index)` on demand, so the
//! server keeps no state between requests. See `docs/http-protocol.md`.

use std::collections::BTreeSet;
use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use cog_core::batch::{map_indices, Execution};
use cog_core::catalog::{Catalog, CATALOG_VERSION};
use cog_core::error::GenerateError;
use cog_core::eval::{chance_level, score_answers, Answer, ScoreReport};
use cog_core::generate::{parse_episode_id, EpisodeGenerator, GenerationConfig};
use cog_core::io::{render_pngs, EpisodeRecord};
use cog_core::response::OutputSpace;

/// Most episodes one `/v1/episodes` page may hold.
pub const PAGE_LIMIT: u64 = 1024;
/// Most distinct episodes one `/v1/score` request may reference.
pub const SCORE_LIMIT: usize = 64 * 1024;
/// Request bodies larger than this are refused with 413.
pub const BODY_LIMIT: usize = 32 * 1024 * 1024;

#[derive(Clone, Copy, Debug)]
pub struct AppState {
    pub catalog: &'static Catalog,
    /// Seed of the canonical config used when a request names none.
    pub default_seed: u64,
}

impl AppState {
    pub fn new(default_seed: u64) -> Self {
        AppState {
            catalog: Catalog::builtin(),
            default_seed,
        }
    }

    fn config(&self, requested: Option<GenerationConfig>) -> GenerationConfig {
        requested.unwrap_or_else(|| GenerationConfig::canonical(self.default_seed))
    }
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("{requested} episodes requested, the limit is {limit}")]
    TooLarge { requested: u64, limit: u64 },
    #[error("generation failed: {0}")]
    Internal(String),
}

impl From<GenerateError> for ApiError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::UnknownTask(t) => ApiError::UnknownTask(t),
            GenerateError::Config(msg) => ApiError::BadRequest(msg),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::UnknownTask(_) => StatusCode::NOT_FOUND,
            ApiError::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        json_response(
            status,
            &ErrorBody {
                error: self.to_string(),
            },
        )
    }
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("response bodies always serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(e.to_string()))
}

/// `"all"` or a list of task names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskSelection {
    Named(Vec<String>),
    All(AllTasks),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllTasks {
    All,
}

impl Default for TaskSelection {
    fn default() -> Self {
        TaskSelection::All(AllTasks::All)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    #[default]
    Symbolic,
    Base64Png,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeRequest {
    #[serde(default)]
    pub config: Option<GenerationConfig>,
    #[serde(default)]
    pub tasks: TaskSelection,
    /// Episodes per task.
    pub count: u64,
    #[serde(default)]
    pub start_index: u64,
    #[serde(default)]
    pub encoding: Encoding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodePage {
    pub catalog_version: String,
    pub config: GenerationConfig,
    pub tasks: Vec<String>,
    pub start_index: u64,
    pub count: u64,
    /// `start_index` of the following page.
    pub next_start_index: u64,
    /// Index-major: every task's episode `i` before any episode `i + 1`, so
    /// consecutive pages concatenate to the larger page.
    pub episodes: Vec<EpisodeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    #[serde(default)]
    pub config: Option<GenerationConfig>,
    pub answers: Vec<Answer>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskListing {
    pub name: String,
    pub family: String,
    pub output_space: OutputSpace,
    pub chance_level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskList {
    pub catalog_version: String,
    pub tasks: Vec<TaskListing>,
    pub mean_chance_level: f64,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/healthz", get(healthz))
        .route("/v1/tasks", get(tasks))
        .route("/v1/episodes", post(episodes))
        .route("/v1/score", post(score))
        .layer(axum::extract::DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn task_list(catalog: &Catalog) -> TaskList {
    let tasks: Vec<TaskListing> = catalog
        .tasks()
        .iter()
        .map(|t| {
            let space = t.output_space();
            TaskListing {
                name: t.name.clone(),
                family: t.family.clone(),
                chance_level: chance_level(&space),
                output_space: space,
            }
        })
        .collect();
    let mean = tasks.iter().map(|t| t.chance_level).sum::<f64>() / tasks.len().max(1) as f64;
    TaskList {
        catalog_version: CATALOG_VERSION.to_string(),
        tasks,
        mean_chance_level: mean,
    }
}

async fn tasks(State(state): State<AppState>) -> Response {
    json_response(StatusCode::OK, &task_list(state.catalog))
}

fn resolve(catalog: &Catalog, selection: &TaskSelection) -> Result<Vec<String>, ApiError> {
    let names: Vec<&str> = match selection {
        TaskSelection::All(_) => Vec::new(),
        TaskSelection::Named(names) => names.iter().map(String::as_str).collect(),
    };
    catalog
        .resolve(&names)
        .map(|tasks| tasks.iter().map(|t| t.name.clone()).collect())
        .map_err(ApiError::from)
}

/// Builds one page of episodes; blocking, CPU-bound.
pub fn episode_page(state: &AppState, request: &EpisodeRequest) -> Result<EpisodePage, ApiError> {
    let tasks = resolve(state.catalog, &request.tasks)?;
    let requested = request.count.saturating_mul(tasks.len() as u64);
    if requested > PAGE_LIMIT {
        return Err(ApiError::TooLarge {
            requested,
            limit: PAGE_LIMIT,
        });
    }
    let end = request
        .start_index
        .checked_add(request.count)
        .ok_or_else(|| ApiError::BadRequest("start_index + count overflows".into()))?;
    let config = state.config(request.config);
    let generator = EpisodeGenerator::new(state.catalog, config)?;
    let per_task = tasks.len() as u64;
    let flat_start = request.start_index * per_task;
    let episodes = map_indices(Execution::default(), flat_start..end * per_task, |k| {
        let task = &tasks[(k % per_task) as usize];
        let episode = generator.generate(task, k / per_task)?;
        let mut record = EpisodeRecord::from_episode(&episode);
        if request.encoding == Encoding::Base64Png {
            let pngs = render_pngs(&episode).map_err(|e| ApiError::Internal(e.to_string()))?;
            record.images_base64 = pngs
                .iter()
                .map(|p| base64::engine::general_purpose::STANDARD.encode(p))
                .collect();
        }
        Ok::<_, ApiError>(record)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(EpisodePage {
        catalog_version: CATALOG_VERSION.to_string(),
        config,
        tasks,
        start_index: request.start_index,
        count: request.count,
        next_start_index: end,
        episodes,
    })
}

async fn episodes(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: EpisodeRequest = parse_body(&body)?;
    let page = tokio::task::spawn_blocking(move || episode_page(&state, &request))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(json_response(StatusCode::OK, &page))
}

/// Regenerates every episode named by the answers and scores them.
pub fn score_request(state: &AppState, request: &ScoreRequest) -> Result<ScoreReport, ApiError> {
    let config = state.config(request.config);
    let generator = EpisodeGenerator::new(state.catalog, config)?;
    let mut ids: BTreeSet<(String, u64)> = BTreeSet::new();
    for answer in &request.answers {
        let (task, index) = parse_episode_id(&answer.episode)
            .ok_or_else(|| ApiError::BadRequest(format!("bad episode id `{}`", answer.episode)))?;
        if state.catalog.get(task).is_none() {
            return Err(ApiError::UnknownTask(task.to_string()));
        }
        ids.insert((task.to_string(), index));
        if ids.len() > SCORE_LIMIT {
            return Err(ApiError::TooLarge {
                requested: ids.len() as u64,
                limit: SCORE_LIMIT as u64,
            });
        }
    }
    let ids: Vec<(String, u64)> = ids.into_iter().collect();
    let episodes = map_indices(Execution::default(), 0..ids.len() as u64, |i| {
        let (task, index) = &ids[i as usize];
        generator.generate(task, *index)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(score_answers(&episodes, &request.answers))
}

async fn score(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: ScoreRequest = parse_body(&body)?;
    let report = tokio::task::spawn_blocking(move || score_request(&state, &request))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(json_response(StatusCode::OK, &report))
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, default_seed: u64) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(default_seed))).await
}
