//! HTTP session service: upload a scene, read its report, run manipulations,
//! undo them.
//!
//! Every session holds a stack of snapshots. Mutating requests on one session
//! are serialized; a manipulation arriving while another runs gets 409.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use vlc_core::document::{source_date_timestamp, DocumentError, ReportDocument, SceneDocument};
use vlc_core::manipulation::{manipulate, ChangeStep, ManipulationRequest, ManipulationResult};
use vlc_core::scale::{identify, ComplexityReport, ScaleConfig};

/// Budgets above this run in the background and answer 202.
pub const SYNC_BUDGET_LIMIT: usize = 20_000;
pub const DEFAULT_TTL: Duration = Duration::from_secs(2 * 60 * 60);

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    default_config: ScaleConfig,
    ttl: Duration,
    sync_budget_limit: usize,
}

struct Snapshot {
    doc: SceneDocument,
    change_log: Vec<ChangeStep>,
}

#[derive(Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum Job {
    Running,
    Done { result: Value },
    Failed { code: u16, error: String },
}

struct SessionState {
    path: String,
    config: ScaleConfig,
    history: Vec<Snapshot>,
    /// Reports by scene hash, so unchanged scenes are not re-identified.
    reports: HashMap<String, ComplexityReport>,
    jobs: HashMap<String, Job>,
}

struct Session {
    state: Mutex<SessionState>,
    busy: AtomicBool,
    last_access: Mutex<Instant>,
}

impl Session {
    fn touch(&self) {
        *self.last_access.lock().unwrap() = Instant::now();
    }
}

impl AppState {
    pub fn new(default_config: ScaleConfig) -> Self {
        Self::with_limits(default_config, DEFAULT_TTL, SYNC_BUDGET_LIMIT)
    }

    pub fn with_limits(default_config: ScaleConfig, ttl: Duration, sync_budget_limit: usize) -> Self {
        Self {
            inner: Arc::new(Inner {
                sessions: Mutex::new(HashMap::new()),
                default_config,
                ttl,
                sync_budget_limit,
            }),
        }
    }

    /// Drops sessions idle for longer than the TTL; returns how many went.
    /// Sessions with a manipulation in flight are kept.
    pub fn evict_expired(&self, now: Instant) -> usize {
        let mut sessions = self.inner.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, s| {
            s.busy.load(Ordering::Acquire) || now.duration_since(*s.last_access.lock().unwrap()) <= self.inner.ttl
        });
        before - sessions.len()
    }

    pub fn session_count(&self) -> usize {
        self.inner.sessions.lock().unwrap().len()
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let s = self.inner.sessions.lock().unwrap().get(id).cloned().ok_or(ApiError::NotFound)?;
        s.touch();
        Ok(s)
    }
}

#[derive(Debug)]
enum ApiError {
    BadRequest { message: String, pointer: Option<String> },
    Unprocessable(String),
    NotFound,
    Conflict(String),
    Internal(String),
}

impl ApiError {
    fn parts(self) -> (StatusCode, String) {
        match self {
            ApiError::BadRequest { message, .. } => (StatusCode::BAD_REQUEST, message),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::NotFound => (StatusCode::NOT_FOUND, "not found".into()),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let pointer = match &self {
            ApiError::BadRequest { pointer, .. } => pointer.clone(),
            _ => None,
        };
        let (status, message) = self.parts();
        let body = match pointer {
            Some(p) => json!({ "error": message, "pointer": p }),
            None => json!({ "error": message }),
        };
        (status, Json(body)).into_response()
    }
}

fn document_error(e: DocumentError, prefix: &str) -> ApiError {
    match e {
        DocumentError::Parse { pointer, message } => {
            ApiError::BadRequest { message, pointer: Some(format!("{prefix}{pointer}")) }
        }
        DocumentError::Validation(_) | DocumentError::PathNotFound(_) => ApiError::Unprocessable(e.to_string()),
    }
}

fn core_error(e: vlc_core::Error) -> ApiError {
    ApiError::Unprocessable(e.to_string())
}

/// Body of `POST /api/sessions`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    scene: Value,
    path: String,
    #[serde(default)]
    config: Option<Value>,
}

fn pointer(prefix: &str, path: &serde_path_to_error::Path) -> String {
    let tail: String = path.iter().map(|s| format!("/{s}")).collect();
    format!("{prefix}{tail}")
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| ApiError::BadRequest {
        message: e.inner().to_string(),
        pointer: Some(pointer("", e.path())),
    })
}

fn report_for(state: &mut SessionState) -> Result<(ReportDocument, Value), ApiError> {
    let snap = state.history.last().expect("history is never empty");
    let hash = snap.doc.hash();
    let report = match state.reports.get(&hash) {
        Some(r) => r.clone(),
        None => {
            let nav = snap.doc.nav_path(&state.path, state.config.turn_threshold).map_err(|e| document_error(e, ""))?;
            let r = identify(&snap.doc.scene, &nav, &state.config).map_err(core_error)?;
            state.reports.insert(hash, r.clone());
            r
        }
    };
    let doc = ReportDocument::new(&snap.doc, &state.path, &state.config, report, source_date_timestamp());
    Ok((doc, snap.doc.to_value()))
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse_body(&body)?;
    let config = match req.config {
        Some(v) => {
            let cfg: ScaleConfig = serde_path_to_error::deserialize(v).map_err(|e| ApiError::BadRequest {
                message: e.inner().to_string(),
                pointer: Some(pointer("/config", e.path())),
            })?;
            cfg.validate().map_err(|e| ApiError::BadRequest { message: e.to_string(), pointer: Some("/config".into()) })?;
            cfg
        }
        None => app.inner.default_config.clone(),
    };
    let scene_bytes = serde_json::to_vec(&req.scene).map_err(|e| ApiError::Internal(e.to_string()))?;
    let doc = SceneDocument::from_slice(&scene_bytes).map_err(|e| document_error(e, "/scene"))?;
    doc.path(&req.path).map_err(|e| document_error(e, ""))?;
    let mut state = SessionState {
        path: req.path,
        config,
        history: vec![Snapshot { doc, change_log: Vec::new() }],
        reports: HashMap::new(),
        jobs: HashMap::new(),
    };
    let (report, _) = report_for(&mut state)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Arc::new(Session {
        state: Mutex::new(state),
        busy: AtomicBool::new(false),
        last_access: Mutex::new(Instant::now()),
    });
    app.inner.sessions.lock().unwrap().insert(id.clone(), session);
    tracing::info!(session = %id, "session created");
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id, "report": report }))).into_response())
}

async fn session_info(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    let state = s.state.lock().unwrap();
    Ok(Json(json!({
        "session_id": id,
        "path": state.path,
        "busy": s.busy.load(Ordering::Acquire),
        "history_depth": state.history.len(),
    })))
}

async fn get_report(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<ReportDocument>, ApiError> {
    let s = app.session(&id)?;
    let mut state = s.state.lock().unwrap();
    Ok(Json(report_for(&mut state)?.0))
}

async fn get_scene(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    let state = s.state.lock().unwrap();
    Ok(Json(state.history.last().expect("history is never empty").doc.to_value()))
}

/// Clears the session's busy flag when dropped, whatever happens to the run.
struct BusyGuard(Arc<Session>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

fn run_manipulation(session: &Session, request: &ManipulationRequest) -> Result<Value, ApiError> {
    let (doc, path, config) = {
        let state = session.state.lock().unwrap();
        let snap = state.history.last().expect("history is never empty");
        (snap.doc.clone(), state.path.clone(), state.config.clone())
    };
    let nav = doc.nav_path(&path, config.turn_threshold).map_err(|e| document_error(e, ""))?;
    let result: ManipulationResult = manipulate(&doc.scene, &nav, request, &config).map_err(core_error)?;
    let new_doc = doc
        .with_morphology(&path, result.scene.clone(), result.path.clone())
        .map_err(|e| document_error(e, ""))?;
    let scene_hash = new_doc.hash();
    let body = json!({
        "before": result.before,
        "after": result.after,
        "change_log": result.change_log,
        "scene": new_doc.to_value(),
        "scene_hash": scene_hash,
        "objective": result.objective,
        "violations": result.violations,
        "converged": result.converged,
        "evaluations": result.evaluations,
        "generations": result.generations,
    });
    let mut state = session.state.lock().unwrap();
    state.reports.insert(scene_hash, result.after.clone());
    state.history.push(Snapshot { doc: new_doc, change_log: result.change_log });
    Ok(body)
}

async fn manipulate_session(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let session = app.session(&id)?;
    let request: ManipulationRequest = parse_body(&body)?;
    if session.busy.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).is_err() {
        return Err(ApiError::Conflict("a manipulation is already running for this session".into()));
    }
    let guard = BusyGuard(session.clone());
    if request.budget <= app.inner.sync_budget_limit {
        let out = tokio::task::spawn_blocking(move || {
            let r = run_manipulation(&guard.0, &request);
            drop(guard);
            r
        })
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
        return Ok(Json(out).into_response());
    }
    let job = uuid::Uuid::new_v4().simple().to_string();
    session.state.lock().unwrap().jobs.insert(job.clone(), Job::Running);
    let job_id = job.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = match run_manipulation(&guard.0, &request) {
            Ok(result) => Job::Done { result },
            Err(e) => {
                let (status, error) = e.parts();
                Job::Failed { code: status.as_u16(), error }
            }
        };
        guard.0.state.lock().unwrap().jobs.insert(job_id, outcome);
        drop(guard);
    });
    let poll = format!("/api/sessions/{id}/jobs/{job}");
    Ok((StatusCode::ACCEPTED, [("location", poll.clone())], Json(json!({ "job_id": job, "poll": poll }))).into_response())
}

async fn get_job(State(app): State<AppState>, Path((id, job)): Path<(String, String)>) -> Result<Json<Job>, ApiError> {
    let s = app.session(&id)?;
    let state = s.state.lock().unwrap();
    state.jobs.get(&job).cloned().map(Json).ok_or(ApiError::NotFound)
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    if s.busy.load(Ordering::Acquire) {
        return Err(ApiError::Conflict("a manipulation is running for this session".into()));
    }
    let mut state = s.state.lock().unwrap();
    if state.history.len() == 1 {
        return Err(ApiError::Conflict("nothing to undo".into()));
    }
    let undone = state.history.pop().expect("checked above");
    let (report, scene) = report_for(&mut state)?;
    Ok(Json(json!({ "report": report, "scene": scene, "undone_steps": undone.change_log.len() })))
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(session_info))
        .route("/api/sessions/{id}/report", get(get_report))
        .route("/api/sessions/{id}/scene", get(get_scene))
        .route("/api/sessions/{id}/manipulate", post(manipulate_session))
        .route("/api/sessions/{id}/jobs/{job}", get(get_job))
        .route("/api/sessions/{id}/undo", post(undo))
        .with_state(app)
}
