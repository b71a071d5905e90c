//! HTTP API over a shared [`Engine`].
//!
//! | Method | Path                          | Body                                        | Success |
//! |--------|-------------------------------|---------------------------------------------|---------|
//! | POST   | `/sessions`                   | `{candidate_a, candidate_b, recommended, seed?}` | 201 `{session_id, phase, turns}` |
//! | POST   | `/sessions/{id}/utterance`    | `{text}`                                    | 200 `{turns, phase, elapsed_secs, remaining_secs}` |
//! | GET    | `/sessions/{id}/transcript`   |                                             | 200 JSON lines |
//! | GET    | `/sights`                     |                                             | 200 `[{sight_id, name, summary}]` |
//! | GET    | `/healthz`                    |                                             | 200 `{status, sights}` |
//!
//! Errors are `{"error": "..."}` with 400 (malformed body), 422 (invalid
//! assignment), 404 (unknown session), 410 (session already finished) or
//! 500.
//!
//! Utterances posted concurrently to one session are queued and applied in
//! arrival order; a request never interleaves its turns with another's.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};
use tourdesk_core::error::SessionError;
use tourdesk_core::session::{persist_transcript, transcript_jsonl, Assignment, Engine, Phase, Session, Turn};
use tourdesk_core::text::stable_hash;
use tourdesk_core::Error as CoreError;

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub candidate_a: String,
    pub candidate_b: String,
    pub recommended: String,
    /// Generation seed; assigned by the service when absent.
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub phase: Phase,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Deserialize)]
pub struct Utterance {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Advanced {
    pub turns: Vec<Turn>,
    pub phase: Phase,
    pub elapsed_secs: f64,
    pub remaining_secs: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SightCard {
    pub sight_id: String,
    pub name: String,
    pub summary: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id}"))
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let status = match &e {
            CoreError::Session(SessionError::Terminal) => StatusCode::GONE,
            CoreError::Session(
                SessionError::UnknownSight(_)
                | SessionError::SameCandidates(_)
                | SessionError::InvalidAssignment { .. }
                | SessionError::MissingArtifacts(_),
            ) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

fn join_error(e: tokio::task::JoinError) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("advance task failed: {e}"))
}

/// Shared engine plus the live sessions.
pub struct AppState {
    engine: Arc<Engine>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    seed: u64,
    created: AtomicU64,
    transcript_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(engine: Engine, seed: u64) -> Self {
        Self {
            engine: Arc::new(engine),
            sessions: RwLock::new(HashMap::new()),
            seed,
            created: AtomicU64::new(0),
            transcript_dir: None,
        }
    }

    /// Also write `{dir}/{session_id}.jsonl` after every advance.
    pub fn with_transcript_dir(mut self, dir: PathBuf) -> Self {
        self.transcript_dir = Some(dir);
        self
    }

    fn next_seed(&self) -> u64 {
        let n = self.created.fetch_add(1, Ordering::Relaxed);
        stable_hash(&[&self.seed.to_le_bytes(), &n.to_le_bytes()])
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, session: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.transcript_dir else {
            return Ok(());
        };
        let path = dir.join(format!("{}.jsonl", session.id));
        let write = || -> std::io::Result<()> {
            let mut file = std::fs::File::create(&path)?;
            persist_transcript(session, &mut file)
        };
        write().map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("cannot write {}: {e}", path.display()),
            )
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sights", get(sights))
        .route("/sessions", post(create_session))
        .route("/sessions/:id/utterance", post(utterance))
        .route("/sessions/:id/transcript", get(transcript))
        .with_state(state)
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "sights": state.engine.catalog().len() }))
}

async fn sights(State(state): State<Arc<AppState>>) -> Json<Vec<SightCard>> {
    let bundle = state.engine.bundle();
    let cards = state
        .engine
        .catalog()
        .records()
        .iter()
        .map(|r| SightCard {
            sight_id: r.sight_id.clone(),
            name: r.name.clone(),
            summary: bundle
                .artifacts(&r.sight_id)
                .map(|a| a.summary.clone())
                .unwrap_or_default(),
        })
        .collect();
    Json(cards)
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let Json(body) = body?;
    let seed = body.seed.unwrap_or_else(|| state.next_seed());
    let assignment = Assignment::new(body.candidate_a, body.candidate_b, body.recommended);
    let engine = state.engine.clone();
    let session = tokio::task::spawn_blocking(move || -> Result<Session, CoreError> {
        let mut session = engine.start(assignment, seed)?;
        engine.advance(&mut session, None)?;
        Ok(session)
    })
    .await
    .map_err(join_error)??;
    state.persist(&session)?;
    let created = Created {
        session_id: session.id.to_string(),
        phase: session.phase,
        turns: session.turns.clone(),
    };
    tracing::info!(session = %created.session_id, seed, "session created");
    state
        .sessions
        .write()
        .await
        .insert(created.session_id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(created)))
}

async fn utterance(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Utterance>, JsonRejection>,
) -> Result<Json<Advanced>, ApiError> {
    let session = state.session(&id).await?;
    let Json(body) = body?;
    // The mutex queues waiters in arrival order.
    let mut guard = session.lock_owned().await;
    if guard.is_done() {
        return Err(ApiError::new(StatusCode::GONE, format!("session {id} is finished")));
    }
    let engine = state.engine.clone();
    let (guard, result) = tokio::task::spawn_blocking(move || {
        let result = engine.advance(&mut guard, Some(&body.text));
        (guard, result)
    })
    .await
    .map_err(join_error)?;
    let turns = result?;
    state.persist(&guard)?;
    let now = turns.last().map(|t| t.ts).unwrap_or_else(|| state.engine.now());
    let elapsed = (now - guard.started_at).num_milliseconds() as f64 / 1000.0;
    let budget = state.engine.settings().time_budget.num_milliseconds() as f64 / 1000.0;
    Ok(Json(Advanced {
        turns,
        phase: guard.phase,
        elapsed_secs: elapsed,
        remaining_secs: (budget - elapsed).max(0.0),
    }))
}

async fn transcript(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id).await?;
    let body = transcript_jsonl(&session.lock().await.turns);
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}
