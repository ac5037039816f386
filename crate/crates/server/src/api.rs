//! HTTP routes over the session map.
//!
//! Turns on one session are strictly sequential: a turn posted while another
//! is still running gets 409 instead of queueing.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parley_core::dialogue::DialogueState;
use parley_core::persistence::PersistenceError;
use parley_core::speech::{AudioFormat, AudioRef};
use parley_core::FeedbackReport;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::session::{Runtime, Session, SessionError, TurnInput, TurnOutcome};

type SharedSession = Arc<tokio::sync::Mutex<Session>>;

pub struct AppState {
    runtime: Arc<Runtime>,
    sessions: Mutex<HashMap<String, SharedSession>>,
}

impl AppState {
    pub fn new(runtime: Runtime) -> Arc<Self> {
        Arc::new(Self {
            runtime: Arc::new(runtime),
            sessions: Mutex::new(HashMap::new()),
        })
    }

    fn session(&self, id: &str) -> Option<SharedSession> {
        self.sessions.lock().expect("session map poisoned").get(id).cloned()
    }
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown session {0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %self, "request failed");
        }
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(err: SessionError) -> Self {
        match err {
            SessionError::Ended => ApiError::Conflict(err.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSession {
    #[serde(default)]
    pub name_hint: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionStarted {
    pub session_id: String,
    pub bot_text: String,
    pub state: DialogueState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_ref: Option<AudioRef>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRequest {
    #[serde(default)]
    pub text: Option<String>,
    /// Path or URI of recorded audio; the format follows the extension.
    #[serde(default)]
    pub audio_ref: Option<String>,
    /// Speaking time of a text turn, or a fallback for audio without a header.
    #[serde(default)]
    pub duration_ms: Option<u64>,
}

impl TurnRequest {
    fn into_input(self) -> Result<TurnInput, ApiError> {
        match (self.text, self.audio_ref) {
            (Some(text), None) => Ok(TurnInput::Text {
                text,
                duration_ms: self.duration_ms,
            }),
            (None, Some(uri)) => {
                let format = AudioFormat::from_path(&uri);
                Ok(TurnInput::Audio(AudioRef::new(uri, format, self.duration_ms.unwrap_or(0))))
            }
            _ => Err(ApiError::BadRequest(
                "exactly one of text or audio_ref is required".into(),
            )),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionStatus {
    pub session_id: String,
    pub state: DialogueState,
    pub done: bool,
    pub trace: Vec<DialogueState>,
}

/// Parses a JSON body; an empty body reads as `{}`.
fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("malformed body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionStarted>), ApiError> {
    let request: NewSession = parse_body(&body)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let runtime = state.runtime.clone();
    let session_id = id.clone();
    let (session, outcome) =
        blocking(move || Session::start(&runtime, &session_id, request.name_hint.as_deref())).await??;
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
    tracing::info!(session = %id, state = %outcome.state, "session started");
    Ok((
        StatusCode::CREATED,
        Json(SessionStarted {
            session_id: id,
            bot_text: outcome.bot_text,
            state: outcome.state,
            audio_ref: outcome.audio_ref,
        }),
    ))
}

async fn take_turn(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TurnOutcome>, ApiError> {
    let session = state.session(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?;
    let guard = session
        .try_lock_owned()
        .map_err(|_| ApiError::Conflict("a turn is already in progress for this session".into()))?;
    if guard.is_ended() {
        return Err(SessionError::Ended.into());
    }
    let input = parse_body::<TurnRequest>(&body)?.into_input()?;
    let runtime = state.runtime.clone();
    let outcome = blocking(move || {
        let mut guard = guard;
        guard.turn(&runtime, input)
    })
    .await??;
    tracing::debug!(session = %id, state = %outcome.state, done = outcome.done, "turn");
    Ok(Json(outcome))
}

async fn session_status(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionStatus>, ApiError> {
    let session = state.session(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?;
    let session = session.lock().await;
    Ok(Json(SessionStatus {
        session_id: id,
        state: session.state(),
        done: session.is_ended(),
        trace: session.trace().to_vec(),
    }))
}

async fn session_report(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<FeedbackReport>, ApiError> {
    let too_early = || ApiError::Conflict("feedback has not been reached yet".into());
    if let Some(session) = state.session(&id) {
        let session = session.lock().await;
        return session.report().cloned().map(Json).ok_or_else(too_early);
    }
    // Sessions from before a restart live only in the store.
    let runtime = state.runtime.clone();
    let lookup = id.clone();
    let stored = blocking(move || runtime.store.as_ref().map(|s| s.load_session(&lookup))).await?;
    match stored {
        Some(Ok(stored)) => stored.report.map(Json).ok_or_else(too_early),
        Some(Err(PersistenceError::SessionNotFound(_) | PersistenceError::InvalidSessionId(_))) | None => {
            Err(ApiError::NotFound(id))
        }
        Some(Err(err)) => Err(ApiError::Internal(err.to_string())),
    }
}

fn cors(origins: &[String]) -> Result<CorsLayer, ApiError> {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    if origins.is_empty() {
        return Ok(layer.allow_origin(AllowOrigin::any()));
    }
    let parsed = origins
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|_| ApiError::BadRequest(format!("bad CORS origin {o:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(layer.allow_origin(parsed))
}

/// Builds the router. `cors_origins` empty allows any origin.
pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Result<Router, ApiError> {
    Ok(Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_status))
        .route("/sessions/{id}/turn", post(take_turn))
        .route("/sessions/{id}/report", get(session_report))
        .layer(cors(cors_origins)?)
        .with_state(state))
}
