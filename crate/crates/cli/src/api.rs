//! JSON-over-HTTP experiment service consumed by the browser trial runner.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use uuid::Uuid;
use xshuffle_core::experiment::{
    generate_schedule, render_stimulus, Phase, ScheduleError, Session, SessionError, SessionEvent, SessionState,
    StimulusError, Submission,
};
use xshuffle_core::imagecore::{write_image, ImageError, ImageFormat};
use xshuffle_core::Dataset;

use crate::config::{SeedPolicy, ServiceConfig};
use crate::store::{now_ms, SessionStore, StoreError};

pub const INSTRUCTIONS: &str = "Each trial shows one picture, possibly heavily distorted, and five object \
categories. Pick the category that matches the object in the picture, then rate how confident you are \
from 1 (guessing) to 5 (certain). There is no time limit. The first trials are practice and tell you \
whether you were right; the main trials do not. After every ten main trials you can take a short rest.";

pub struct AppState {
    pub store: SessionStore,
    pub dataset: Dataset,
    pub config: ServiceConfig,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/current", get(current))
        .route("/sessions/{id}/response", post(respond))
        .route("/sessions/{id}/continue", post(continue_session))
        .route("/sessions/{id}/export", get(export))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Unprocessable(String),
    Internal(String),
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownSession(_) => ApiError::NotFound(e.to_string()),
            StoreError::Session(ref s) => match s {
                SessionError::Confidence(_) | SessionError::Choice(_) => ApiError::Unprocessable(e.to_string()),
                SessionError::DuplicateResponse(_) | SessionError::WrongTrial { .. } | SessionError::IllegalEvent { .. } => {
                    ApiError::Conflict(e.to_string())
                }
            },
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<StimulusError> for ApiError {
    fn from(e: StimulusError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl From<ImageError> for ApiError {
    fn from(e: ImageError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl From<ScheduleError> for ApiError {
    fn from(e: ScheduleError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => {
                tracing::error!("{m}");
                (StatusCode::INTERNAL_SERVER_ERROR, m)
            }
        };
        (status, Json(serde_json::json!({ "error": message }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub agent_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub state: SessionState,
    pub instructions: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
}

/// What the client should show right now. Trial fields are present only
/// while a stimulus is on screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentView {
    pub session_id: String,
    pub state: SessionState,
    pub phase: Option<Phase>,
    pub trial_id: Option<u32>,
    /// Position of the trial in the schedule, from 0.
    pub trial_index: Option<usize>,
    pub total: usize,
    /// Base64 PNG of the stimulus.
    pub image: Option<String>,
    pub options: Option<Vec<String>>,
    pub practice_feedback_enabled: bool,
    pub rest: bool,
    pub progress: Progress,
}

#[derive(Debug, Deserialize)]
pub struct ResponseRequest {
    pub choice_index: usize,
    pub confidence: u8,
    pub reaction_time_ms: u64,
    /// Trial the client believes it answered; defaults to the one showing.
    pub trial_id: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResponseAck {
    pub accepted: bool,
    /// Only reported for practice trials.
    pub correct: Option<bool>,
    pub next_state: SessionState,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateView {
    pub state: SessionState,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let id = Uuid::new_v4();
    let seed = match app.config.seed_policy {
        SeedPolicy::Fixed(s) => s,
        SeedPolicy::PerSession => id.as_u64_pair().0,
    };
    let schedule = generate_schedule(&app.dataset, seed, &app.config.schedule_config())?;
    let session = app.store.create(&id.to_string(), &req.agent_id, schedule)?;
    tracing::info!(session = %session.session_id, agent = %req.agent_id, seed, "session created");
    Ok((
        StatusCode::CREATED,
        Json(CreateResponse {
            session_id: session.session_id,
            state: session.state,
            instructions: INSTRUCTIONS.to_string(),
        }),
    ))
}

fn view(app: &AppState, session: &Session) -> Result<CurrentView, ApiError> {
    let showing = session.state == SessionState::InTrial;
    let trial = session.current_trial().filter(|_| showing);
    let (image, options) = match trial {
        Some(t) => {
            let png = write_image(&render_stimulus(&app.dataset, t)?, ImageFormat::Png)?;
            let names = t
                .options
                .iter()
                .map(|&l| app.dataset.label_names.fine(l).to_string())
                .collect();
            (Some(BASE64.encode(png)), Some(names))
        }
        None => (None, None),
    };
    Ok(CurrentView {
        session_id: session.session_id.clone(),
        state: session.state,
        phase: trial.map(|t| t.phase),
        trial_id: trial.map(|t| t.trial_id),
        trial_index: trial.map(|_| session.cursor),
        total: session.total(),
        image,
        options,
        practice_feedback_enabled: trial.is_some_and(|t| t.phase == Phase::Practice),
        rest: session.state == SessionState::Rest,
        progress: Progress {
            completed: session.completed(),
            total: session.total(),
        },
    })
}

async fn current(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<CurrentView>, ApiError> {
    let session = app.store.snapshot(&id)?;
    Ok(Json(view(&app, &session)?))
}

async fn respond(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<ResponseRequest>,
) -> Result<Json<ResponseAck>, ApiError> {
    let session = app.store.snapshot(&id)?;
    let showing = session.current_trial().map(|t| t.trial_id);
    let trial_id = match (req.trial_id, session.state) {
        (Some(t), _) => t,
        // a second submit from the confirmation screen repeats the last answer
        (None, SessionState::Confirmation) => session.responses.last().map_or(0, |r| r.trial_id),
        (None, _) => showing.unwrap_or(0),
    };
    let submission = Submission {
        trial_id,
        chosen_option: req.choice_index,
        confidence: req.confidence,
        reaction_time_ms: req.reaction_time_ms,
        timestamp: now_ms(),
    };
    let adv = app.store.apply(&id, SessionEvent::Submit(submission))?;
    if adv.state == SessionState::Confirmation {
        let answered = session.schedule.trials.iter().position(|t| t.trial_id == trial_id);
        let cursor = answered.map_or(session.cursor, |i| i + 1);
        let app = Arc::clone(&app);
        let id = id.clone();
        tokio::spawn(async move {
            tokio::time::sleep(app.config.confirmation_timeout()).await;
            if let Err(e) = app.store.expire_confirmation(&id, cursor) {
                tracing::warn!(session = %id, "confirmation timeout failed: {e}");
            }
        });
    }
    Ok(Json(ResponseAck {
        accepted: true,
        correct: adv.feedback,
        next_state: adv.state,
    }))
}

async fn continue_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<StateView>, ApiError> {
    let event = match app.store.snapshot(&id)?.state {
        SessionState::Instructions => SessionEvent::Begin,
        _ => SessionEvent::Continue,
    };
    let adv = app.store.apply(&id, event)?;
    Ok(Json(StateView { state: adv.state }))
}

async fn export(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let body = app.store.export(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}
