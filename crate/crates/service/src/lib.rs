//! HTTP facade over the parameter dialogue.
//!
//! | method | path                        | body / result                          |
//! |--------|-----------------------------|----------------------------------------|
//! | POST   | `/sessions`                 | `{agent_type?, scenario_seed?}` → view  |
//! | POST   | `/sessions/{id}/answer`     | `{answer}` → view                       |
//! | GET    | `/sessions/{id}`            | view                                    |
//! | GET    | `/sessions/{id}/schedule`   | four chart series                       |
//! | GET    | `/sessions/{id}/events`     | server-sent events                      |
//!
//! Errors come back as `{code, message}` with a matching status.

pub mod config;
pub mod error;
pub mod session;

use std::collections::HashMap;
use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use hems_agent::{standard_tasks, AgentConfig, AgentType, RetrievalDriver, Toolkit};
use hems_gateway::TextGenerator;
use serde::Deserialize;
use tokio::sync::broadcast::error::RecvError;

pub use config::ServiceConfig;
pub use error::{ApiError, ErrorBody};
pub use session::{
    CostSummary, FillStatus, Message, ParameterStatus, PendingQuestion, Role, ScheduleView,
    Session, SessionEvent, SessionNotice, SessionState, SessionView,
};

use session::Engine;

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Engine>,
    sessions: Arc<RwLock<HashMap<String, Arc<Session>>>>,
}

impl AppState {
    pub fn new(generator: Arc<dyn TextGenerator>, config: ServiceConfig) -> Self {
        Self {
            engine: Arc::new(Engine { generator, config }),
            sessions: Arc::default(),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.engine.config
    }

    fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_owned()))
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session table lock").len()
    }

    /// Drops sessions idle for longer than `ttl` as of `now`; returns how
    /// many were dropped.
    pub fn evict_idle(&self, now: Instant, ttl: Duration) -> usize {
        let mut table = self.sessions.write().expect("session table lock");
        let before = table.len();
        table.retain(|_, s| now.saturating_duration_since(s.idle_since()) <= ttl);
        before - table.len()
    }

    fn snapshot(&self, session: &Session) {
        if let Some(dir) = &self.engine.config.snapshot_dir {
            if let Err(e) = write_snapshot(dir, session) {
                eprintln!("session {}: snapshot failed: {e}", session.id);
            }
        }
    }
}

fn write_snapshot(dir: &Path, session: &Session) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_vec_pretty(&session.view()).map_err(std::io::Error::other)?;
    let tmp = dir.join(format!("{}.json.tmp", session.id));
    std::fs::write(&tmp, json)?;
    std::fs::rename(tmp, dir.join(format!("{}.json", session.id)))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(submit_answer))
        .route("/sessions/{id}/schedule", get(get_schedule))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

/// Binds `addr` and serves until the process ends, evicting idle sessions
/// in the background.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let ttl = Duration::from_secs(state.config().ttl_secs);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval((ttl / 4).max(Duration::from_secs(1)));
        loop {
            tick.tick().await;
            sweeper.evict_idle(Instant::now(), ttl);
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    agent_type: Option<AgentType>,
    scenario_seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    answer: String,
}

fn parse_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body)
        .map_err(|e| ApiError::InvalidRequest(format!("invalid JSON body: {e}")))
}

async fn create_session(
    State(app): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let cfg = &app.engine.config;
    let agent = AgentConfig {
        agent_type: req.agent_type.unwrap_or(cfg.agent.agent_type),
        ..cfg.agent.clone()
    };
    let agent_type = agent.agent_type;
    let driver = RetrievalDriver::new(standard_tasks(), Toolkit::standard(), agent)
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Arc::new(Session::new(
        id.clone(),
        driver,
        agent_type,
        req.scenario_seed.unwrap_or(cfg.scenario_seed),
    ));
    let guard = session
        .driver
        .clone()
        .try_lock_owned()
        .expect("new session is idle");

    let engine = app.engine.clone();
    let worker = session.clone();
    tokio::task::spawn_blocking(move || {
        let mut guard = guard;
        worker.run(&mut guard, &engine);
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;

    let view = session.view();
    if view.state == SessionState::Failed {
        if let Some(err) = view
            .error
            .as_ref()
            .filter(|e| e.code == "provider_unavailable")
        {
            return Err(ApiError::ProviderUnavailable(err.message.clone()));
        }
    }
    app.sessions
        .write()
        .expect("session table lock")
        .insert(id, session.clone());
    app.snapshot(&session);
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = app.get(&id)?;
    session.touch();
    Ok(Json(session.view()))
}

async fn submit_answer(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ApiError> {
    let session = app.get(&id)?;
    let req: AnswerRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::InvalidRequest(format!("expected {{\"answer\": string}}: {e}")))?;
    let answer = req.answer.trim().to_owned();
    if answer.is_empty() {
        return Err(ApiError::InvalidRequest("the answer is empty".into()));
    }
    if answer.contains('\n') {
        return Err(ApiError::InvalidRequest(
            "the answer must be a single line".into(),
        ));
    }
    let guard = session
        .driver
        .clone()
        .try_lock_owned()
        .map_err(|_| ApiError::Busy)?;
    let state = session.state();
    if state != SessionState::AwaitingAnswer {
        return Err(ApiError::WrongState(format!(
            "answers are accepted only while a question is pending; the session is {}",
            serde_json::to_value(state)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default()
        )));
    }
    session.touch();
    let engine = app.engine.clone();
    let worker = session.clone();
    tokio::task::spawn_blocking(move || {
        let mut guard = guard;
        worker.answer(&mut guard, &engine, &answer);
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    app.snapshot(&session);
    Ok(Json(session.view()))
}

async fn get_schedule(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<ScheduleView>, ApiError> {
    let session = app.get(&id)?;
    session.touch();
    session.schedule().map(Json).ok_or_else(|| {
        let state = session.state();
        ApiError::ScheduleNotReady(match state {
            SessionState::Failed => "the session failed".into(),
            _ => "the dialogue is not finished".into(),
        })
    })
}

fn to_sse(event: &SessionEvent) -> Result<Event, Infallible> {
    let data = serde_json::to_string(event).unwrap_or_else(|_| "{}".into());
    Ok(Event::default().event(event.name()).data(data))
}

/// Replays the session's events so far, then follows new ones. The stream
/// ends after the schedule is ready or the session failed.
async fn events(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let session = app.get(&id)?;
    let (history, rx) = session.subscribe();
    let finished = history.iter().any(SessionEvent::is_terminal);
    let past = stream::iter(history);
    let live = stream::unfold((rx, finished), |(mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(e) => {
                    let end = e.is_terminal();
                    return Some((e, (rx, end)));
                }
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    let stream = past.chain(live).map(|e| to_sse(&e));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}
