//! HTTP front end over a [`SessionStore`].
//!
//! | method | path                        | body                                  |
//! |--------|-----------------------------|---------------------------------------|
//! | POST   | `/sessions`                 | [`CreateSession`]                     |
//! | GET    | `/sessions/{id}`            |                                       |
//! | POST   | `/sessions/{id}/turn`       | [`TurnInput`]                         |
//! | POST   | `/sessions/{id}/rating`     | `{"level": 1..5}`                     |
//! | POST   | `/sessions/{id}/close`      |                                       |
//! | GET    | `/runs`                     |                                       |
//! | GET    | `/scenarios`                |                                       |
//! | GET    | `/ratings/correlation`      | optional `?session_id=`               |
//! | GET    | `/healthz`                  |                                       |
//! | GET    | `/ui/...`                   | static files                          |
//!
//! Errors are `{"error": "..."}` with 404 (unknown session), 409 (action out
//! of turn), 410 (closed session), 400 (bad input) or 502 (agent failure).

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::services::ServeDir;
use tracing::info;

use crate::sessions::{CreateSession, SessionError, SessionStore, TurnInput};

impl SessionError {
    pub fn status(&self) -> StatusCode {
        match self {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Conflict(_) => StatusCode::CONFLICT,
            SessionError::Gone(_) => StatusCode::GONE,
            SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::Agent(_) => StatusCode::BAD_GATEWAY,
            SessionError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        (self.status(), Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

type Store = Arc<SessionStore>;
type Reply = Result<Response, SessionError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, SessionError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| SessionError::BadRequest(e.body_text()))
}

/// Store calls may block on agent HTTP requests, so they run off the async
/// executor.
async fn blocking<T, F>(store: Store, f: F) -> Reply
where
    T: serde::Serialize + Send + 'static,
    F: FnOnce(&SessionStore) -> Result<T, SessionError> + Send + 'static,
{
    let out = tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| SessionError::Storage(format!("worker panicked: {e}")))??;
    Ok(Json(out).into_response())
}

async fn create(State(store): State<Store>, payload: Result<Json<CreateSession>, JsonRejection>) -> Reply {
    let req = body(payload)?;
    let mut resp = blocking(store, move |s| s.create(req)).await?;
    *resp.status_mut() = StatusCode::CREATED;
    Ok(resp)
}

async fn get_session(State(store): State<Store>, Path(id): Path<String>) -> Reply {
    blocking(store, move |s| s.get(&id)).await
}

async fn turn(
    State(store): State<Store>,
    Path(id): Path<String>,
    payload: Result<Json<TurnInput>, JsonRejection>,
) -> Reply {
    let input = body(payload)?;
    blocking(store, move |s| s.post_turn(&id, input)).await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingInput {
    level: i64,
}

async fn rating(
    State(store): State<Store>,
    Path(id): Path<String>,
    payload: Result<Json<RatingInput>, JsonRejection>,
) -> Reply {
    let input = body(payload)?;
    blocking(store, move |s| s.post_rating(&id, input.level)).await
}

async fn close(State(store): State<Store>, Path(id): Path<String>) -> Reply {
    blocking(store, move |s| s.close(&id)).await
}

async fn runs(State(store): State<Store>) -> Reply {
    blocking(store, |s| s.runs()).await
}

async fn scenarios(State(store): State<Store>) -> Reply {
    blocking(store, |s| Ok(s.scenario_ids())).await
}

#[derive(Deserialize)]
struct CorrelationQuery {
    session_id: Option<String>,
}

async fn correlation(State(store): State<Store>, Query(q): Query<CorrelationQuery>) -> Reply {
    blocking(store, move |s| s.rating_correlation(q.session_id.as_deref())).await
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

/// All routes; `/ui` serves `ui_dir` when given.
pub fn router(store: Store, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/turn", post(turn))
        .route("/sessions/{id}/rating", post(rating))
        .route("/sessions/{id}/close", post(close))
        .route("/runs", get(runs))
        .route("/scenarios", get(scenarios))
        .route("/ratings/correlation", get(correlation))
        .route("/healthz", get(healthz))
        .with_state(store);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, app: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
