use std::sync::Arc;

use ahee_core::ahee::{decode_magnitude, EvalContext, Fingerprint};
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use tokio::net::TcpListener;

use super::{Store, StoreError};
use crate::wire::{ComputeMulRequest, Credentials, ErrorBody, LoginResponse, ObjectIdResponse, RegisterResponse};

impl IntoResponse for StoreError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

type Shared = State<Arc<Store>>;

/// Runs blocking store work (hashing, file IO) off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, StoreError> + Send + 'static,
) -> Result<T, StoreError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| StoreError::Journal(format!("worker panicked: {e}")))?
}

fn bearer(headers: &HeaderMap) -> Result<String, StoreError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_owned())
        .ok_or(StoreError::Auth)
}

async fn register(State(store): Shared, Json(creds): Json<Credentials>) -> Result<impl IntoResponse, StoreError> {
    let account = blocking(move || store.register(&creds.username, &creds.password)).await?;
    Ok((
        StatusCode::CREATED,
        Json(RegisterResponse { username: account.username, created_at: account.created_at }),
    ))
}

async fn login(State(store): Shared, Json(creds): Json<Credentials>) -> Result<impl IntoResponse, StoreError> {
    let session = blocking(move || store.login(&creds.username, &creds.password)).await?;
    Ok(Json(LoginResponse { token: session.token, expires_at: session.expires_at }))
}

async fn upload(State(store): Shared, headers: HeaderMap, body: Bytes) -> Result<impl IntoResponse, StoreError> {
    let user = store.authenticate(&bearer(&headers)?)?;
    let object_id = blocking(move || store.upload(&user, &body)).await?;
    Ok((StatusCode::CREATED, Json(ObjectIdResponse { object_id })))
}

async fn download(
    State(store): Shared,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, StoreError> {
    let user = store.authenticate(&bearer(&headers)?)?;
    let blob = blocking(move || store.download(&user, &id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], blob))
}

async fn compute_mul(
    State(store): Shared,
    headers: HeaderMap,
    Json(req): Json<ComputeMulRequest>,
) -> Result<impl IntoResponse, StoreError> {
    let user = store.authenticate(&bearer(&headers)?)?;
    let bad = |e: ahee_core::Error| StoreError::Unprocessable(e.to_string());
    let p = decode_magnitude(&req.p).map_err(bad)?;
    let fingerprint = Fingerprint::from_hex(&req.fingerprint).map_err(bad)?;
    let ctx = EvalContext::new(p, fingerprint).map_err(bad)?;
    let object_id = blocking(move || store.compute_mul(&user, &req.id1, &req.id2, &ctx)).await?;
    Ok((StatusCode::CREATED, Json(ObjectIdResponse { object_id })))
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(store: Arc<Store>) -> Router {
    let limit = store.config().max_body_bytes;
    Router::new()
        .route("/v1/register", post(register))
        .route("/v1/login", post(login))
        .route("/v1/objects", put(upload))
        .route("/v1/objects/{id}", get(download))
        .route("/v1/compute/mul", post(compute_mul))
        .route("/v1/healthz", get(healthz))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(store)
}

pub async fn serve(listener: TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
