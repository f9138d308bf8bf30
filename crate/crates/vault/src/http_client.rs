//! Blocking HTTP client for the store service.

use ahee_core::ahee::{encode_magnitude, EvalContext};
use serde::de::DeserializeOwned;
use serde::Serialize;
use ureq::http::Response;
use ureq::{Agent, Body};

use crate::error::{Result, VaultError};
use crate::storage::BlobStore;
use crate::wire::{ComputeMulRequest, Credentials, ErrorBody, LoginResponse, ObjectIdResponse, RegisterResponse};

fn agent() -> Agent {
    Agent::config_builder().http_status_as_error(false).build().into()
}

fn network(e: ureq::Error) -> VaultError {
    VaultError::Network(e.to_string())
}

/// Maps non-2xx responses onto vault errors.
fn check(mut resp: Response<Body>) -> Result<Response<Body>> {
    let status = resp.status().as_u16();
    if (200..300).contains(&status) {
        return Ok(resp);
    }
    let detail = resp
        .body_mut()
        .read_json::<ErrorBody>()
        .map(|b| b.error)
        .unwrap_or_else(|_| format!("HTTP {status}"));
    Err(match status {
        401 => VaultError::Auth,
        403 => VaultError::Forbidden,
        404 => VaultError::NotFound(detail),
        409 => VaultError::Conflict(detail),
        400 | 422 => VaultError::Rejected(detail),
        _ => VaultError::Network(format!("HTTP {status}: {detail}")),
    })
}

fn json<T: DeserializeOwned>(mut resp: Response<Body>) -> Result<T> {
    resp.body_mut().read_json().map_err(network)
}

fn post_json<B: Serialize, T: DeserializeOwned>(agent: &Agent, url: &str, token: Option<&str>, body: &B) -> Result<T> {
    let mut req = agent.post(url);
    if let Some(t) = token {
        req = req.header("Authorization", &format!("Bearer {t}"));
    }
    json(check(req.send_json(body).map_err(network)?)?)
}

/// Creates an account on the server at `base` (e.g. `http://127.0.0.1:8700`).
pub fn register(base: &str, username: &str, password: &str) -> Result<RegisterResponse> {
    let creds = Credentials { username: username.into(), password: password.into() };
    post_json(&agent(), &format!("{}/v1/register", base.trim_end_matches('/')), None, &creds)
}

/// A logged-in session against the store service.
pub struct HttpStore {
    base: String,
    agent: Agent,
    session: LoginResponse,
}

impl HttpStore {
    pub fn login(base: &str, username: &str, password: &str) -> Result<Self> {
        let agent = agent();
        let base = base.trim_end_matches('/').to_owned();
        let creds = Credentials { username: username.into(), password: password.into() };
        let session = post_json(&agent, &format!("{base}/v1/login"), None, &creds)?;
        Ok(HttpStore { base, agent, session })
    }

    pub fn session(&self) -> &LoginResponse {
        &self.session
    }

    fn auth(&self) -> String {
        format!("Bearer {}", self.session.token)
    }

    pub fn healthz(base: &str) -> Result<()> {
        check(agent().get(format!("{}/v1/healthz", base.trim_end_matches('/'))).call().map_err(network)?)?;
        Ok(())
    }
}

impl BlobStore for HttpStore {
    fn upload(&self, blob: &[u8]) -> Result<String> {
        let resp = self
            .agent
            .put(format!("{}/v1/objects", self.base))
            .header("Authorization", &self.auth())
            .header("Content-Type", "application/octet-stream")
            .send(blob)
            .map_err(network)?;
        Ok(json::<ObjectIdResponse>(check(resp)?)?.object_id)
    }

    fn download(&self, object_id: &str) -> Result<Vec<u8>> {
        let resp = self
            .agent
            .get(format!("{}/v1/objects/{object_id}", self.base))
            .header("Authorization", &self.auth())
            .call()
            .map_err(network)?;
        check(resp)?
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_vec()
            .map_err(network)
    }

    fn compute_mul(&self, id1: &str, id2: &str, ctx: &EvalContext) -> Result<String> {
        let req = ComputeMulRequest {
            id1: id1.into(),
            id2: id2.into(),
            p: encode_magnitude(ctx.p()),
            fingerprint: ctx.fingerprint().to_hex(),
        };
        let resp: ObjectIdResponse =
            post_json(&self.agent, &format!("{}/v1/compute/mul", self.base), Some(&self.session.token), &req)?;
        Ok(resp.object_id)
    }
}
