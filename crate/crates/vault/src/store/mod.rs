//! The storage service: accounts, content-addressed blobs, and a compute
//! endpoint that multiplies ciphertext objects without decrypting them.

mod compute;
mod http;
mod service;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

pub use compute::multiply_blobs;
pub use http::{router, serve};
pub use service::{Account, Lineage, LocalClient, SessionToken, Store, StoredObject, MIN_PASSWORD_LEN};

use crate::error::VaultError;

#[derive(Debug, Clone)]
pub struct StoreConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub token_ttl: Duration,
    pub pbkdf2_rounds: u32,
    pub max_body_bytes: usize,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8700)),
            data_dir: PathBuf::from("ahee-store-data"),
            token_ttl: Duration::from_secs(3600),
            pbkdf2_rounds: 600_000,
            max_body_bytes: 512 << 20,
        }
    }
}

impl StoreConfig {
    /// Reads `AHEE_STORE_LISTEN`, `AHEE_STORE_DATA_DIR`,
    /// `AHEE_STORE_TOKEN_TTL_SECS`, `AHEE_STORE_PBKDF2_ROUNDS` and
    /// `AHEE_STORE_MAX_BODY_BYTES`, falling back to the defaults.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        fn parsed<T: std::str::FromStr>(
            lookup: &impl Fn(&str) -> Option<String>,
            key: &str,
        ) -> Result<Option<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            lookup(key)
                .map(|v| v.parse::<T>().map_err(|e| format!("{key}={v:?}: {e}")))
                .transpose()
        }
        let mut cfg = StoreConfig::default();
        if let Some(v) = parsed(&lookup, "AHEE_STORE_LISTEN")? {
            cfg.listen = v;
        }
        if let Some(v) = lookup("AHEE_STORE_DATA_DIR") {
            cfg.data_dir = PathBuf::from(v);
        }
        if let Some(v) = parsed::<u64>(&lookup, "AHEE_STORE_TOKEN_TTL_SECS")? {
            cfg.token_ttl = Duration::from_secs(v);
        }
        if let Some(v) = parsed(&lookup, "AHEE_STORE_PBKDF2_ROUNDS")? {
            cfg.pbkdf2_rounds = v;
        }
        if let Some(v) = parsed(&lookup, "AHEE_STORE_MAX_BODY_BYTES")? {
            cfg.max_body_bytes = v;
        }
        if cfg.pbkdf2_rounds == 0 {
            return Err("AHEE_STORE_PBKDF2_ROUNDS must be positive".into());
        }
        Ok(cfg)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("username must not be empty")]
    EmptyUsername,
    #[error("password must be at least {MIN_PASSWORD_LEN} characters")]
    WeakPassword,
    #[error("{0}")]
    Conflict(String),
    #[error("invalid credentials or session")]
    Auth,
    #[error("object not found")]
    NotFound,
    #[error("object belongs to another account")]
    Forbidden,
    #[error("{0}")]
    Unprocessable(String),
    #[error("journal error: {0}")]
    Journal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl StoreError {
    pub fn status(&self) -> u16 {
        match self {
            StoreError::EmptyUsername | StoreError::WeakPassword => 400,
            StoreError::Auth => 401,
            StoreError::Forbidden => 403,
            StoreError::NotFound => 404,
            StoreError::Conflict(_) => 409,
            StoreError::Unprocessable(_) => 422,
            StoreError::Journal(_) | StoreError::Io(_) => 500,
        }
    }
}

impl From<StoreError> for VaultError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Auth => VaultError::Auth,
            StoreError::Forbidden => VaultError::Forbidden,
            StoreError::NotFound => VaultError::NotFound("object".into()),
            StoreError::Conflict(msg) => VaultError::Conflict(msg),
            StoreError::EmptyUsername | StoreError::WeakPassword | StoreError::Unprocessable(_) => {
                VaultError::Rejected(e.to_string())
            }
            StoreError::Journal(_) | StoreError::Io(_) => VaultError::Network(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn config_from_lookup() {
        let env: HashMap<&str, &str> = [
            ("AHEE_STORE_LISTEN", "0.0.0.0:9000"),
            ("AHEE_STORE_DATA_DIR", "/tmp/x"),
            ("AHEE_STORE_TOKEN_TTL_SECS", "60"),
        ]
        .into();
        let cfg = StoreConfig::from_lookup(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.listen.port(), 9000);
        assert_eq!(cfg.data_dir, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.token_ttl, Duration::from_secs(60));
        assert_eq!(cfg.pbkdf2_rounds, 600_000);

        let defaults = StoreConfig::from_lookup(|_| None).unwrap();
        assert_eq!(defaults.token_ttl, Duration::from_secs(3600));
        assert!(StoreConfig::from_lookup(|k| (k == "AHEE_STORE_TOKEN_TTL_SECS").then(|| "soon".into())).is_err());
    }
}
