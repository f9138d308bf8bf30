use std::io;

/// Client-side failures of the vault.
#[derive(Debug, thiserror::Error)]
pub enum VaultError {
    #[error(transparent)]
    Crypto(#[from] ahee_core::Error),
    #[error("manifest was produced under a different key")]
    KeyMismatch,
    #[error("manifest expects outer layer {expected:?}, got {actual:?}")]
    LayerMismatch { expected: String, actual: String },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("unknown outer layer {0:?}")]
    UnknownLayer(String),
    #[error("no manifest for object {0}")]
    ManifestMissing(String),
    #[error("corrupt manifest {path}: {reason}")]
    ManifestCorrupt { path: String, reason: String },
    #[error("authentication failed")]
    Auth,
    #[error("access to object denied")]
    Forbidden,
    #[error("not found: {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("request rejected by server: {0}")]
    Rejected(String),
    #[error("storage unavailable: {0}")]
    Network(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl VaultError {
    /// CLI exit status: 3 for crypto/integrity, 4 for network/auth, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            VaultError::Crypto(_)
            | VaultError::KeyMismatch
            | VaultError::LayerMismatch { .. }
            | VaultError::Integrity(_) => 3,
            VaultError::Auth
            | VaultError::Forbidden
            | VaultError::NotFound(_)
            | VaultError::Conflict(_)
            | VaultError::Rejected(_)
            | VaultError::Network(_) => 4,
            VaultError::UnknownLayer(_)
            | VaultError::ManifestMissing(_)
            | VaultError::ManifestCorrupt { .. }
            | VaultError::Io(_) => 1,
        }
    }
}

pub type Result<T, E = VaultError> = std::result::Result<T, E>;
