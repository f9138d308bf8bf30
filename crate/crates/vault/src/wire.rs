//! JSON bodies exchanged between the vault client and the store service.
//!
//! None of these carry key material beyond the evaluation modulus p; the
//! secret exponent x and the factor q never go over the wire.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Credentials {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegisterResponse {
    pub username: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectIdResponse {
    pub object_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComputeMulRequest {
    pub id1: String,
    pub id2: String,
    /// base64url big-endian modulus
    pub p: String,
    /// hex key fingerprint
    pub fingerprint: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

/// Content address of a blob: hex SHA-256.
pub fn object_id_of(blob: &[u8]) -> String {
    hex::encode(Sha256::digest(blob))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn object_id_is_sha256_hex() {
        assert_eq!(
            object_id_of(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
