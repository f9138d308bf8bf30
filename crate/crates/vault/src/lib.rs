//! Client-side vault and storage service built on `ahee-core`.
//!
//! Files are encoded into blocks, AHEE-encrypted, optionally wrapped in an
//! outer layer and handed to a [`storage::BlobStore`]. The store never sees
//! plaintext or the private exponent; it can multiply ciphertexts it holds.

pub mod cli;
pub mod error;
pub mod http_client;
pub mod manifest;
pub mod outer;
pub mod storage;
pub mod store;
pub mod vault;
pub mod wire;

pub use error::{Result, VaultError};
