use alloc::string::String;

/// Errors produced by the arithmetic layer, the cryptosystem and the codec.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("modulus must be non-zero")]
    ModulusZero,
    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("plaintext must be smaller than p")]
    PlaintextRange,
    #[error("randomness out of range: {0}")]
    RandomnessRange(String),
    #[error("key fingerprint mismatch")]
    KeyMismatch,
    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),
    #[error("ciphertexts were produced with different ephemeral keys")]
    EphemeralMismatch,
    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("p is too small to carry a whole byte per block")]
    CapacityZero,
    #[error("corrupt block stream: {0}")]
    Corruption(String),
}

pub type Result<T> = core::result::Result<T, Error>;
