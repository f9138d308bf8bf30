//! The two-layer cryptosystem: an inner blinding `E1(M) = (M + r*p) mod N`
//! wrapped in an ElGamal-style pair `(g^k, y^k * E1(M)) mod p`.
//!
//! The scheme is secret-key: encrypting requires p, q and N, so a
//! [`KeySet`] never leaves its owner. Evaluators receive an
//! [`EvalContext`] (p plus the key fingerprint) and can multiply
//! ciphertexts, add ciphertexts that share an ephemeral exponent, and
//! scale by a plaintext constant.

mod cipher;
mod encoding;
mod homomorphic;
mod keys;

pub use cipher::{decrypt, e1_encrypt, eg_encrypt, encrypt_with, Ciphertext, Nonce};
pub use encoding::{
    decode_magnitude, deserialize_ct, deserialize_ctx, deserialize_key, encode_magnitude,
    serialize_ct, serialize_ctx, serialize_key, CiphertextBlob, CTX_HEADER, CT_HEADER_LEN,
    CT_MAGIC, KEY_HEADER,
};
pub use homomorphic::{hom_add_samek, hom_mul, hom_scalar_mul, rerandomize, rerandomize_with};
pub use keys::{keygen, EvalContext, Fingerprint, KeySet, PublicParams, FINGERPRINT_LEN};

/// Default bit length of p for real use.
pub const DEFAULT_BITS_P: u64 = 256;
/// Default bit length of q for real use.
pub const DEFAULT_BITS_Q: u64 = 256;
