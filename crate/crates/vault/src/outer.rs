//! The provider-side transform applied after AHEE encryption and removed
//! before AHEE decryption.

use ahee_core::ahee::{serialize_key, KeySet};
use sha2::{Digest, Sha256};

use crate::error::{Result, VaultError};

pub trait OuterLayer: Send + Sync {
    fn id(&self) -> &str;
    fn transform(&self, data: &[u8]) -> Vec<u8>;
    fn inverse(&self, data: &[u8]) -> Vec<u8>;
}

/// Passes bytes through unchanged.
#[derive(Debug, Default, Clone, Copy)]
pub struct Identity;

impl OuterLayer for Identity {
    fn id(&self) -> &str {
        Identity::ID
    }

    fn transform(&self, data: &[u8]) -> Vec<u8> {
        data.to_vec()
    }

    fn inverse(&self, data: &[u8]) -> Vec<u8> {
        data.to_vec()
    }
}

impl Identity {
    pub const ID: &'static str = "identity";
}

/// XOR with a SHA-256 counter-mode keystream.
///
/// NOT a secure cipher: no nonce, so the same key always yields the same
/// stream. It exists to exercise the double-encryption path.
#[derive(Clone)]
pub struct XorKeystream {
    seed: [u8; 32],
}

impl XorKeystream {
    pub const ID: &'static str = "xor-keystream";

    pub fn new(seed: [u8; 32]) -> Self {
        XorKeystream { seed }
    }

    /// Seed derived from the key material, so the key file alone suffices.
    pub fn from_key(key: &KeySet) -> Self {
        let mut h = Sha256::new();
        h.update(b"ahee-xor-keystream-v1");
        h.update(serialize_key(key));
        XorKeystream { seed: h.finalize().into() }
    }

    fn apply(&self, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(data.len());
        for (counter, chunk) in data.chunks(32).enumerate() {
            let mut h = Sha256::new();
            h.update(self.seed);
            h.update((counter as u64).to_be_bytes());
            let block = h.finalize();
            out.extend(chunk.iter().zip(block.iter()).map(|(d, k)| d ^ k));
        }
        out
    }
}

impl OuterLayer for XorKeystream {
    fn id(&self) -> &str {
        XorKeystream::ID
    }

    fn transform(&self, data: &[u8]) -> Vec<u8> {
        self.apply(data)
    }

    fn inverse(&self, data: &[u8]) -> Vec<u8> {
        self.apply(data)
    }
}

/// Looks up a built-in layer by id.
pub fn layer_by_id(id: &str, key: &KeySet) -> Result<Box<dyn OuterLayer>> {
    match id {
        Identity::ID => Ok(Box::new(Identity)),
        XorKeystream::ID => Ok(Box::new(XorKeystream::from_key(key))),
        other => Err(VaultError::UnknownLayer(other.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn layers_invert(data in proptest::collection::vec(any::<u8>(), 0..2048), seed in any::<[u8; 32]>()) {
            let xor = XorKeystream::new(seed);
            prop_assert_eq!(xor.inverse(&xor.transform(&data)), data.clone());
            prop_assert_eq!(Identity.inverse(&Identity.transform(&data)), data);
        }
    }

    #[test]
    fn xor_changes_bytes() {
        let xor = XorKeystream::new([7; 32]);
        let data = vec![0u8; 100];
        assert_ne!(xor.transform(&data), data);
    }

    #[test]
    fn unknown_layer() {
        let key = KeySet::from_parts(7u32.into(), 11u32.into(), 3u32.into(), 4u32.into()).unwrap();
        assert!(layer_by_id("rot13", &key).is_err());
        assert_eq!(layer_by_id("identity", &key).unwrap().id(), "identity");
        assert_eq!(layer_by_id("xor-keystream", &key).unwrap().id(), "xor-keystream");
    }
}
