//! Transfer and retrieval: AHEE-encrypt, apply the outer layer, upload;
//! download, strip the outer layer, AHEE-decrypt.

use ahee_core::ahee::{decrypt, deserialize_ct, encrypt_with, serialize_ct, Ciphertext, EvalContext, KeySet, Nonce};
use ahee_core::codec::{block_capacity, block_count, decode, encode, BlockStream};
use ahee_core::BigUint;
use chrono::Utc;
use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Result, VaultError};
use crate::manifest::{Manifest, ManifestStore};
use crate::outer::OuterLayer;
use crate::storage::BlobStore;
use crate::wire::object_id_of;

/// Encrypts every block. Randomness is drawn sequentially from `rng`
/// (k then r per block) so output is reproducible under a seeded source;
/// the modular exponentiations then run in parallel.
pub fn encrypt_blocks<R: RngCore + ?Sized>(blocks: &[BigUint], key: &KeySet, rng: &mut R) -> Result<Vec<Ciphertext>> {
    let nonces: Vec<Nonce> = blocks.iter().map(|_| Nonce::draw(key, rng)).collect();
    blocks
        .par_iter()
        .zip(nonces.par_iter())
        .map(|(m, n)| encrypt_with(m, key, n).map_err(VaultError::from))
        .collect()
}

pub fn decrypt_blocks(cts: &[Ciphertext], key: &KeySet) -> Result<Vec<BigUint>> {
    cts.par_iter().map(|c| decrypt(c, key).map_err(VaultError::from)).collect()
}

/// Encodes and encrypts `data` into a ciphertext blob (before any outer layer).
pub fn seal<R: RngCore + ?Sized>(data: &[u8], key: &KeySet, rng: &mut R) -> Result<(BlockStream, Vec<Ciphertext>, Vec<u8>)> {
    let stream = encode(data, key.p())?;
    let cts = encrypt_blocks(&stream.blocks, key, rng)?;
    let blob = serialize_ct(&cts, &key.eval_context())?;
    Ok((stream, cts, blob))
}

/// Checks a manifest against the key before anything is downloaded.
fn check_manifest(m: &Manifest, key: &KeySet, layer: &dyn OuterLayer) -> Result<()> {
    if m.fingerprint != key.fingerprint().to_hex() {
        return Err(VaultError::KeyMismatch);
    }
    if m.outer_layer != layer.id() {
        return Err(VaultError::LayerMismatch { expected: m.outer_layer.clone(), actual: layer.id().to_owned() });
    }
    if m.block_bytes != block_capacity(key.p()) {
        return Err(VaultError::Integrity(format!(
            "manifest block size {} does not match key capacity {}",
            m.block_bytes,
            block_capacity(key.p())
        )));
    }
    Ok(())
}

/// Inverts [`seal`] for a blob already stripped of its outer layer.
pub fn open_blob(blob: &[u8], m: &Manifest, key: &KeySet) -> Result<Vec<u8>> {
    let blocks = open_blocks(blob, m, key)?;
    Ok(decode(&BlockStream { blocks, byte_len: m.byte_len, block_bytes: m.block_bytes })?)
}

/// Decrypts a blob to its raw block values without byte decoding; used for
/// objects produced by server-side computation.
pub fn open_blocks(blob: &[u8], m: &Manifest, key: &KeySet) -> Result<Vec<BigUint>> {
    let parsed = deserialize_ct(blob)?;
    if parsed.fingerprint != key.fingerprint() {
        return Err(VaultError::KeyMismatch);
    }
    if parsed.pairs.len() as u64 != block_count(m.byte_len, m.block_bytes) {
        return Err(VaultError::Integrity(format!(
            "blob holds {} pairs, manifest expects {}",
            parsed.pairs.len(),
            m.pair_count()
        )));
    }
    decrypt_blocks(&parsed.pairs, key)
}

/// Transfer phase. Plaintext never leaves this function; only the sealed,
/// outer-layered blob is handed to `store`. The manifest is persisted before
/// it is returned.
pub fn vault_put<R: RngCore + ?Sized>(
    data: &[u8],
    key: &KeySet,
    layer: &dyn OuterLayer,
    store: &dyn BlobStore,
    manifests: &ManifestStore,
    label: &str,
    rng: &mut R,
) -> Result<Manifest> {
    let (stream, _, blob) = seal(data, key, rng)?;
    let uploaded = layer.transform(&blob);
    let expected_id = object_id_of(&uploaded);
    let object_id = store.upload(&uploaded)?;
    if object_id != expected_id {
        return Err(VaultError::Integrity(format!(
            "server named the object {object_id}, expected {expected_id}"
        )));
    }
    let manifest = Manifest {
        object_id,
        byte_len: stream.byte_len,
        block_bytes: stream.block_bytes,
        fingerprint: key.fingerprint().to_hex(),
        outer_layer: layer.id().to_owned(),
        created_at: Utc::now(),
        label: label.to_owned(),
    };
    manifests.save(&manifest)?;
    Ok(manifest)
}

/// Downloads and checks the content address, then strips the outer layer.
fn fetch(m: &Manifest, key: &KeySet, layer: &dyn OuterLayer, store: &dyn BlobStore) -> Result<Vec<u8>> {
    check_manifest(m, key, layer)?;
    let downloaded = store.download(&m.object_id)?;
    let actual = object_id_of(&downloaded);
    if actual != m.object_id {
        return Err(VaultError::Integrity(format!(
            "downloaded blob hashes to {actual}, manifest says {}",
            m.object_id
        )));
    }
    Ok(layer.inverse(&downloaded))
}

/// Retrieval phase: returns exactly the bytes given to [`vault_put`].
pub fn vault_get(m: &Manifest, key: &KeySet, layer: &dyn OuterLayer, store: &dyn BlobStore) -> Result<Vec<u8>> {
    let blob = fetch(m, key, layer, store)?;
    open_blob(&blob, m, key)
}

/// Retrieval without byte decoding.
pub fn vault_get_blocks(m: &Manifest, key: &KeySet, layer: &dyn OuterLayer, store: &dyn BlobStore) -> Result<Vec<BigUint>> {
    let blob = fetch(m, key, layer, store)?;
    open_blocks(&blob, m, key)
}

/// Asks the server to multiply two stored objects and records a manifest
/// for the product, modelled on the first operand's. Only objects stored
/// with the identity layer can be combined.
pub fn vault_hmul(
    m1: &Manifest,
    m2: &Manifest,
    ctx: &EvalContext,
    store: &dyn BlobStore,
    manifests: &ManifestStore,
) -> Result<Manifest> {
    let fp = ctx.fingerprint().to_hex();
    if m1.fingerprint != fp || m2.fingerprint != fp {
        return Err(VaultError::KeyMismatch);
    }
    for m in [m1, m2] {
        if m.outer_layer != crate::outer::Identity::ID {
            return Err(VaultError::LayerMismatch {
                expected: crate::outer::Identity::ID.into(),
                actual: m.outer_layer.clone(),
            });
        }
    }
    if m1.pair_count() != m2.pair_count() {
        return Err(VaultError::Integrity(format!(
            "operands hold {} and {} pairs",
            m1.pair_count(),
            m2.pair_count()
        )));
    }
    let object_id = store.compute_mul(&m1.object_id, &m2.object_id, ctx)?;
    let manifest = Manifest {
        object_id,
        created_at: Utc::now(),
        label: format!("mul({}, {})", m1.label, m2.label),
        ..m1.clone()
    };
    manifests.save(&manifest)?;
    Ok(manifest)
}
