use ahee_core::ahee::EvalContext;

use crate::error::Result;

/// What the vault needs from a storage backend, scoped to one logged-in user.
pub trait BlobStore {
    /// Stores `blob`, returning its content address.
    fn upload(&self, blob: &[u8]) -> Result<String>;
    fn download(&self, object_id: &str) -> Result<Vec<u8>>;
    /// Asks the backend to multiply two stored ciphertext objects pairwise.
    fn compute_mul(&self, id1: &str, id2: &str, ctx: &EvalContext) -> Result<String>;
}

impl<T: BlobStore + ?Sized> BlobStore for &T {
    fn upload(&self, blob: &[u8]) -> Result<String> {
        (**self).upload(blob)
    }

    fn download(&self, object_id: &str) -> Result<Vec<u8>> {
        (**self).download(object_id)
    }

    fn compute_mul(&self, id1: &str, id2: &str, ctx: &EvalContext) -> Result<String> {
        (**self).compute_mul(id1, id2, ctx)
    }
}
