use ahee_core::ahee::{hom_mul, serialize_ct, CiphertextBlob, EvalContext};
use ahee_core::modmath::byte_width;

use super::StoreError;

fn parse(blob: &[u8], which: &str, ctx: &EvalContext) -> Result<CiphertextBlob, StoreError> {
    let parsed = CiphertextBlob::from_bytes(blob)
        .map_err(|e| StoreError::Unprocessable(format!("{which}: {e}")))?;
    if parsed.fingerprint != ctx.fingerprint() {
        return Err(StoreError::Unprocessable(format!(
            "{which}: fingerprint {} does not match context {}",
            parsed.fingerprint,
            ctx.fingerprint()
        )));
    }
    if parsed.width as usize != byte_width(ctx.p()) {
        return Err(StoreError::Unprocessable(format!(
            "{which}: element width {} does not match p",
            parsed.width
        )));
    }
    Ok(parsed)
}

/// Pairwise homomorphic product of two ciphertext blobs.
pub fn multiply_blobs(b1: &[u8], b2: &[u8], ctx: &EvalContext) -> Result<Vec<u8>, StoreError> {
    let c1 = parse(b1, "id1", ctx)?;
    let c2 = parse(b2, "id2", ctx)?;
    if c1.pairs.len() != c2.pairs.len() {
        return Err(StoreError::Unprocessable(format!(
            "pair counts differ: {} vs {}",
            c1.pairs.len(),
            c2.pairs.len()
        )));
    }
    let product = c1
        .pairs
        .iter()
        .zip(&c2.pairs)
        .map(|(x, y)| hom_mul(x, y, ctx))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| StoreError::Unprocessable(e.to_string()))?;
    serialize_ct(&product, ctx).map_err(|e| StoreError::Unprocessable(e.to_string()))
}
