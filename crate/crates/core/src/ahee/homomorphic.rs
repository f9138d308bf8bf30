//! Operations on ciphertexts that never touch the secret exponent.

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

use super::cipher::Ciphertext;
use super::keys::{EvalContext, PublicParams};
use crate::error::{Error, Result};
use crate::modmath::random_in_range;

fn check(c: &Ciphertext, ctx: &EvalContext) -> Result<()> {
    if c.fingerprint != ctx.fingerprint() {
        return Err(Error::KeyMismatch);
    }
    c.check_range(ctx.p())
}

/// `(a1*a2, b1*b2) mod p`, decrypting to `M1*M2 mod p`.
pub fn hom_mul(c1: &Ciphertext, c2: &Ciphertext, ctx: &EvalContext) -> Result<Ciphertext> {
    check(c1, ctx)?;
    check(c2, ctx)?;
    let p = ctx.p();
    Ok(Ciphertext {
        a: &c1.a * &c2.a % p,
        b: &c1.b * &c2.b % p,
        fingerprint: c1.fingerprint,
    })
}

/// Addition for two ciphertexts sharing the same ephemeral k (equal `a`).
/// Decrypts to `(M1 + M2) mod p`.
pub fn hom_add_samek(c1: &Ciphertext, c2: &Ciphertext, ctx: &EvalContext) -> Result<Ciphertext> {
    check(c1, ctx)?;
    check(c2, ctx)?;
    if c1.a != c2.a {
        return Err(Error::EphemeralMismatch);
    }
    Ok(Ciphertext {
        a: c1.a.clone(),
        b: (&c1.b + &c2.b) % ctx.p(),
        fingerprint: c1.fingerprint,
    })
}

/// `(a, s*b mod p)`, decrypting to `s*M mod p`.
pub fn hom_scalar_mul(c: &Ciphertext, s: &BigUint, ctx: &EvalContext) -> Result<Ciphertext> {
    check(c, ctx)?;
    Ok(Ciphertext {
        a: c.a.clone(),
        b: s * &c.b % ctx.p(),
        fingerprint: c.fingerprint,
    })
}

/// Multiplies in a fresh encryption of 1 under exponent `k2` (in [1, p-1]).
pub fn rerandomize_with(c: &Ciphertext, params: &PublicParams, k2: &BigUint) -> Result<Ciphertext> {
    if c.fingerprint != params.fingerprint {
        return Err(Error::KeyMismatch);
    }
    let p = &params.p;
    c.check_range(p)?;
    if *k2 < BigUint::one() || k2 >= p {
        return Err(Error::RandomnessRange("k' must lie in [1, p-1]".into()));
    }
    Ok(Ciphertext {
        a: &c.a * params.g.modpow(k2, p) % p,
        b: &c.b * params.y.modpow(k2, p) % p,
        fingerprint: c.fingerprint,
    })
}

/// Re-randomizes with k' uniform in [1, p-2].
pub fn rerandomize<R: RngCore + ?Sized>(
    c: &Ciphertext,
    params: &PublicParams,
    rng: &mut R,
) -> Result<Ciphertext> {
    let k2 = random_in_range(rng, &BigUint::one(), &(&params.p - 2u32));
    rerandomize_with(c, params, &k2)
}
