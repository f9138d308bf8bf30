use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;

use super::keys::{Fingerprint, KeySet};
use crate::error::{Error, Result};
use crate::modmath::{mod_inv, random_in_range};

/// One AHEE pair `(a, b) = (g^k, y^k * E1(M)) mod p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub a: BigUint,
    pub b: BigUint,
    pub fingerprint: Fingerprint,
}

impl Ciphertext {
    pub fn new(a: BigUint, b: BigUint, fingerprint: Fingerprint) -> Self {
        Ciphertext { a, b, fingerprint }
    }

    /// Checks 1 <= a < p and b < p.
    pub(crate) fn check_range(&self, p: &BigUint) -> Result<()> {
        if self.a.is_zero() || self.a >= *p {
            return Err(Error::MalformedCiphertext("a must lie in [1, p-1]".into()));
        }
        if self.b >= *p {
            return Err(Error::MalformedCiphertext("b must be below p".into()));
        }
        Ok(())
    }
}

/// Per-encryption randomness: the ephemeral exponent k and blinding factor r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nonce {
    pub k: BigUint,
    pub r: BigUint,
}

impl Nonce {
    /// k uniform in [1, p-2], then r uniform in [1, q-1].
    pub fn draw<R: RngCore + ?Sized>(key: &KeySet, rng: &mut R) -> Self {
        let one = BigUint::one();
        let k = random_in_range(rng, &one, &(key.p() - 2u32));
        let r = random_in_range(rng, &one, &(key.q() - 1u32));
        Nonce { k, r }
    }
}

fn check_plaintext(m: &BigUint, key: &KeySet) -> Result<()> {
    if m >= key.p() {
        return Err(Error::PlaintextRange);
    }
    Ok(())
}

/// Inner blinding layer: `(M + r*p) mod N`, which stays congruent to M mod p.
pub fn e1_encrypt(m: &BigUint, key: &KeySet, r: &BigUint) -> Result<BigUint> {
    check_plaintext(m, key)?;
    if r.is_zero() || *r >= *key.q() {
        return Err(Error::RandomnessRange("r must lie in [1, q-1]".into()));
    }
    Ok((m + r * key.p()) % key.n())
}

/// Full encryption with caller-chosen randomness. k may be anything in
/// [1, p-1]; k = p-1 is legal but degenerate (a = 1).
pub fn encrypt_with(m: &BigUint, key: &KeySet, nonce: &Nonce) -> Result<Ciphertext> {
    check_plaintext(m, key)?;
    if nonce.k.is_zero() || nonce.k >= *key.p() {
        return Err(Error::RandomnessRange("k must lie in [1, p-1]".into()));
    }
    let inner = e1_encrypt(m, key, &nonce.r)?;
    let p = key.p();
    let a = key.g().modpow(&nonce.k, p);
    let b = key.y().modpow(&nonce.k, p) * inner % p;
    Ok(Ciphertext { a, b, fingerprint: key.fingerprint() })
}

/// Encrypts `m < p` with fresh k and r drawn from `rng`.
pub fn eg_encrypt<R: RngCore + ?Sized>(m: &BigUint, key: &KeySet, rng: &mut R) -> Result<Ciphertext> {
    check_plaintext(m, key)?;
    let nonce = Nonce::draw(key, rng);
    encrypt_with(m, key, &nonce)
}

/// `b * (a^x)^-1 mod p`
pub fn decrypt(c: &Ciphertext, key: &KeySet) -> Result<BigUint> {
    if c.fingerprint != key.fingerprint() {
        return Err(Error::KeyMismatch);
    }
    let p = key.p();
    c.check_range(p)?;
    let shared = c.a.modpow(key.x(), p);
    let unmask = mod_inv(&shared, p).map_err(|_| Error::MalformedCiphertext("a is not invertible".into()))?;
    Ok(&c.b * unmask % p)
}
