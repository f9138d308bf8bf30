use alloc::format;
use alloc::string::String;
use core::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::modmath::{
    find_primitive_root, gen_prime, gen_safe_prime, is_primitive_root, is_probable_prime,
    mod_pow, random_in_range, SafePrime, MR_ROUNDS,
};

pub const FINGERPRINT_LEN: usize = 16;

/// Truncated SHA-256 over the canonical encoding of (p, N, g, y).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub [u8; FINGERPRINT_LEN]);

impl Fingerprint {
    pub fn compute(p: &BigUint, n: &BigUint, g: &BigUint, y: &BigUint) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"AHEE-FP-v1");
        for v in [p, n, g, y] {
            let bytes = v.to_bytes_be();
            hasher.update((bytes.len() as u32).to_be_bytes());
            hasher.update(&bytes);
        }
        let digest = hasher.finalize();
        let mut out = [0u8; FINGERPRINT_LEN];
        out.copy_from_slice(&digest[..FINGERPRINT_LEN]);
        Fingerprint(out)
    }

    pub fn as_bytes(&self) -> &[u8; FINGERPRINT_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        use core::fmt::Write;
        let mut s = String::with_capacity(FINGERPRINT_LEN * 2);
        for byte in self.0 {
            let _ = write!(s, "{byte:02x}");
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != FINGERPRINT_LEN * 2 || !s.is_ascii() {
            return Err(Error::MalformedEncoding(format!("bad fingerprint {s:?}")));
        }
        let mut out = [0u8; FINGERPRINT_LEN];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::MalformedEncoding(format!("bad fingerprint {s:?}")))?;
        }
        Ok(Fingerprint(out))
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", self.to_hex())
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// The complete secret key material. Encryption needs p, q and N as well as
/// g and y, so the whole set stays with the client.
#[derive(Clone, PartialEq, Eq)]
pub struct KeySet {
    p: SafePrime,
    q: BigUint,
    n: BigUint,
    g: BigUint,
    x: BigUint,
    y: BigUint,
    fingerprint: Fingerprint,
}

impl fmt::Debug for KeySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeySet")
            .field("bits_p", &self.bits_p())
            .field("bits_q", &self.bits_q())
            .field("fingerprint", &self.fingerprint)
            .finish_non_exhaustive()
    }
}

/// Generates a fresh key set: safe prime p, prime q != p, the smallest
/// primitive root g of p, x uniform in [1, p-2] and y = g^x mod p.
///
/// Draw order from `rng` is p, then q, then x, so a seeded source
/// reproduces the same key.
pub fn keygen<R: RngCore + ?Sized>(bits_p: u64, bits_q: u64, rng: &mut R) -> Result<KeySet> {
    if bits_p < 4 {
        return Err(Error::Parameter(format!("bits_p must be >= 4, got {bits_p}")));
    }
    if bits_q < 2 {
        return Err(Error::Parameter(format!("bits_q must be >= 2, got {bits_q}")));
    }
    let p = gen_safe_prime(bits_p, rng)?;
    let q = loop {
        let q = gen_prime(bits_q, rng)?;
        if q != *p.p() {
            break q;
        }
    };
    let g = find_primitive_root(&p);
    let x = random_in_range(rng, &BigUint::one(), &(p.p() - 2u32));
    KeySet::assemble(p, q, g, x)
}

impl KeySet {
    /// Builds a key from chosen parameters, validating every invariant.
    pub fn from_parts(p: BigUint, q: BigUint, g: BigUint, x: BigUint) -> Result<Self> {
        let p = SafePrime::new(p)?;
        if !is_probable_prime(&q, MR_ROUNDS) {
            return Err(Error::Parameter(format!("q = {q} is not prime")));
        }
        if q == *p.p() {
            return Err(Error::Parameter("p and q must differ".into()));
        }
        if !is_primitive_root(&g, &p) {
            return Err(Error::Parameter(format!("g = {g} is not a primitive root mod p")));
        }
        let x_max = p.p() - 2u32;
        if x < BigUint::one() || x > x_max {
            return Err(Error::Parameter("x must lie in [1, p-2]".into()));
        }
        KeySet::assemble(p, q, g, x)
    }

    fn assemble(p: SafePrime, q: BigUint, g: BigUint, x: BigUint) -> Result<Self> {
        let n = p.p() * &q;
        let y = mod_pow(&g, &x, p.p())?;
        let fingerprint = Fingerprint::compute(p.p(), &n, &g, &y);
        Ok(KeySet { p, q, n, g, x, y, fingerprint })
    }

    pub fn p(&self) -> &BigUint {
        self.p.p()
    }

    pub fn safe_prime(&self) -> &SafePrime {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// N = p * q
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// Secret exponent.
    pub fn x(&self) -> &BigUint {
        &self.x
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }

    pub fn bits_p(&self) -> u64 {
        self.p.p().bits()
    }

    pub fn bits_q(&self) -> u64 {
        self.q.bits()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// The modulus handed to a party allowed to combine ciphertexts.
    pub fn eval_context(&self) -> EvalContext {
        EvalContext { p: self.p().clone(), fingerprint: self.fingerprint }
    }

    pub fn public_params(&self) -> PublicParams {
        PublicParams {
            p: self.p().clone(),
            g: self.g.clone(),
            y: self.y.clone(),
            fingerprint: self.fingerprint,
        }
    }
}

/// The modulus p disclosed to an evaluator, tagged with the key fingerprint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalContext {
    p: BigUint,
    fingerprint: Fingerprint,
}

impl EvalContext {
    /// Context received from elsewhere (e.g. over the wire). Only the shape
    /// of p is checked; the fingerprint cannot be re-derived without N, g, y.
    pub fn new(p: BigUint, fingerprint: Fingerprint) -> Result<Self> {
        if p < BigUint::from(5u32) {
            return Err(Error::Parameter("evaluation modulus must be at least 5".into()));
        }
        Ok(EvalContext { p, fingerprint })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }
}

/// (p, g, y): enough to re-randomize a ciphertext, not to decrypt it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub(crate) p: BigUint,
    pub(crate) g: BigUint,
    pub(crate) y: BigUint,
    pub(crate) fingerprint: Fingerprint,
}

impl PublicParams {
    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn toy_key_from_parts() {
        let key = KeySet::from_parts(big(7), big(11), big(3), big(4)).unwrap();
        assert_eq!(*key.n(), big(77));
        assert_eq!(*key.y(), big(4));
        assert_eq!(key.bits_p(), 3);
        assert_eq!(key.bits_q(), 4);
    }

    #[test]
    fn from_parts_rejects_bad_parameters() {
        // 13 is prime but not safe
        assert!(KeySet::from_parts(big(13), big(11), big(2), big(4)).is_err());
        assert!(KeySet::from_parts(big(7), big(12), big(3), big(4)).is_err());
        assert!(KeySet::from_parts(big(7), big(7), big(3), big(4)).is_err());
        // 2 has order 3 mod 7
        assert!(KeySet::from_parts(big(7), big(11), big(2), big(4)).is_err());
        assert!(KeySet::from_parts(big(7), big(11), big(3), big(0)).is_err());
        assert!(KeySet::from_parts(big(7), big(11), big(3), big(6)).is_err());
    }

    #[test]
    fn keygen_invariants_and_determinism() {
        let a = keygen(16, 16, &mut ChaCha20Rng::seed_from_u64(42)).unwrap();
        let b = keygen(16, 16, &mut ChaCha20Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits_p(), 16);
        assert_eq!(a.bits_q(), 16);
        assert_eq!(mod_pow(a.g(), a.x(), a.p()).unwrap(), *a.y());
        assert_eq!(a.p() * a.q(), *a.n());
        assert_ne!(a.p(), a.q());
        assert!(is_primitive_root(a.g(), a.safe_prime()));
    }

    #[test]
    fn keygen_minimums() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(matches!(keygen(3, 16, &mut rng), Err(Error::Parameter(_))));
        assert!(matches!(keygen(16, 1, &mut rng), Err(Error::Parameter(_))));
        let tiny = keygen(4, 2, &mut rng).unwrap();
        assert_eq!(*tiny.p(), big(11));
    }

    #[test]
    fn fingerprint_hex_round_trip() {
        let key = KeySet::from_parts(big(7), big(11), big(3), big(4)).unwrap();
        let fp = key.fingerprint();
        assert_eq!(Fingerprint::from_hex(&fp.to_hex()).unwrap(), fp);
        assert!(Fingerprint::from_hex("abc").is_err());
        let other = KeySet::from_parts(big(7), big(13), big(3), big(4)).unwrap();
        assert_ne!(other.fingerprint(), fp);
    }
}
