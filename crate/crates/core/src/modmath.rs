//! Modular arithmetic over arbitrary-precision naturals: exponentiation,
//! inversion, Miller–Rabin, safe-prime generation and primitive roots.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Rounds used everywhere a probable-prime decision is made.
pub const MR_ROUNDS: usize = 40;

/// Below this bound primality is decided exactly by trial division.
const TRIAL_DIVISION_LIMIT: u64 = 2048;

/// Fixed witnesses tried before hash-derived ones; deterministic for
/// n < 3.3 * 10^24 on their own.
const FIXED_WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// `base^exp mod m`.
pub fn mod_pow(base: &BigUint, exp: &BigUint, m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::ModulusZero);
    }
    Ok(base.modpow(exp, m))
}

/// Inverse of `v` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inv(v: &BigUint, m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::ModulusZero);
    }
    if m.is_one() {
        return Err(Error::Parameter("modulus must be at least 2".into()));
    }
    let modulus = BigInt::from_biguint(Sign::Plus, m.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, v % m), modulus.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let quotient = &old_r / &r;
        let next_r = &old_r - &quotient * &r;
        old_r = core::mem::replace(&mut r, next_r);
        let next_s = &old_s - &quotient * &s;
        old_s = core::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(Error::NotInvertible);
    }
    // mod_floor keeps the result in [0, m)
    Ok(old_s
        .mod_floor(&modulus)
        .to_biguint()
        .expect("mod_floor by a positive modulus is non-negative"))
}

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = alloc::vec![false; n];
    let mut primes = Vec::new();
    for i in 2..n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn is_prime_small(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Witness `i` for candidate `n` (n > 4): fixed small bases first, then
/// bases derived by hashing `n` with the round index so the test stays a
/// pure function of its input.
fn witness(n: &BigUint, i: usize) -> BigUint {
    let span = n - 3u32; // witnesses live in [2, n-2]
    if let Some(&w) = FIXED_WITNESSES.get(i) {
        let w = BigUint::from(w);
        if w < n - 1u32 {
            return w;
        }
    }
    let mut hasher = Sha256::new();
    hasher.update(b"ahee-mr-witness");
    hasher.update((i as u64).to_be_bytes());
    hasher.update(n.to_bytes_be());
    let mut wide = Vec::new();
    let mut counter = 0u32;
    // stretch to 64 bits past the modulus so the reduction bias is negligible
    while wide.len() * 8 < span.bits() as usize + 64 {
        let mut block = hasher.clone();
        block.update(counter.to_be_bytes());
        wide.extend_from_slice(&block.finalize());
        counter += 1;
    }
    BigUint::from_bytes_be(&wide) % span + 2u32
}

/// Miller–Rabin with `rounds` witnesses; exact for n < 2048.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    if let Some(small) = n.to_u64() {
        if small < TRIAL_DIVISION_LIMIT {
            return is_prime_small(small);
        }
    }
    if n.is_even() {
        return false;
    }
    for sp in small_primes(256) {
        if (n % sp).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let twos = n_minus_one.trailing_zeros().unwrap_or(0);
    let odd = &n_minus_one >> twos;
    'rounds: for i in 0..rounds.max(1) {
        let a = witness(n, i);
        let mut x = a.modpow(&odd, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..twos {
            x = &x * &x % n;
            if x == n_minus_one {
                continue 'rounds;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Uniform integer in the inclusive range `[low, high]`.
pub fn random_in_range<R: RngCore + ?Sized>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    debug_assert!(low <= high);
    rng.gen_biguint_range(low, &(high + 1u32))
}

/// Uniform integer with bit length exactly `bits` (top bit forced).
pub fn random_exact_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    let mut n = rng.gen_biguint(bits);
    n.set_bit(bits - 1, true);
    n
}

/// A prime p whose cofactor (p-1)/2 is also prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SafePrime {
    p: BigUint,
    sophie: BigUint,
}

impl SafePrime {
    /// Validates `p` as a safe prime (p >= 5).
    pub fn new(p: BigUint) -> Result<Self> {
        if p < BigUint::from(5u32) {
            return Err(Error::Parameter("safe prime must be at least 5".into()));
        }
        let sophie = (&p - 1u32) >> 1;
        if !is_probable_prime(&p, MR_ROUNDS) || !is_probable_prime(&sophie, MR_ROUNDS) {
            return Err(Error::Parameter(format!("{p} is not a safe prime")));
        }
        Ok(SafePrime { p, sophie })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    /// (p-1)/2
    pub fn sophie(&self) -> &BigUint {
        &self.sophie
    }

    pub fn into_inner(self) -> BigUint {
        self.p
    }
}

/// Random safe prime of exactly `bits` bits.
pub fn gen_safe_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<SafePrime> {
    if bits < 4 {
        return Err(Error::Parameter(format!(
            "safe primes need at least 4 bits, got {bits}"
        )));
    }
    let sieve = small_primes(TRIAL_DIVISION_LIMIT);
    loop {
        let mut sophie = random_exact_bits(rng, bits - 1);
        sophie.set_bit(0, true);
        let p: BigUint = (&sophie << 1u32) + 1u32;
        // sophie and p = 2*sophie + 1 share residues: p mod d = (2s + 1) mod d
        let sieved = sophie.bits() > 11
            && sieve.iter().any(|&d| {
                let s = (&sophie % d).to_u64().expect("residue below d");
                s == 0 || (2 * s + 1).is_multiple_of(d)
            });
        if sieved {
            continue;
        }
        if is_probable_prime(&sophie, MR_ROUNDS) && is_probable_prime(&p, MR_ROUNDS) {
            return Ok(SafePrime { p, sophie });
        }
    }
}

/// Random prime of exactly `bits` bits (bits >= 2).
pub fn gen_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<BigUint> {
    if bits < 2 {
        return Err(Error::Parameter(format!("primes need at least 2 bits, got {bits}")));
    }
    loop {
        let mut candidate = random_exact_bits(rng, bits);
        if bits > 2 {
            candidate.set_bit(0, true);
        }
        if is_probable_prime(&candidate, MR_ROUNDS) {
            return Ok(candidate);
        }
    }
}

/// Whether `g` generates GF(p)*. With p safe, the order of g divides
/// 2 * sophie, so ruling out orders 2 and sophie suffices.
pub fn is_primitive_root(g: &BigUint, p: &SafePrime) -> bool {
    let one = BigUint::one();
    if *g <= one || g >= p.p() {
        return false;
    }
    let two = BigUint::from(2u32);
    !g.modpow(&two, p.p()).is_one() && !g.modpow(p.sophie(), p.p()).is_one()
}

/// Smallest primitive root of a safe prime.
pub fn find_primitive_root(p: &SafePrime) -> BigUint {
    let mut g = BigUint::from(2u32);
    loop {
        if is_primitive_root(&g, p) {
            return g;
        }
        g += 1u32;
    }
}

/// ceil(bitlen(v) / 8)
pub fn byte_width(v: &BigUint) -> usize {
    v.bits().div_ceil(8) as usize
}
