//! AHEE: an updated-ElGamal homomorphic cryptosystem over GF(p) with an
//! inner modulus-N blinding layer.
//!
//! This crate is `no_std` (it needs `alloc`) and performs no IO. Every
//! randomized operation takes its randomness source as an argument.
//!
//! - [`modmath`]: modular exponentiation and inversion, Miller–Rabin,
//!   safe primes, primitive roots.
//! - [`ahee`]: keys, encryption, decryption, homomorphic operations and
//!   the key / ciphertext wire formats.
//! - [`codec`]: byte strings to blocks below p and back.
//! - [`oracle`]: brute-force cross-check of the scheme at toy sizes.

#![no_std]

extern crate alloc;

pub mod ahee;
pub mod codec;
pub mod error;
pub mod modmath;
pub mod oracle;

pub use error::{Error, Result};
pub use num_bigint::BigUint;
