//! Exhaustive cross-check of the scheme at toy sizes.
//!
//! The reference side below evaluates every formula with plain `u64`
//! arithmetic: powers by repeated multiplication, inverses by search. It
//! shares nothing with [`crate::ahee`]; the library only enters through the
//! [`SchemeUnderTest`] trait, so a broken implementation shows up as a
//! non-empty failure list.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::ahee::{self, Ciphertext, EvalContext, KeySet, Nonce, PublicParams};
use crate::error::{Error, Result};

/// Largest p the enumeration accepts.
pub const MAX_P: u64 = 61;

/// A ciphertext as a bare pair of small residues.
pub type Pair = (u64, u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    InnerCongruence,
    Encrypt,
    RoundTrip,
    Multiply,
    AddSameK,
    ScalarMultiply,
    Rerandomize,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::InnerCongruence,
        Category::Encrypt,
        Category::RoundTrip,
        Category::Multiply,
        Category::AddSameK,
        Category::ScalarMultiply,
        Category::Rerandomize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::InnerCongruence => "inner-congruence",
            Category::Encrypt => "encrypt",
            Category::RoundTrip => "round-trip",
            Category::Multiply => "multiply",
            Category::AddSameK => "add-same-k",
            Category::ScalarMultiply => "scalar-multiply",
            Category::Rerandomize => "rerandomize",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleParams {
    pub p: u64,
    pub q: u64,
    pub g: u64,
    pub x: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub category: Category,
    pub inputs: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub params: OracleParams,
    pub checks_run: u64,
    pub per_category: BTreeMap<Category, u64>,
    pub failures: Vec<Failure>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn count(&self, category: Category) -> u64 {
        self.per_category.get(&category).copied().unwrap_or(0)
    }
}

/// The operations the oracle exercises, on small residues.
pub trait SchemeUnderTest {
    fn e1(&self, m: u64, r: u64) -> Result<u64>;
    fn encrypt(&self, m: u64, k: u64, r: u64) -> Result<Pair>;
    fn decrypt(&self, c: Pair) -> Result<u64>;
    fn mul(&self, c1: Pair, c2: Pair) -> Result<Pair>;
    fn add_samek(&self, c1: Pair, c2: Pair) -> Result<Pair>;
    fn scalar_mul(&self, c: Pair, s: u64) -> Result<Pair>;
    fn rerandomize(&self, c: Pair, k2: u64) -> Result<Pair>;
}

/// The real library behind [`SchemeUnderTest`].
pub struct Library {
    key: KeySet,
    ctx: EvalContext,
    public: PublicParams,
}

impl Library {
    pub fn new(key: KeySet) -> Self {
        let ctx = key.eval_context();
        let public = key.public_params();
        Library { key, ctx, public }
    }

    pub fn key(&self) -> &KeySet {
        &self.key
    }

    fn lift(&self, c: Pair) -> Ciphertext {
        Ciphertext::new(BigUint::from(c.0), BigUint::from(c.1), self.key.fingerprint())
    }
}

fn lower(v: &BigUint) -> Result<u64> {
    v.to_u64().ok_or_else(|| Error::Parameter("value does not fit in u64".into()))
}

fn lower_pair(c: &Ciphertext) -> Result<Pair> {
    Ok((lower(&c.a)?, lower(&c.b)?))
}

impl SchemeUnderTest for Library {
    fn e1(&self, m: u64, r: u64) -> Result<u64> {
        lower(&ahee::e1_encrypt(&BigUint::from(m), &self.key, &BigUint::from(r))?)
    }

    fn encrypt(&self, m: u64, k: u64, r: u64) -> Result<Pair> {
        let nonce = Nonce { k: BigUint::from(k), r: BigUint::from(r) };
        lower_pair(&ahee::encrypt_with(&BigUint::from(m), &self.key, &nonce)?)
    }

    fn decrypt(&self, c: Pair) -> Result<u64> {
        lower(&ahee::decrypt(&self.lift(c), &self.key)?)
    }

    fn mul(&self, c1: Pair, c2: Pair) -> Result<Pair> {
        lower_pair(&ahee::hom_mul(&self.lift(c1), &self.lift(c2), &self.ctx)?)
    }

    fn add_samek(&self, c1: Pair, c2: Pair) -> Result<Pair> {
        lower_pair(&ahee::hom_add_samek(&self.lift(c1), &self.lift(c2), &self.ctx)?)
    }

    fn scalar_mul(&self, c: Pair, s: u64) -> Result<Pair> {
        lower_pair(&ahee::hom_scalar_mul(&self.lift(c), &BigUint::from(s), &self.ctx)?)
    }

    fn rerandomize(&self, c: Pair, k2: u64) -> Result<Pair> {
        lower_pair(&ahee::rerandomize_with(&self.lift(c), &self.public, &BigUint::from(k2))?)
    }
}

// Reference arithmetic. Deliberately naive.

fn naive_pow(base: u64, exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    for _ in 0..exp {
        acc = acc * base % m;
    }
    acc
}

fn naive_inv(v: u64, m: u64) -> Option<u64> {
    (1..m).find(|w| v % m * w % m == 1)
}

fn naive_is_prime(n: u64) -> bool {
    n >= 2 && (2..n).all(|d| !n.is_multiple_of(d))
}

fn naive_is_generator(g: u64, p: u64) -> bool {
    if g <= 1 || g >= p {
        return false;
    }
    let mut seen = alloc::vec![false; p as usize];
    let mut acc = 1;
    for _ in 1..p {
        acc = acc * g % p;
        seen[acc as usize] = true;
    }
    seen[1..].iter().all(|&s| s)
}

struct Reference {
    p: u64,
    n: u64,
    g: u64,
    x: u64,
    y: u64,
}

impl Reference {
    fn e1(&self, m: u64, r: u64) -> u64 {
        (m + r * self.p) % self.n
    }

    fn encrypt(&self, m: u64, k: u64, r: u64) -> Pair {
        let a = naive_pow(self.g, k, self.p);
        let b = naive_pow(self.y, k, self.p) * (self.e1(m, r) % self.p) % self.p;
        (a, b)
    }

    fn decrypt(&self, c: Pair) -> Option<u64> {
        let shared = naive_pow(c.0, self.x, self.p);
        naive_inv(shared, self.p).map(|inv| c.1 * inv % self.p)
    }

    fn rerandomize(&self, c: Pair, k2: u64) -> Pair {
        (
            c.0 * naive_pow(self.g, k2, self.p) % self.p,
            c.1 * naive_pow(self.y, k2, self.p) % self.p,
        )
    }
}

struct Recorder {
    checks: BTreeMap<Category, u64>,
    failures: Vec<Failure>,
}

impl Recorder {
    fn check<T: PartialEq + fmt::Debug>(
        &mut self,
        category: Category,
        inputs: impl FnOnce() -> String,
        expected: T,
        actual: Result<T>,
    ) {
        *self.checks.entry(category).or_insert(0) += 1;
        let actual = match actual {
            Ok(v) if v == expected => return,
            Ok(v) => format!("{v:?}"),
            Err(e) => format!("error: {e}"),
        };
        self.failures.push(Failure {
            category,
            inputs: inputs(),
            expected: format!("{expected:?}"),
            actual,
        });
    }
}

fn validate(params: &OracleParams) -> Result<()> {
    let OracleParams { p, q, g, x } = *params;
    let fail = |msg: String| Err(Error::Parameter(msg));
    if p > MAX_P {
        return fail(format!("p = {p} exceeds the enumeration cap of {MAX_P}"));
    }
    if !naive_is_prime(p) || p < 5 {
        return fail(format!("p = {p} is not a prime >= 5"));
    }
    if !naive_is_prime(q) || q == p {
        return fail(format!("q = {q} must be a prime different from p"));
    }
    if !naive_is_generator(g, p) {
        return fail(format!("g = {g} does not generate GF({p})*"));
    }
    if x < 1 || x > p - 2 {
        return fail(format!("x = {x} is outside [1, p-2]"));
    }
    Ok(())
}

/// Runs the full enumeration against the library.
pub fn exhaustive_check(p: u64, q: u64, g: u64, x: u64) -> Result<OracleReport> {
    let params = OracleParams { p, q, g, x };
    validate(&params)?;
    let key = KeySet::from_parts(BigUint::from(p), BigUint::from(q), BigUint::from(g), BigUint::from(x))?;
    exhaustive_check_against(params, &Library::new(key))
}

/// Runs the full enumeration against any implementation of the scheme.
///
/// Coverage, with k ranging over [1, p-2] and r over [1, q-1]:
/// - every (M, k, r): inner congruence, encryption and round trip;
/// - multiplication over all pairs of ciphertexts built from every M with
///   k in {1, (p-1)/2, p-2} and r in {1, q-1};
/// - same-k addition over every k and every (M1, M2);
/// - scalar multiplication by every s in [0, p);
/// - re-randomization by every k' in [1, p-1].
pub fn exhaustive_check_against<S: SchemeUnderTest + ?Sized>(
    params: OracleParams,
    scheme: &S,
) -> Result<OracleReport> {
    validate(&params)?;
    let OracleParams { p, q, g, x } = params;
    let reference = Reference { p, n: p * q, g, x, y: naive_pow(g, x, p) };
    let mut rec = Recorder { checks: BTreeMap::new(), failures: Vec::new() };

    for m in 0..p {
        for k in 1..=p - 2 {
            for r in 1..q {
                let inner = reference.e1(m, r);
                let inputs = || format!("M={m} k={k} r={r}");
                rec.check(Category::InnerCongruence, inputs, (inner, m), scheme.e1(m, r).map(|v| (v, v % p)));
                let expected = reference.encrypt(m, k, r);
                let actual = scheme.encrypt(m, k, r);
                rec.check(Category::Encrypt, inputs, expected, actual.clone());
                // the reference formula must invert itself too
                let roundtrip = match (reference.decrypt(expected), actual) {
                    (Some(v), _) if v != m => Err(Error::Integrity(format!("reference decrypts to {v}"))),
                    (_, Ok(c)) => scheme.decrypt(c),
                    (_, Err(e)) => Err(e),
                };
                rec.check(Category::RoundTrip, inputs, m, roundtrip);
            }
        }
    }

    let mut sample_k = alloc::vec![1, (p - 1) / 2, p - 2];
    sample_k.dedup();
    let mut sample_r = alloc::vec![1, q - 1];
    sample_r.dedup();
    let mut samples: Vec<(u64, Pair)> = Vec::new();
    for m in 0..p {
        for &k in &sample_k {
            for &r in &sample_r {
                samples.push((m, reference.encrypt(m, k, r)));
            }
        }
    }

    for &(m1, c1) in &samples {
        for &(m2, c2) in &samples {
            let inputs = || format!("c1={c1:?} (M={m1}) c2={c2:?} (M={m2})");
            let expected = ((c1.0 * c2.0 % p, c1.1 * c2.1 % p), m1 * m2 % p);
            let actual = scheme.mul(c1, c2).and_then(|c| Ok((c, scheme.decrypt(c)?)));
            rec.check(Category::Multiply, inputs, expected, actual);
        }
    }

    for k in 1..=p - 2 {
        for m1 in 0..p {
            for m2 in 0..p {
                let c1 = reference.encrypt(m1, k, 1);
                let c2 = reference.encrypt(m2, k, q - 1);
                let inputs = || format!("k={k} M1={m1} M2={m2}");
                let expected = ((c1.0, (c1.1 + c2.1) % p), (m1 + m2) % p);
                let actual = scheme.add_samek(c1, c2).and_then(|c| Ok((c, scheme.decrypt(c)?)));
                rec.check(Category::AddSameK, inputs, expected, actual);
            }
        }
    }

    for m in 0..p {
        let c = reference.encrypt(m, 1, 1);
        for s in 0..p {
            let inputs = || format!("M={m} s={s}");
            let expected = ((c.0, s * c.1 % p), s * m % p);
            let actual = scheme.scalar_mul(c, s).and_then(|c| Ok((c, scheme.decrypt(c)?)));
            rec.check(Category::ScalarMultiply, inputs, expected, actual);
        }
    }

    for &(m, c) in &samples {
        for k2 in 1..p {
            let inputs = || format!("c={c:?} (M={m}) k'={k2}");
            let expected = (reference.rerandomize(c, k2), m);
            let actual = scheme.rerandomize(c, k2).and_then(|c| Ok((c, scheme.decrypt(c)?)));
            rec.check(Category::Rerandomize, inputs, expected, actual);
        }
    }

    Ok(OracleReport {
        params,
        checks_run: rec.checks.values().sum(),
        per_category: rec.checks,
        failures: rec.failures,
    })
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let OracleParams { p, q, g, x } = self.params;
        writeln!(f, "oracle p={p} q={q} g={g} x={x}")?;
        for cat in Category::ALL {
            let failed = self.failures.iter().filter(|fl| fl.category == cat).count();
            writeln!(f, "  {:<17} {:>8} checks, {failed} failed", cat.name(), self.count(cat))?;
        }
        write!(f, "  total {} checks, {} failures", self.checks_run, self.failures.len())?;
        for fl in self.failures.iter().take(10) {
            write!(
                f,
                "\n  FAIL {} [{}] expected {} got {}",
                fl.category, fl.inputs, fl.expected, fl.actual
            )?;
        }
        Ok(())
    }
}
