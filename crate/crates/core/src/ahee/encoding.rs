//! Wire formats for keys, evaluation contexts and ciphertext blobs.
//!
//! Key file (text):
//!
//! ```text
//! AHEE-KEY v1
//! p=<base64url>
//! q=<base64url>
//! N=<base64url>
//! g=<base64url>
//! x=<base64url>
//! y=<base64url>
//! fp=<32 hex digits>
//! ```
//!
//! Magnitudes are big-endian, base64url without padding. Ciphertext blobs
//! are binary: `AHEECT01`, 16-byte fingerprint, u32 BE element width W,
//! u64 BE pair count n, then n pairs of W-byte big-endian (a, b).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use num_bigint::BigUint;

use super::cipher::Ciphertext;
use super::keys::{EvalContext, Fingerprint, KeySet, FINGERPRINT_LEN};
use crate::error::{Error, Result};
use crate::modmath::{byte_width, mod_pow};

pub const KEY_HEADER: &str = "AHEE-KEY v1";
pub const CTX_HEADER: &str = "AHEE-CTX v1";
pub const CT_MAGIC: &[u8; 8] = b"AHEECT01";
/// magic + fingerprint + width + count
pub const CT_HEADER_LEN: usize = 8 + FINGERPRINT_LEN + 4 + 8;

pub fn encode_magnitude(v: &BigUint) -> String {
    URL_SAFE_NO_PAD.encode(v.to_bytes_be())
}

pub fn decode_magnitude(s: &str) -> Result<BigUint> {
    let bytes = URL_SAFE_NO_PAD
        .decode(s.trim())
        .map_err(|e| Error::MalformedEncoding(format!("bad base64url magnitude: {e}")))?;
    if bytes.is_empty() {
        return Err(Error::MalformedEncoding("empty magnitude".into()));
    }
    Ok(BigUint::from_bytes_be(&bytes))
}

struct Fields<'a> {
    lines: core::str::Lines<'a>,
}

impl<'a> Fields<'a> {
    fn new(text: &'a str, header: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == header => Ok(Fields { lines }),
            _ => Err(Error::MalformedEncoding(format!("missing {header:?} header"))),
        }
    }

    fn take(&mut self, name: &str) -> Result<&'a str> {
        let line = self
            .lines
            .next()
            .ok_or_else(|| Error::MalformedEncoding(format!("truncated before {name}=")))?;
        line.trim_end()
            .strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| Error::MalformedEncoding(format!("expected {name}=, found {line:?}")))
    }

    fn magnitude(&mut self, name: &str) -> Result<BigUint> {
        decode_magnitude(self.take(name)?)
    }

    fn finish(mut self) -> Result<()> {
        match self.lines.find(|l| !l.trim().is_empty()) {
            None => Ok(()),
            Some(extra) => Err(Error::MalformedEncoding(format!("trailing content {extra:?}"))),
        }
    }
}

pub fn serialize_key(key: &KeySet) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(KEY_HEADER);
    out.push('\n');
    for (name, v) in [
        ("p", key.p()),
        ("q", key.q()),
        ("N", key.n()),
        ("g", key.g()),
        ("x", key.x()),
        ("y", key.y()),
    ] {
        out.push_str(name);
        out.push('=');
        out.push_str(&encode_magnitude(v));
        out.push('\n');
    }
    out.push_str("fp=");
    out.push_str(&key.fingerprint().to_hex());
    out.push('\n');
    out.into_bytes()
}

/// Parses a key file and re-validates every key invariant. Structural
/// problems are `MalformedEncoding`; values that parse but disagree with
/// each other are `Integrity`.
pub fn deserialize_key(bytes: &[u8]) -> Result<KeySet> {
    let text = core::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedEncoding("key file is not UTF-8".into()))?;
    let mut fields = Fields::new(text, KEY_HEADER)?;
    let p = fields.magnitude("p")?;
    let q = fields.magnitude("q")?;
    let n = fields.magnitude("N")?;
    let g = fields.magnitude("g")?;
    let x = fields.magnitude("x")?;
    let y = fields.magnitude("y")?;
    let fp = Fingerprint::from_hex(fields.take("fp")?)?;
    fields.finish()?;

    if &p * &q != n {
        return Err(Error::Integrity("N != p*q".into()));
    }
    if p >= BigUint::from(2u32) && mod_pow(&g, &x, &p)? != y {
        return Err(Error::Integrity("y != g^x mod p".into()));
    }
    let key = KeySet::from_parts(p, q, g, x).map_err(|e| match e {
        Error::Parameter(msg) => Error::Integrity(msg),
        other => other,
    })?;
    if key.fingerprint() != fp {
        return Err(Error::Integrity("fingerprint does not match key material".into()));
    }
    Ok(key)
}

pub fn serialize_ctx(ctx: &EvalContext) -> Vec<u8> {
    format!(
        "{CTX_HEADER}\np={}\nfp={}\n",
        encode_magnitude(ctx.p()),
        ctx.fingerprint().to_hex()
    )
    .into_bytes()
}

pub fn deserialize_ctx(bytes: &[u8]) -> Result<EvalContext> {
    let text = core::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedEncoding("context file is not UTF-8".into()))?;
    let mut fields = Fields::new(text, CTX_HEADER)?;
    let p = fields.magnitude("p")?;
    let fp = Fingerprint::from_hex(fields.take("fp")?)?;
    fields.finish()?;
    EvalContext::new(p, fp)
}

/// A decoded ciphertext blob: shared fingerprint, element width and pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiphertextBlob {
    pub fingerprint: Fingerprint,
    pub width: u32,
    pub pairs: Vec<Ciphertext>,
}

impl CiphertextBlob {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let w = self.width as usize;
        if w == 0 {
            return Err(Error::MalformedEncoding("element width must be positive".into()));
        }
        let mut out = Vec::with_capacity(CT_HEADER_LEN + self.pairs.len() * 2 * w);
        out.extend_from_slice(CT_MAGIC);
        out.extend_from_slice(self.fingerprint.as_bytes());
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&(self.pairs.len() as u64).to_be_bytes());
        for c in &self.pairs {
            if c.fingerprint != self.fingerprint {
                return Err(Error::KeyMismatch);
            }
            push_fixed(&mut out, &c.a, w)?;
            push_fixed(&mut out, &c.b, w)?;
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < CT_HEADER_LEN {
            return Err(Error::MalformedEncoding(format!(
                "blob of {} bytes is shorter than the {CT_HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        let (header, body) = bytes.split_at(CT_HEADER_LEN);
        if &header[..8] != CT_MAGIC {
            return Err(Error::MalformedEncoding("bad ciphertext magic".into()));
        }
        let mut fp = [0u8; FINGERPRINT_LEN];
        fp.copy_from_slice(&header[8..8 + FINGERPRINT_LEN]);
        let width = u32::from_be_bytes(header[24..28].try_into().expect("4 bytes"));
        let count = u64::from_be_bytes(header[28..36].try_into().expect("8 bytes"));
        if width == 0 {
            return Err(Error::MalformedEncoding("element width must be positive".into()));
        }
        let expected = usize::try_from(count)
            .ok()
            .and_then(|n| n.checked_mul(2 * width as usize))
            .ok_or_else(|| Error::MalformedEncoding("declared pair count overflows".into()))?;
        if body.len() != expected {
            return Err(Error::MalformedEncoding(format!(
                "declared {count} pairs of width {width} need {expected} bytes, found {}",
                body.len()
            )));
        }
        let fingerprint = Fingerprint(fp);
        let pairs = body
            .chunks_exact(2 * width as usize)
            .map(|chunk| {
                let (a, b) = chunk.split_at(width as usize);
                Ciphertext::new(BigUint::from_bytes_be(a), BigUint::from_bytes_be(b), fingerprint)
            })
            .collect();
        Ok(CiphertextBlob { fingerprint, width, pairs })
    }
}

fn push_fixed(out: &mut Vec<u8>, v: &BigUint, width: usize) -> Result<()> {
    let bytes = v.to_bytes_be();
    let bytes: &[u8] = if bytes == [0] { &[] } else { &bytes };
    if bytes.len() > width {
        return Err(Error::MalformedCiphertext(format!("component wider than {width} bytes")));
    }
    out.resize(out.len() + width - bytes.len(), 0);
    out.extend_from_slice(bytes);
    Ok(())
}

/// Serializes ciphertexts under `ctx`, with W = ceil(bitlen(p) / 8).
pub fn serialize_ct(cts: &[Ciphertext], ctx: &EvalContext) -> Result<Vec<u8>> {
    CiphertextBlob {
        fingerprint: ctx.fingerprint(),
        width: byte_width(ctx.p()) as u32,
        pairs: cts.to_vec(),
    }
    .to_bytes()
}

pub fn deserialize_ct(bytes: &[u8]) -> Result<CiphertextBlob> {
    CiphertextBlob::from_bytes(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ahee::keygen;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn toy() -> KeySet {
        KeySet::from_parts(big(7), big(11), big(3), big(4)).unwrap()
    }

    #[test]
    fn toy_key_file_layout() {
        let text = String::from_utf8(serialize_key(&toy())).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "AHEE-KEY v1");
        // 7 -> [0x07] -> "Bw"
        assert_eq!(lines[1], "p=Bw");
        assert_eq!(lines[2], "q=Cw");
        assert_eq!(lines[3], "N=TQ");
        assert_eq!(lines[4], "g=Aw");
        assert_eq!(lines[5], "x=BA");
        assert_eq!(lines[6], "y=BA");
        assert!(lines[7].starts_with("fp=") && lines[7].len() == 35);
        assert_eq!(lines.len(), 8);
    }

    #[test]
    fn key_round_trip() {
        let key = toy();
        assert_eq!(deserialize_key(&serialize_key(&key)).unwrap(), key);
        let big_key = keygen(64, 48, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let bytes = serialize_key(&big_key);
        let back = deserialize_key(&bytes).unwrap();
        assert_eq!(back, big_key);
        assert_eq!(serialize_key(&back), bytes);
    }

    #[test]
    fn tampered_key_fields() {
        let text = String::from_utf8(serialize_key(&toy())).unwrap();
        // y = 5 instead of 4
        let tampered = text.replace("y=BA", "y=BQ");
        assert!(matches!(deserialize_key(tampered.as_bytes()), Err(Error::Integrity(_))));
        let tampered = text.replace("N=TQ", "N=TA");
        assert!(matches!(deserialize_key(tampered.as_bytes()), Err(Error::Integrity(_))));
        // g = 2 is not a root mod 7; keep y consistent so only the root check trips
        let tampered = text.replace("g=Aw", "g=Ag").replace("y=BA", "y=Ag");
        assert!(matches!(deserialize_key(tampered.as_bytes()), Err(Error::Integrity(_))));
        let mut fp_flipped = text.clone().into_bytes();
        let last_hex = fp_flipped.len() - 2;
        fp_flipped[last_hex] = if fp_flipped[last_hex] == b'0' { b'1' } else { b'0' };
        assert!(matches!(deserialize_key(&fp_flipped), Err(Error::Integrity(_))));
    }

    #[test]
    fn truncated_or_garbled_key() {
        let bytes = serialize_key(&toy());
        for cut in [0, 5, 12, 20, bytes.len() - 36] {
            assert!(
                matches!(deserialize_key(&bytes[..cut]), Err(Error::MalformedEncoding(_))),
                "cut={cut}"
            );
        }
        assert!(matches!(deserialize_key(b"AHEE-KEY v2\n"), Err(Error::MalformedEncoding(_))));
        let text = String::from_utf8(bytes).unwrap();
        let garbled = text.replace("p=Bw", "p=B*w");
        assert!(matches!(deserialize_key(garbled.as_bytes()), Err(Error::MalformedEncoding(_))));
        let extra = format!("{text}z=AA\n");
        assert!(matches!(deserialize_key(extra.as_bytes()), Err(Error::MalformedEncoding(_))));
    }

    #[test]
    fn ct_blob_layout() {
        let key = toy();
        let c = Ciphertext::new(big(6), big(5), key.fingerprint());
        let bytes = serialize_ct(core::slice::from_ref(&c), &key.eval_context()).unwrap();
        assert_eq!(&bytes[..8], b"AHEECT01");
        assert_eq!(&bytes[8..24], key.fingerprint().as_bytes());
        assert_eq!(&bytes[24..28], &[0, 0, 0, 1]);
        assert_eq!(&bytes[28..36], &[0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(&bytes[36..], &[6, 5]);
        let blob = deserialize_ct(&bytes).unwrap();
        assert_eq!(blob.pairs, vec![c]);
        assert_eq!(blob.width, 1);
    }

    #[test]
    fn empty_ct_blob() {
        let key = toy();
        let bytes = serialize_ct(&[], &key.eval_context()).unwrap();
        assert_eq!(bytes.len(), CT_HEADER_LEN);
        let blob = deserialize_ct(&bytes).unwrap();
        assert!(blob.pairs.is_empty());
        assert_eq!(blob.fingerprint, key.fingerprint());
    }

    #[test]
    fn ct_blob_inconsistencies() {
        let key = toy();
        let fp = key.fingerprint();
        let cts = [Ciphertext::new(big(6), big(5), fp), Ciphertext::new(big(3), big(1), fp)];
        let bytes = serialize_ct(&cts, &key.eval_context()).unwrap();
        let mut wrong_count = bytes.clone();
        wrong_count[35] = 3;
        assert!(matches!(deserialize_ct(&wrong_count), Err(Error::MalformedEncoding(_))));
        assert!(matches!(deserialize_ct(&bytes[..bytes.len() - 1]), Err(Error::MalformedEncoding(_))));
        assert!(matches!(deserialize_ct(&bytes[..20]), Err(Error::MalformedEncoding(_))));
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(deserialize_ct(&bad_magic), Err(Error::MalformedEncoding(_))));
        let mut huge = bytes.clone();
        huge[28..36].copy_from_slice(&u64::MAX.to_be_bytes());
        assert!(matches!(deserialize_ct(&huge), Err(Error::MalformedEncoding(_))));
        let mut zero_width = bytes;
        zero_width[24..28].copy_from_slice(&[0; 4]);
        assert!(matches!(deserialize_ct(&zero_width), Err(Error::MalformedEncoding(_))));
    }

    #[test]
    fn serialize_rejects_foreign_ciphertexts() {
        let key = toy();
        let other = KeySet::from_parts(big(7), big(13), big(3), big(4)).unwrap();
        let foreign = Ciphertext::new(big(6), big(5), other.fingerprint());
        assert_eq!(serialize_ct(&[foreign], &key.eval_context()), Err(Error::KeyMismatch));
        let wide = Ciphertext::new(big(300), big(5), key.fingerprint());
        assert!(matches!(
            serialize_ct(&[wide], &key.eval_context()),
            Err(Error::MalformedCiphertext(_))
        ));
    }

    #[test]
    fn ctx_round_trip() {
        let ctx = toy().eval_context();
        assert_eq!(deserialize_ctx(&serialize_ctx(&ctx)).unwrap(), ctx);
        assert!(deserialize_ctx(b"AHEE-CTX v1\np=Bw\n").is_err());
    }
}
