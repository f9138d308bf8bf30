//! Byte strings <-> sequences of integers strictly below p.
//!
//! Data is cut into B-byte big-endian chunks with B = floor((bitlen(p)-1)/8),
//! so every chunk is < 2^(8B) <= 2^(bitlen(p)-1) <= p. The last chunk is
//! zero-padded on the right; the exact byte length travels out of band.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStream {
    pub blocks: Vec<BigUint>,
    pub byte_len: u64,
    pub block_bytes: usize,
}

/// Bytes per block for modulus `p`; zero when p is too small.
pub fn block_capacity(p: &BigUint) -> usize {
    (p.bits().saturating_sub(1) / 8) as usize
}

/// Number of blocks for `byte_len` bytes at `block_bytes` per block.
pub fn block_count(byte_len: u64, block_bytes: usize) -> u64 {
    byte_len.div_ceil(block_bytes as u64)
}

pub fn encode(data: &[u8], p: &BigUint) -> Result<BlockStream> {
    let block_bytes = block_capacity(p);
    if block_bytes == 0 {
        return Err(Error::CapacityZero);
    }
    let blocks = data
        .chunks(block_bytes)
        .map(|chunk| {
            let mut padded = Vec::with_capacity(block_bytes);
            padded.extend_from_slice(chunk);
            padded.resize(block_bytes, 0);
            BigUint::from_bytes_be(&padded)
        })
        .collect();
    Ok(BlockStream { blocks, byte_len: data.len() as u64, block_bytes })
}

pub fn decode(bs: &BlockStream) -> Result<Vec<u8>> {
    let width = bs.block_bytes;
    if width == 0 {
        return Err(Error::Corruption("block width is zero".into()));
    }
    let expected = block_count(bs.byte_len, width);
    if bs.blocks.len() as u64 != expected {
        return Err(Error::Corruption(format!(
            "{} blocks cannot carry {} bytes at {width} bytes per block",
            bs.blocks.len(),
            bs.byte_len
        )));
    }
    let mut out = Vec::with_capacity(bs.blocks.len() * width);
    for (i, block) in bs.blocks.iter().enumerate() {
        if block.bits() > 8 * width as u64 {
            return Err(Error::Corruption(format!("block {i} exceeds {width} bytes")));
        }
        let bytes = block.to_bytes_be();
        let bytes: &[u8] = if bytes == [0] { &[] } else { &bytes };
        out.resize(out.len() + width - bytes.len(), 0);
        out.extend_from_slice(bytes);
    }
    out.truncate(bs.byte_len as usize);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(block_capacity(&big(7)), 0);
        assert_eq!(block_capacity(&big(257)), 1);
        let p256 = (BigUint::from(1u32) << 255u32) + 1u32;
        assert_eq!(block_capacity(&p256), 31);
        assert_eq!(block_capacity(&big(0)), 0);
    }

    #[test]
    fn encode_examples() {
        let bs = encode(&[0x41, 0x42], &big(257)).unwrap();
        assert_eq!(bs.blocks, vec![big(65), big(66)]);
        assert_eq!(bs.byte_len, 2);
        let empty = encode(&[], &big(257)).unwrap();
        assert!(empty.blocks.is_empty());
        assert_eq!(empty.byte_len, 0);
        // 17-bit modulus: B = 2
        let bs = encode(&[0x41], &big(65537)).unwrap();
        assert_eq!(bs.blocks, vec![big(0x4100)]);
        assert_eq!(bs.block_bytes, 2);
        assert_eq!(encode(&[1], &big(7)), Err(Error::CapacityZero));
        assert_eq!(encode(&[1], &big(255)), Err(Error::CapacityZero));
    }

    #[test]
    fn decode_examples() {
        let bs = |blocks: Vec<u64>, len, b| BlockStream {
            blocks: blocks.into_iter().map(big).collect(),
            byte_len: len,
            block_bytes: b,
        };
        assert_eq!(decode(&bs(vec![65, 66], 2, 1)).unwrap(), vec![0x41, 0x42]);
        assert_eq!(decode(&bs(vec![], 0, 1)).unwrap(), Vec::<u8>::new());
        assert_eq!(decode(&bs(vec![0x4100], 1, 2)).unwrap(), vec![0x41]);
        assert_eq!(decode(&bs(vec![0, 0x0102], 4, 2)).unwrap(), vec![0, 0, 1, 2]);
    }

    #[test]
    fn decode_detects_corruption() {
        let bs = |blocks: Vec<u64>, len, b| BlockStream {
            blocks: blocks.into_iter().map(big).collect(),
            byte_len: len,
            block_bytes: b,
        };
        assert!(matches!(decode(&bs(vec![256], 1, 1)), Err(Error::Corruption(_))));
        assert!(matches!(decode(&bs(vec![1, 2], 1, 1)), Err(Error::Corruption(_))));
        assert!(matches!(decode(&bs(vec![1], 3, 2)), Err(Error::Corruption(_))));
        assert!(matches!(decode(&bs(vec![], 1, 1)), Err(Error::Corruption(_))));
        assert!(matches!(decode(&bs(vec![], 0, 0)), Err(Error::Corruption(_))));
    }
}
