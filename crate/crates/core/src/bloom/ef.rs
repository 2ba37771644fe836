//! Elias-Fano coding of strictly ascending position lists.

use crate::codec::{put_varint, Reader};
use crate::error::{Error, Result};

/// Header allowance in bits: two varints (count, universe) of at most ten
/// bytes each plus up to seven bits of padding in the packed body, plus one.
pub const EF_OVERHEAD_BITS: u64 = 168;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliasFanoBlock {
    count: u64,
    universe: u64,
    low_width: u32,
    body: Vec<u8>,
}

impl EliasFanoBlock {
    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn low_width(&self) -> u32 {
        self.low_width
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.body.len() + 20);
        put_varint(&mut out, self.count);
        put_varint(&mut out, self.universe);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let count = r.varint()?;
        let universe = r.varint()?;
        if count > universe {
            return Err(Error::Decode(format!("{count} values in universe {universe}")));
        }
        let low_width = low_width(count, universe);
        let body = r.take(body_bytes(count, universe, low_width))?.to_vec();
        if !r.is_empty() {
            return Err(Error::Decode("trailing bytes after Elias-Fano block".into()));
        }
        Ok(EliasFanoBlock { count, universe, low_width, body })
    }

    /// Size of [`EliasFanoBlock::to_bytes`] in bits.
    pub fn encoded_bits(&self) -> u64 {
        8 * self.to_bytes().len() as u64
    }

    pub fn decode(&self) -> Vec<u64> {
        let n = self.count as usize;
        let b = self.low_width;
        let mut out = Vec::with_capacity(n);
        let low_bits = n as u64 * b as u64;
        let mut pos = low_bits;
        let mut high = 0u64;
        for i in 0..n {
            while !get_bit(&self.body, pos) {
                high += 1;
                pos += 1;
            }
            pos += 1;
            let low = read_bits(&self.body, i as u64 * b as u64, b);
            out.push((high << b) | low);
        }
        out
    }
}

/// Smallest bound `x (log2(u/x) + 2) + EF_OVERHEAD_BITS` the encoding must meet.
pub fn ef_size_bound(x: u64, universe: u64) -> f64 {
    if x == 0 {
        return EF_OVERHEAD_BITS as f64;
    }
    let x = x as f64;
    x * ((universe as f64 / x).log2() + 2.0) + EF_OVERHEAD_BITS as f64
}

pub fn ef_encode(values: &[u64], universe: u64) -> Result<EliasFanoBlock> {
    for (i, w) in values.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(Error::Unsorted(i + 1));
        }
    }
    if let Some(&last) = values.last() {
        if last >= universe {
            return Err(Error::OutOfUniverse { value: last, universe });
        }
    }
    let count = values.len() as u64;
    let b = low_width(count, universe);
    let mut body = vec![0u8; body_bytes(count, universe, b)];
    let low_bits = count * b as u64;
    for (i, &v) in values.iter().enumerate() {
        write_bits(&mut body, i as u64 * b as u64, b, v & mask(b));
        set_bit(&mut body, low_bits + (v >> b) + i as u64);
    }
    Ok(EliasFanoBlock { count, universe, low_width: b, body })
}

pub fn ef_decode(block: &EliasFanoBlock) -> Vec<u64> {
    block.decode()
}

fn low_width(count: u64, universe: u64) -> u32 {
    if count == 0 || universe <= count {
        0
    } else {
        (universe / count).ilog2()
    }
}

fn body_bytes(count: u64, universe: u64, b: u32) -> usize {
    if count == 0 {
        return 0;
    }
    let high = count + ((universe - 1) >> b) + 1;
    (count * b as u64 + high).div_ceil(8) as usize
}

fn mask(b: u32) -> u64 {
    if b == 64 {
        u64::MAX
    } else {
        (1u64 << b) - 1
    }
}

fn get_bit(buf: &[u8], i: u64) -> bool {
    buf[(i / 8) as usize] >> (i % 8) & 1 == 1
}

fn set_bit(buf: &mut [u8], i: u64) {
    buf[(i / 8) as usize] |= 1 << (i % 8);
}

fn write_bits(buf: &mut [u8], at: u64, width: u32, v: u64) {
    for j in 0..width as u64 {
        if v >> j & 1 == 1 {
            set_bit(buf, at + j);
        }
    }
}

fn read_bits(buf: &[u8], at: u64, width: u32) -> u64 {
    (0..width as u64).fold(0, |acc, j| acc | (get_bit(buf, at + j) as u64) << j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{seq::index::sample, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_block_is_header_only() {
        let b = ef_encode(&[], 1000).unwrap();
        assert_eq!(b.to_bytes(), vec![0, 0xe8, 0x07]);
        assert!(b.decode().is_empty());
    }

    #[test]
    fn dense_block_has_no_low_bits() {
        let b = ef_encode(&[0, 1, 2, 3], 4).unwrap();
        assert_eq!(b.low_width(), 0);
        assert_eq!(b.decode(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ef_encode(&[3, 3], 10), Err(Error::Unsorted(1))));
        assert!(matches!(ef_encode(&[3, 10], 10), Err(Error::OutOfUniverse { .. })));
    }

    #[test]
    fn ten_thousand_values_roundtrip_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = 1 << 20;
        let mut v: Vec<u64> = sample(&mut rng, u, 10_000).into_iter().map(|x| x as u64).collect();
        v.sort_unstable();
        let b = ef_encode(&v, u as u64).unwrap();
        let back = EliasFanoBlock::from_bytes(&b.to_bytes()).unwrap();
        assert_eq!(back.decode(), v);
        assert!(b.encoded_bits() as f64 <= ef_size_bound(10_000, u as u64));
    }

    proptest! {
        #[test]
        fn roundtrip_and_bound(mut v in prop::collection::btree_set(0u64..5000, 0..200), extra in 0u64..100_000) {
            let u = v.iter().next_back().map_or(1, |m| m + 1) + extra;
            let v: Vec<u64> = std::mem::take(&mut v).into_iter().collect();
            let b = ef_encode(&v, u).unwrap();
            prop_assert_eq!(EliasFanoBlock::from_bytes(&b.to_bytes()).unwrap().decode(), v.clone());
            prop_assert!(b.encoded_bits() as f64 <= ef_size_bound(v.len() as u64, u));
        }
    }
}
