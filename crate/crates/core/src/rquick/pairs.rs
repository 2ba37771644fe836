use super::engine::CubeData;
use crate::codec::Reader;
use crate::error::{Error, Result};
use std::ops::Range;

/// Hash value with the global index of the element it belongs to,
/// ordered by `(hash, index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DedupPair {
    pub hash: u64,
    pub index: u64,
}

impl CubeData for Vec<DedupPair> {
    type Key = DedupPair;

    fn empty() -> Self {
        Vec::new()
    }
    fn len(&self) -> usize {
        <[DedupPair]>::len(self)
    }
    fn key(&self, i: usize) -> DedupPair {
        self[i]
    }
    fn id(&self, i: usize) -> u64 {
        self[i].index
    }
    fn put_key(key: &DedupPair, out: &mut Vec<u8>) {
        out.extend_from_slice(&key.hash.to_le_bytes());
        out.extend_from_slice(&key.index.to_le_bytes());
    }
    fn get_key(r: &mut Reader<'_>) -> Result<DedupPair> {
        let b = r.take(16)?;
        Ok(DedupPair {
            hash: u64::from_le_bytes(b[..8].try_into().unwrap()),
            index: u64::from_le_bytes(b[8..].try_into().unwrap()),
        })
    }
    fn rank(&self, key: &DedupPair) -> usize {
        self.partition_point(|x| x <= key)
    }
    fn slice(&self, range: Range<usize>) -> Self {
        self[range].to_vec()
    }
    fn select(&self, idx: &[usize]) -> Self {
        idx.iter().map(|&i| self[i]).collect()
    }
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * <[DedupPair]>::len(self));
        for k in self {
            Self::put_key(k, &mut out);
        }
        out
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(16) {
            return Err(Error::Decode(format!("{} bytes is not a whole number of pairs", bytes.len())));
        }
        let mut r = Reader::new(bytes);
        (0..bytes.len() / 16).map(|_| Self::get_key(&mut r)).collect()
    }
    fn join(parts: Vec<Self>) -> Self {
        parts.concat()
    }
    fn sort(mut self) -> Self {
        self.sort_unstable();
        self
    }
    fn merge(parts: Vec<Self>) -> Self {
        let mut v = parts.concat();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rquick::{hypercube_sort, route_back};
    use crate::simnet::{Groups, Machine};
    use rand::{Rng, SeedableRng};
    use std::collections::HashMap;

    #[test]
    fn atomic_sort_and_route_back() {
        let p = 6;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let data: Vec<Vec<DedupPair>> = (0..p)
            .map(|pe| (0..50).map(|i| DedupPair { hash: rng.gen_range(0..40), index: (pe * 50 + i) as u64 }).collect())
            .collect();
        let mut all: Vec<DedupPair> = data.concat();
        all.sort_unstable();
        let mut m = Machine::new(p, 1).unwrap();
        let (out, routes) = hypercube_sort(&mut m, &Groups::whole(p), data.clone(), "t", true).unwrap();
        assert_eq!(out.concat(), all);
        // Return each element's own index parity and check it lands at its origin.
        let flags: Vec<HashMap<u64, bool>> =
            out.iter().map(|v| v.iter().map(|x| (x.index, x.index % 3 == 0)).collect()).collect();
        let back = route_back(&mut m, &routes.unwrap(), flags).unwrap();
        for (pe, items) in data.iter().enumerate() {
            assert_eq!(back[pe].len(), items.len());
            for x in items {
                assert_eq!(back[pe][&x.index], x.index % 3 == 0);
            }
        }
    }

    #[test]
    fn decode_rejects_partial_pairs() {
        assert!(<Vec<DedupPair>>::decode(&[0; 15]).is_err());
    }
}
