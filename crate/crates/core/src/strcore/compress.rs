use super::{SortedRun, StringArena};
use crate::error::{Error, Result};

/// A sorted run with every common prefix with the predecessor stored only once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedRun {
    lcp_len: Vec<u32>,
    /// Suffixes (string minus its LCP prefix), each followed by a `0`.
    suffixes: Vec<u8>,
    tags: Option<Vec<u64>>,
}

impl CompressedRun {
    /// Builds a compressed run from raw parts; [`lcp_decompress`] validates it.
    pub fn from_parts(lcp_len: Vec<u32>, suffixes: Vec<u8>, tags: Option<Vec<u64>>) -> Self {
        Self { lcp_len, suffixes, tags }
    }

    pub fn len(&self) -> usize {
        self.lcp_len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lcp_len.is_empty()
    }

    pub fn lcp_lens(&self) -> &[u32] {
        &self.lcp_len
    }

    /// Suffix bytes, terminators included.
    pub fn suffix_bytes(&self) -> &[u8] {
        &self.suffixes
    }

    /// Character payload: `N - sum(lcp)`.
    pub fn payload_len(&self) -> u64 {
        (self.suffixes.len() - self.lcp_len.len()) as u64
    }
}

pub fn lcp_compress(run: &SortedRun) -> CompressedRun {
    let mut suffixes = Vec::new();
    let mut lcp_len = Vec::with_capacity(run.len());
    for (i, s) in run.iter().enumerate() {
        let h = if i == 0 { 0 } else { run.lcps()[i] };
        lcp_len.push(h);
        suffixes.extend_from_slice(&s[h as usize..]);
        suffixes.push(0);
    }
    CompressedRun {
        lcp_len,
        suffixes,
        tags: run.tags().map(<[u64]>::to_vec),
    }
}

pub fn lcp_decompress(c: &CompressedRun) -> Result<SortedRun> {
    let mut arena = StringArena::with_capacity(c.len(), c.suffixes.len());
    let mut prev: Vec<u8> = Vec::new();
    let mut rest = &c.suffixes[..];
    for (i, &h) in c.lcp_len.iter().enumerate() {
        if i == 0 && h != 0 {
            return Err(Error::InvalidRun("first lcp_len must be 0".into()));
        }
        if h as usize > prev.len() {
            return Err(Error::LcpOverflow {
                index: i,
                lcp: h,
                prev_len: prev.len(),
            });
        }
        let end = rest
            .iter()
            .position(|&b| b == 0)
            .ok_or_else(|| Error::Decode("suffix without terminator".into()))?;
        prev.truncate(h as usize);
        prev.extend_from_slice(&rest[..end]);
        rest = &rest[end + 1..];
        arena.push_unchecked(&prev);
    }
    if !rest.is_empty() {
        return Err(Error::Decode("trailing suffix bytes".into()));
    }
    Ok(SortedRun::from_parts(arena, c.lcp_len.clone(), c.tags.clone()))
}
