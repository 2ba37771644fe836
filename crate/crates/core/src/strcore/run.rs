use super::{lcp, StringArena};
use crate::codec::{put_varint, Reader};
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::ops::Range;

/// A locally sorted string sequence together with its LCP array.
///
/// `tags`, when present, carry one 64-bit key per string (typically a global
/// input index). Equal strings are ordered by tag.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortedRun {
    arena: StringArena,
    lcp: Vec<u32>,
    tags: Option<Vec<u64>>,
}

impl SortedRun {
    /// Assembles a run without checking order; see [`SortedRun::validate`].
    pub fn from_parts(arena: StringArena, lcp: Vec<u32>, tags: Option<Vec<u64>>) -> Self {
        assert_eq!(arena.len(), lcp.len());
        if let Some(t) = &tags {
            assert_eq!(t.len(), arena.len());
        }
        Self { arena, lcp, tags }
    }

    /// Builds a run from strings that are already in order, computing the LCP
    /// array by pairwise comparison.
    pub fn from_sorted_arena(arena: StringArena, tags: Option<Vec<u64>>) -> Self {
        let lcp = pairwise_lcp(&arena);
        Self::from_parts(arena, lcp, tags)
    }

    pub fn empty(tagged: bool) -> Self {
        Self {
            arena: StringArena::new(),
            lcp: Vec::new(),
            tags: tagged.then(Vec::new),
        }
    }

    pub fn len(&self) -> usize {
        self.arena.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arena.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u8] {
        self.arena.get(i)
    }

    pub fn arena(&self) -> &StringArena {
        &self.arena
    }

    pub fn lcps(&self) -> &[u32] {
        &self.lcp
    }

    pub fn tags(&self) -> Option<&[u64]> {
        self.tags.as_deref()
    }

    pub fn tag(&self, i: usize) -> u64 {
        self.tags.as_ref().map_or(0, |t| t[i])
    }

    pub fn is_tagged(&self) -> bool {
        self.tags.is_some()
    }

    pub fn total_chars(&self) -> u64 {
        self.arena.total_chars()
    }

    pub fn into_parts(self) -> (StringArena, Vec<u32>, Option<Vec<u64>>) {
        (self.arena, self.lcp, self.tags)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.arena.iter()
    }

    /// Order of strings `i` and `j` of this run, tags included.
    pub fn cmp_at(&self, i: usize, j: usize) -> Ordering {
        self.get(i).cmp(self.get(j)).then(self.tag(i).cmp(&self.tag(j)))
    }

    /// Copies a contiguous range; the first LCP entry of the copy is reset to 0.
    pub fn slice(&self, range: Range<usize>) -> SortedRun {
        let arena = self.arena.select(range.clone());
        let mut lcp = self.lcp[range.clone()].to_vec();
        if let Some(first) = lcp.first_mut() {
            *first = 0;
        }
        let tags = self.tags.as_ref().map(|t| t[range].to_vec());
        SortedRun { arena, lcp, tags }
    }

    /// Concatenates runs that are already in global order, recomputing the
    /// LCP at each junction. Tagged only if every part is tagged.
    pub fn concat(parts: Vec<SortedRun>) -> SortedRun {
        let tagged = !parts.is_empty() && parts.iter().all(SortedRun::is_tagged);
        let arena = StringArena::concat(parts.iter().map(|r| &r.arena));
        let mut lcps = Vec::with_capacity(arena.len());
        let mut tags = tagged.then(|| Vec::with_capacity(arena.len()));
        let mut prev: Option<&[u8]> = None;
        for r in &parts {
            if r.is_empty() {
                continue;
            }
            lcps.push(prev.map_or(0, |p| lcp(p, r.get(0)) as u32));
            lcps.extend_from_slice(&r.lcp[1..]);
            if let (Some(t), Some(rt)) = (tags.as_mut(), r.tags.as_ref()) {
                t.extend_from_slice(rt);
            }
            prev = Some(r.get(r.len() - 1));
        }
        SortedRun { arena, lcp: lcps, tags }
    }

    /// Number of strings with `s <= key` (bytes only).
    pub fn upper_bound(&self, key: &[u8]) -> usize {
        partition_point(self.len(), |i| self.get(i) <= key)
    }

    /// Number of strings with `(s, tag) <= (key, key_tag)`.
    pub fn upper_bound_tagged(&self, key: &[u8], key_tag: u64) -> usize {
        partition_point(self.len(), |i| {
            super::cmp_tagged(self.get(i), self.tag(i), key, key_tag) != Ordering::Greater
        })
    }

    /// Checks sortedness (tags included) and every LCP entry.
    pub fn validate(&self) -> Result<()> {
        if let Some(&first) = self.lcp.first() {
            if first != 0 {
                return Err(Error::InvalidRun(format!("lcp[0] = {first}, expected 0")));
            }
        }
        for i in 1..self.len() {
            if self.cmp_at(i - 1, i) == Ordering::Greater {
                return Err(Error::InvalidRun(format!("strings {} and {i} out of order", i - 1)));
            }
            let h = lcp(self.get(i - 1), self.get(i));
            if self.lcp[i] as usize != h {
                return Err(Error::InvalidRun(format!(
                    "lcp[{i}] = {}, recomputed {h}",
                    self.lcp[i]
                )));
            }
        }
        Ok(())
    }
}

fn partition_point(n: usize, mut pred: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) fn pairwise_lcp(arena: &StringArena) -> Vec<u32> {
    let mut out = Vec::with_capacity(arena.len());
    for i in 0..arena.len() {
        out.push(if i == 0 { 0 } else { lcp(arena.get(i - 1), arena.get(i)) as u32 });
    }
    out
}

const FLAG_COMPRESSED: u8 = 1;
const FLAG_TAGS: u8 = 2;

/// Serialises `run[range]` for the wire.
///
/// Layout: `varint n`, `u8 flags`, then per string `varint lcp`, the string
/// bytes (or only the bytes past the LCP when `compress` is set) terminated by
/// `0`, and `varint tag` when tags are carried. LCP values are relative to the
/// previous string in the message; the first is 0.
pub fn encode_run(run: &SortedRun, range: Range<usize>, compress: bool, with_tags: bool, out: &mut Vec<u8>) {
    let with_tags = with_tags && run.is_tagged();
    put_varint(out, range.len() as u64);
    let mut flags = 0;
    if compress {
        flags |= FLAG_COMPRESSED;
    }
    if with_tags {
        flags |= FLAG_TAGS;
    }
    out.push(flags);
    let start = range.start;
    for i in range {
        let h = if i == start { 0 } else { run.lcp[i] as usize };
        put_varint(out, h as u64);
        let s = run.get(i);
        out.extend_from_slice(if compress { &s[h..] } else { s });
        out.push(0);
        if with_tags {
            put_varint(out, run.tag(i));
        }
    }
}

/// Inverse of [`encode_run`].
pub fn decode_run(bytes: &[u8]) -> Result<SortedRun> {
    let mut r = Reader::new(bytes);
    let n = r.varint()? as usize;
    let flags = r.u8()?;
    let compressed = flags & FLAG_COMPRESSED != 0;
    let tagged = flags & FLAG_TAGS != 0;
    let mut arena = StringArena::with_capacity(n, bytes.len());
    let mut lcps = Vec::with_capacity(n);
    let mut tags = tagged.then(|| Vec::with_capacity(n));
    let mut prev: Vec<u8> = Vec::new();
    for i in 0..n {
        let h = r.varint()?;
        let h32 = u32::try_from(h).map_err(|_| Error::Decode("lcp exceeds 32 bits".into()))?;
        let body = r.cstr()?;
        if compressed {
            if h as usize > prev.len() {
                return Err(Error::LcpOverflow {
                    index: i,
                    lcp: h32,
                    prev_len: prev.len(),
                });
            }
            prev.truncate(h as usize);
            prev.extend_from_slice(body);
            arena.push_unchecked(&prev);
        } else {
            arena.push_unchecked(body);
        }
        lcps.push(if i == 0 { 0 } else { h32 });
        if let Some(t) = tags.as_mut() {
            t.push(r.varint()?);
        }
    }
    if !r.is_empty() {
        return Err(Error::Decode("trailing bytes after run".into()));
    }
    Ok(SortedRun::from_parts(arena, lcps, tags))
}
