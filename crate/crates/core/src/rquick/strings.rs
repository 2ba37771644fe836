use super::engine::{hypercube_sort, CubeData};
use crate::codec::{put_bytes, put_varint, Reader};
use crate::error::Result;
use crate::simnet::{Groups, Machine};
use crate::strcore::{cmp_tagged, decode_run, encode_run, local_sort_tagged, losertree_merge, SortedRun, StringArena};
use std::cmp::Ordering;
use std::ops::Range;

type Key = (Vec<u8>, u64);

fn put_key(key: &Key, out: &mut Vec<u8>) {
    put_bytes(out, &key.0);
    put_varint(out, key.1);
}

fn get_key(r: &mut Reader<'_>) -> Result<Key> {
    Ok((r.bytes()?.to_vec(), r.varint()?))
}

/// Tagged string run for RQuick+: string-sorted locally, merged with the
/// LCP loser tree, LCP arrays carried along.
#[derive(Clone, Debug)]
pub struct PlusStrings(pub SortedRun);

impl CubeData for PlusStrings {
    type Key = Key;

    fn empty() -> Self {
        PlusStrings(SortedRun::empty(true))
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn key(&self, i: usize) -> Key {
        (self.0.get(i).to_vec(), self.0.tag(i))
    }
    fn id(&self, i: usize) -> u64 {
        self.0.tag(i)
    }
    fn put_key(key: &Key, out: &mut Vec<u8>) {
        put_key(key, out)
    }
    fn get_key(r: &mut Reader<'_>) -> Result<Key> {
        get_key(r)
    }
    fn rank(&self, key: &Key) -> usize {
        self.0.upper_bound_tagged(&key.0, key.1)
    }
    fn slice(&self, range: Range<usize>) -> Self {
        PlusStrings(self.0.slice(range))
    }
    fn select(&self, idx: &[usize]) -> Self {
        let arena = self.0.arena().select(idx.iter().copied());
        let tags = idx.iter().map(|&i| self.0.tag(i)).collect();
        PlusStrings(SortedRun::from_parts(arena, vec![0; idx.len()], Some(tags)))
    }
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        encode_run(&self.0, 0..self.0.len(), false, true, &mut out);
        out
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        decode_run(bytes).map(PlusStrings)
    }
    fn join(parts: Vec<Self>) -> Self {
        PlusStrings(SortedRun::concat(parts.into_iter().map(|p| p.0).collect()))
    }
    fn sort(self) -> Self {
        let tags = self.0.tags().expect("tagged").to_vec();
        PlusStrings(local_sort_tagged(self.0.arena(), &tags).run)
    }
    fn merge(parts: Vec<Self>) -> Self {
        let runs: Vec<SortedRun> = parts.into_iter().map(|p| p.0).collect();
        PlusStrings(losertree_merge(&runs))
    }
    fn check(&self) -> Result<()> {
        self.0.validate()
    }
}

/// `(string, tag)` pairs handled with generic comparison sorting and merging.
#[derive(Clone, Debug, Default)]
pub struct PlainStrings(pub Vec<Key>);

fn cmp_key(a: &Key, b: &Key) -> Ordering {
    cmp_tagged(&a.0, a.1, &b.0, b.1)
}

impl CubeData for PlainStrings {
    type Key = Key;

    fn empty() -> Self {
        PlainStrings(Vec::new())
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn key(&self, i: usize) -> Key {
        self.0[i].clone()
    }
    fn id(&self, i: usize) -> u64 {
        self.0[i].1
    }
    fn put_key(key: &Key, out: &mut Vec<u8>) {
        put_key(key, out)
    }
    fn get_key(r: &mut Reader<'_>) -> Result<Key> {
        get_key(r)
    }
    fn rank(&self, key: &Key) -> usize {
        self.0.partition_point(|x| cmp_key(x, key) != Ordering::Greater)
    }
    fn slice(&self, range: Range<usize>) -> Self {
        PlainStrings(self.0[range].to_vec())
    }
    fn select(&self, idx: &[usize]) -> Self {
        PlainStrings(idx.iter().map(|&i| self.0[i].clone()).collect())
    }
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_varint(&mut out, self.0.len() as u64);
        for k in &self.0 {
            put_key(k, &mut out);
        }
        out
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let n = r.varint()? as usize;
        let mut v = Vec::with_capacity(n.min(bytes.len()));
        for _ in 0..n {
            v.push(get_key(&mut r)?);
        }
        Ok(PlainStrings(v))
    }
    fn join(parts: Vec<Self>) -> Self {
        PlainStrings(parts.into_iter().flat_map(|p| p.0).collect())
    }
    fn sort(mut self) -> Self {
        self.0.sort_by(cmp_key);
        self
    }
    fn merge(parts: Vec<Self>) -> Self {
        parts.into_iter().fold(PlainStrings::default(), |acc, p| PlainStrings(merge2(acc.0, p.0)))
    }
}

fn merge2(a: Vec<Key>, b: Vec<Key>) -> Vec<Key> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    loop {
        let take_a = match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => cmp_key(x, y) != Ordering::Greater,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        out.push(if take_a { a.next() } else { b.next() }.unwrap());
    }
    out
}

/// Sorts tagged strings within each group; output runs carry their tags.
/// Tags must be unique within a group.
pub fn rquick_sort_tagged(
    m: &mut Machine,
    groups: &Groups,
    inputs: Vec<(StringArena, Vec<u64>)>,
    plus: bool,
    label: &str,
) -> Result<Vec<SortedRun>> {
    if plus {
        let data = inputs
            .into_iter()
            .map(|(a, t)| {
                let n = a.len();
                PlusStrings(SortedRun::from_parts(a, vec![0; n], Some(t)))
            })
            .collect();
        let (out, _) = hypercube_sort(m, groups, data, label, false)?;
        Ok(out.into_iter().map(|p| p.0).collect())
    } else {
        let data = inputs
            .into_iter()
            .map(|(a, t)| PlainStrings(a.iter().map(<[u8]>::to_vec).zip(t).collect()))
            .collect();
        let (out, _) = hypercube_sort(m, groups, data, label, false)?;
        Ok(m.map(out, |_, p| {
            let mut arena = StringArena::with_capacity(p.0.len(), 0);
            let mut tags = Vec::with_capacity(p.0.len());
            for (s, t) in p.0 {
                arena.push_unchecked(&s);
                tags.push(t);
            }
            SortedRun::from_sorted_arena(arena, Some(tags))
        }))
    }
}

/// RQuick (`plus = false`) or RQuick+ over all PEs. Output tags are global
/// input indices (PE-major), so equal strings keep input order.
pub fn rquick_sort(m: &mut Machine, arenas: Vec<StringArena>, plus: bool) -> Result<Vec<SortedRun>> {
    let p = m.p();
    assert_eq!(arenas.len(), p);
    m.in_phase("rquick", |m| {
        let whole = Groups::whole(p);
        let offsets = m.prefix_sum(&whole, arenas.iter().map(|a| a.len() as u64).collect())?;
        let inputs = arenas
            .into_iter()
            .zip(offsets)
            .map(|(a, off)| {
                let tags = (off..off + a.len() as u64).collect();
                (a, tags)
            })
            .collect();
        rquick_sort_tagged(m, &whole, inputs, plus, "rquick")
    })
}
