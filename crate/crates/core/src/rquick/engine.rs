use crate::codec::{pack_bits, unpack_bits, Reader};
use crate::error::Result;
use crate::simnet::{Groups, Machine, Outbox};
use rand::Rng;
use std::collections::HashMap;
use std::ops::Range;

/// Per-PE data that the hypercube engine can sort and move.
///
/// Keys must be unique across the whole input so that pivots split
/// deterministically.
pub trait CubeData: Sized + Send + Sync {
    type Key: Ord + Clone + Send + Sync;

    fn empty() -> Self;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn key(&self, i: usize) -> Self::Key;
    /// Identity used when recording routes.
    fn id(&self, i: usize) -> u64;
    fn put_key(key: &Self::Key, out: &mut Vec<u8>);
    fn get_key(r: &mut Reader<'_>) -> Result<Self::Key>;
    /// Number of leading elements `<= key`; data must be sorted.
    fn rank(&self, key: &Self::Key) -> usize;
    fn slice(&self, range: Range<usize>) -> Self;
    fn select(&self, idx: &[usize]) -> Self;
    fn encode(&self) -> Vec<u8>;
    fn decode(bytes: &[u8]) -> Result<Self>;
    /// Order-preserving concatenation.
    fn join(parts: Vec<Self>) -> Self;
    fn sort(self) -> Self;
    fn merge(parts: Vec<Self>) -> Self;
    fn check(&self) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
struct RouteStep {
    sent: Vec<(usize, Vec<u64>)>,
    received: Vec<(usize, Vec<u64>)>,
}

/// Recorded data movements, `steps[s][pe]`.
#[derive(Clone, Debug, Default)]
pub struct Routes {
    steps: Vec<Vec<RouteStep>>,
}

impl Routes {
    pub fn steps(&self) -> usize {
        self.steps.len()
    }
}

/// Lower median of the present medians; `None` if every PE abstained.
pub fn pivot_select<K: Ord + Clone>(medians: &[Option<K>]) -> Option<K> {
    let mut v: Vec<&K> = medians.iter().flatten().collect();
    if v.is_empty() {
        return None;
    }
    v.sort();
    Some(v[(v.len() - 1) / 2].clone())
}

fn ids_of<T: CubeData>(t: &T) -> Vec<u64> {
    (0..t.len()).map(|i| t.id(i)).collect()
}

/// Moves pieces in one superstep. Each PE lists `(dst, piece)`; a piece for
/// itself stays local. Returns the pieces every PE holds, in source order.
type SentIds = Vec<(usize, Vec<u64>)>;

fn deliver<T: CubeData>(
    m: &mut Machine,
    pieces: Vec<Vec<(usize, T)>>,
    routes: &mut Option<Routes>,
) -> Result<Vec<Vec<T>>> {
    let p = m.p();
    let prepared: Vec<(Option<T>, Outbox, SentIds)> = m.map(pieces, |pe, list| {
        let mut own = None;
        let mut out = Vec::new();
        let mut sent = Vec::new();
        for (dst, piece) in list {
            if dst == pe {
                own = Some(piece);
            } else if piece.len() > 0 {
                sent.push((dst, ids_of(&piece)));
                out.push((dst, piece.encode()));
            }
        }
        (own, out, sent)
    });
    let mut own = Vec::with_capacity(p);
    let mut outs = Vec::with_capacity(p);
    let mut sents = Vec::with_capacity(p);
    for (o, out, s) in prepared {
        own.push(o);
        outs.push(out);
        sents.push(s);
    }
    let inboxes = m.exchange(outs)?;
    let decoded: Vec<Result<(Vec<T>, SentIds)>> =
        m.map(inboxes.into_iter().zip(own).collect(), |pe, (inbox, own)| {
            let mut parts = Vec::with_capacity(inbox.len() + 1);
            let mut recv = Vec::new();
            let mut own = Some(own.unwrap_or_else(T::empty));
            for msg in inbox {
                if msg.src > pe {
                    if let Some(o) = own.take() {
                        parts.push(o);
                    }
                }
                let t = T::decode(&msg.payload)?;
                recv.push((msg.src, ids_of(&t)));
                parts.push(t);
            }
            if let Some(o) = own {
                parts.push(o);
            }
            Ok((parts, recv))
        });
    let mut result = Vec::with_capacity(p);
    let mut step = Vec::with_capacity(p);
    for (d, sent) in decoded.into_iter().zip(sents) {
        let (parts, received) = d?;
        result.push(parts);
        step.push(RouteStep { sent, received });
    }
    if let Some(r) = routes.as_mut() {
        r.steps.push(step);
    }
    Ok(result)
}

fn floor_pow2(g: usize) -> usize {
    1 << (usize::BITS - 1 - g.leading_zeros())
}

/// Sorts `data[pe]` within each group so that concatenation over PE order is
/// sorted. PEs outside every group keep their data untouched.
pub fn hypercube_sort<T: CubeData>(
    m: &mut Machine,
    groups: &Groups,
    data: Vec<T>,
    label: &str,
    record: bool,
) -> Result<(Vec<T>, Option<Routes>)> {
    let p = m.p();
    assert_eq!(data.len(), p);
    let mut routes = record.then(Routes::default);
    // (group start, cube size, group size) for each PE inside a group.
    let mut cube_of: Vec<Option<(usize, usize, usize)>> = vec![None; p];
    for r in groups.ranges() {
        let c = floor_pow2(r.len());
        for pe in r.clone() {
            cube_of[pe] = Some((r.start, c, r.len()));
        }
    }
    let cube_ref = &cube_of;

    let pieces = m.map(data, |pe, t| match cube_ref[pe] {
        Some((lo, c, _)) if pe >= lo + c => vec![(pe - c, t)],
        _ => vec![(pe, t)],
    });
    let parts = deliver(m, pieces, &mut routes)?;
    let data: Vec<T> = m.map(parts, |_, parts| T::join(parts));

    let shuffle_label = format!("{label}/shuffle");
    let rngs: Vec<_> = (0..p).map(|pe| m.rng(pe, &shuffle_label)).collect();
    let pieces = m.map(data.into_iter().zip(rngs).collect(), |pe, (t, mut rng)| match cube_ref[pe] {
        Some((lo, c, _)) if pe < lo + c && t.len() > 0 => {
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); c];
            for i in 0..t.len() {
                buckets[rng.gen_range(0..c)].push(i);
            }
            buckets.into_iter().enumerate().map(|(q, idx)| (lo + q, t.select(&idx))).collect()
        }
        _ => vec![(pe, t)],
    });
    let parts = deliver(m, pieces, &mut routes)?;
    let mut data: Vec<T> = m.map(parts, |_, parts| T::join(parts).sort());
    check_all(&data)?;

    let dims: Vec<u32> = cube_of.iter().map(|c| c.map_or(0, |(_, c, _)| c.trailing_zeros())).collect();
    let max_d = dims.iter().copied().max().unwrap_or(0);
    for s in 0..max_d {
        // Active sub-cubes of this step, in PE order.
        let mut subcubes = Vec::new();
        for r in groups.ranges() {
            let d = dims[r.start];
            if s < d {
                let size = 1usize << (d - s);
                let mut base = r.start;
                while base + size <= r.start + (1 << d) {
                    subcubes.push(base..base + size);
                    base += size;
                }
            }
        }
        let sub = Groups::from_ranges(subcubes, p)?;
        let medians: Vec<Vec<u8>> = m.map_ref(&data, |pe, t| {
            if sub.of(pe).is_none() || t.len() == 0 {
                return Vec::new();
            }
            let mut b = vec![1];
            T::put_key(&t.key((t.len() - 1) / 2), &mut b);
            b
        });
        let gathered = m.allgather(&sub, medians)?;
        let pivots: Vec<Option<T::Key>> = gathered
            .iter()
            .map(|list| {
                let keys = list
                    .iter()
                    .filter(|b| !b.is_empty())
                    .map(|b| T::get_key(&mut Reader::new(&b[1..])).map(Some))
                    .collect::<Result<Vec<_>>>()?;
                Ok(pivot_select(&keys))
            })
            .collect::<Result<_>>()?;
        let pivots_ref = &pivots;
        let dims_ref = &dims;
        let pieces = m.map(data, |pe, t| {
            let (Some((lo, _, _)), Some(pivot)) = (cube_ref[pe], pivots_ref[pe].as_ref()) else {
                return vec![(pe, t)];
            };
            let i = dims_ref[pe] - 1 - s;
            let rel = pe - lo;
            let partner = lo + (rel ^ (1 << i));
            let k = t.rank(pivot);
            let (low, high) = (t.slice(0..k), t.slice(k..t.len()));
            if rel >> i & 1 == 0 {
                vec![(pe, low), (partner, high)]
            } else {
                vec![(partner, low), (pe, high)]
            }
        });
        let parts = deliver(m, pieces, &mut routes)?;
        data = m.map(parts, |_, parts| T::merge(parts));
        check_all(&data)?;
    }

    let counts: Vec<Vec<u64>> = data.iter().map(|t| vec![t.len() as u64]).collect();
    let scans = m.scan(groups, counts)?;
    let scans_ref = &scans;
    let pieces = m.map(data, |pe, t| {
        let Some((lo, _, g)) = cube_ref[pe] else {
            return vec![(pe, t)];
        };
        let off = scans_ref[pe].exclusive[0] as usize;
        let n = scans_ref[pe].total[0] as usize;
        let start = |q: usize| q * (n / g) + q.min(n % g);
        let mut out = Vec::new();
        for q in 0..g {
            let (a, b) = (start(q).max(off), start(q + 1).min(off + t.len()));
            if a < b || lo + q == pe {
                let (a, b) = if a < b { (a - off, b - off) } else { (0, 0) };
                out.push((lo + q, t.slice(a..b)));
            }
        }
        out
    });
    let parts = deliver(m, pieces, &mut routes)?;
    let data: Vec<T> = m.map(parts, |_, parts| T::join(parts));
    check_all(&data)?;
    Ok((data, routes))
}

fn check_all<T: CubeData>(data: &[T]) -> Result<()> {
    if cfg!(debug_assertions) {
        for t in data {
            t.check()?;
        }
    }
    Ok(())
}

/// Sends one flag per element back along recorded routes to the PE that
/// originally held it. `flags[pe]` maps element ids to flags.
pub fn route_back(
    m: &mut Machine,
    routes: &Routes,
    flags: Vec<HashMap<u64, bool>>,
) -> Result<Vec<HashMap<u64, bool>>> {
    let mut flags = flags;
    for step in routes.steps.iter().rev() {
        let outs: Vec<Outbox> = flags
            .iter_mut()
            .zip(step)
            .map(|(map, st)| {
                st.received
                    .iter()
                    .map(|(src, ids)| {
                        let bits: Vec<bool> =
                            ids.iter().map(|id| map.remove(id).expect("flag for routed element")).collect();
                        (*src, pack_bits(&bits))
                    })
                    .collect()
            })
            .collect();
        for (pe, inbox) in m.exchange(outs)?.into_iter().enumerate() {
            for msg in inbox {
                let (_, ids) = step[pe].sent.iter().find(|(d, _)| *d == msg.src).expect("matching send");
                for (id, bit) in ids.iter().zip(unpack_bits(&msg.payload, ids.len())?) {
                    flags[pe].insert(*id, bit);
                }
            }
        }
    }
    Ok(flags)
}
