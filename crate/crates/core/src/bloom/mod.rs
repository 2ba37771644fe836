//! Distributed single-shot Bloom filter.
//!
//! Every item is a position in `[0, m)`; position `x` is owned by PE
//! `floor(x p / m)`. Queries travel to their owner over a `k`-dimensional
//! grid. At every hop a PE merges what it received, forwards each position
//! once and remembers which neighbours sent it. An owner answers "duplicate"
//! when a position arrived on two or more branches; the answers retrace the
//! route one bit per forwarded position, and every hop ORs in its own
//! fan-in verdict.

mod ef;

pub use ef::{ef_decode, ef_encode, ef_size_bound, EliasFanoBlock, EF_OVERHEAD_BITS};

use crate::codec::{pack_bits, put_varint, unpack_bits, Reader};
use crate::error::{Error, Result};
use crate::simnet::{balanced_dims, Grid, Machine};
use std::collections::BTreeMap;
use xxhash_rust::xxh3::xxh3_64_with_seed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsbfConfig {
    /// Filter size in positions.
    pub m: u64,
    /// Grid factors, one per routing level.
    pub dims: Vec<usize>,
    pub seed: u64,
}

impl DsbfConfig {
    pub fn new(p: usize, k_levels: usize, m: u64, seed: u64) -> Self {
        DsbfConfig { m: m.max(1), dims: balanced_dims(p, k_levels.max(1)), seed }
    }

    /// Filter of size `ceil(e * n_ops)`.
    pub fn for_ops(p: usize, k_levels: usize, n_ops: u64, seed: u64) -> Self {
        Self::new(p, k_levels, default_size(n_ops), seed)
    }

    pub fn k_levels(&self) -> usize {
        self.dims.len()
    }

    pub fn position(&self, bytes: &[u8]) -> u64 {
        hash_position(bytes, self.seed, self.m)
    }

    pub fn owner(&self, pos: u64, p: usize) -> usize {
        ((pos as u128 * p as u128) / self.m as u128) as usize
    }
}

pub fn default_size(n_ops: u64) -> u64 {
    ((n_ops as f64 * std::f64::consts::E).ceil() as u64).max(1)
}

/// Seeded 64-bit hash reduced to `[0, m)` by multiply-shift.
pub fn hash_position(bytes: &[u8], seed: u64, m: u64) -> u64 {
    reduce(xxh3_64_with_seed(bytes, seed), m)
}

pub fn reduce(h: u64, m: u64) -> u64 {
    ((h as u128 * m as u128) >> 64) as u64
}

/// Strictly ascending distinct positions of one PE's items and, for each,
/// the indices of the items that hashed there.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HashBatch {
    pub positions: Vec<u64>,
    pub origins: Vec<Vec<usize>>,
}

impl HashBatch {
    pub fn new(items: &[u64]) -> Self {
        let mut by_pos: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, &x) in items.iter().enumerate() {
            by_pos.entry(x).or_default().push(i);
        }
        let (positions, origins) = by_pos.into_iter().unzip();
        HashBatch { positions, origins }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DsbfStats {
    /// Elias-Fano blocks sent, forward direction.
    pub batches: u64,
    /// Largest `encoded bits - size bound` seen; at most 0 when every block
    /// met the bound.
    pub worst_ef_slack: f64,
    /// Most positions any PE held as owner.
    pub max_owner_load: usize,
}

impl DsbfStats {
    pub fn ef_bound_held(&self) -> bool {
        self.worst_ef_slack <= 0.0
    }
}

#[derive(Clone, Debug)]
pub struct DsbfOutput {
    /// Per PE, per item: possibly a duplicate.
    pub flags: Vec<Vec<bool>>,
    pub stats: DsbfStats,
}

/// `(peer, positions)` lists in peer order.
type Lists = Vec<(usize, Vec<u64>)>;

/// Inserts every item and answers, per item, whether another item anywhere
/// shares its position. Runs in the machine's current phase: `k` forward
/// and `k` reverse supersteps.
pub fn dsbf_round(m: &mut Machine, cfg: &DsbfConfig, items: Vec<Vec<u64>>) -> Result<DsbfOutput> {
    let p = m.p();
    assert_eq!(items.len(), p);
    let grid = Grid::new(&cfg.dims, p)?;
    for pe_items in &items {
        if let Some(&pos) = pe_items.iter().find(|&&x| x >= cfg.m) {
            return Err(Error::PositionOutOfRange { pos, m: cfg.m });
        }
    }
    let batches: Vec<HashBatch> = m.map_ref(&items, |_, v| HashBatch::new(v));
    let mut held: Vec<Vec<u64>> = batches.iter().map(|b| b.positions.clone()).collect();
    let mut sent: Vec<Vec<Lists>> = Vec::with_capacity(grid.rounds());
    let mut received: Vec<Vec<Lists>> = Vec::with_capacity(grid.rounds());
    let mut stats = DsbfStats::default();
    let mut worst = f64::NEG_INFINITY;

    for t in 0..grid.rounds() {
        let split: Vec<Lists> = m.map(held, |pe, positions| {
            let mut out: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
            for x in positions {
                out.entry(grid.hop(pe, cfg.owner(x, p), t)).or_default().push(x);
            }
            out.into_iter().collect()
        });
        let mut outboxes = Vec::with_capacity(p);
        for (pe, lists) in split.iter().enumerate() {
            let mut ob = Vec::new();
            for (dst, list) in lists {
                debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
                if *dst != pe {
                    let block = ef_encode(list, cfg.m)?;
                    stats.batches += 1;
                    worst = worst.max(block.encoded_bits() as f64 - ef_size_bound(list.len() as u64, cfg.m));
                    ob.push((*dst, block.to_bytes()));
                }
            }
            outboxes.push(ob);
        }
        let inboxes = m.exchange(outboxes)?;
        let fanin: Vec<Result<Lists>> = m.map(inboxes, |pe, inbox| {
            let mut parts = Vec::with_capacity(inbox.len() + 1);
            for msg in inbox {
                parts.push((msg.src, EliasFanoBlock::from_bytes(&msg.payload)?.decode()));
            }
            if let Some((_, own)) = split[pe].iter().find(|(dst, _)| *dst == pe) {
                let at = parts.partition_point(|(src, _)| *src < pe);
                parts.insert(at, (pe, own.clone()));
            }
            Ok(parts)
        });
        let fanin = fanin.into_iter().collect::<Result<Vec<_>>>()?;
        held = m.map_ref(&fanin, |_, parts| merge_dedup(parts));
        sent.push(split);
        received.push(fanin);
    }
    stats.max_owner_load = held.iter().map(Vec::len).max().unwrap_or(0);
    stats.worst_ef_slack = if stats.batches == 0 { 0.0 } else { worst };

    // verdicts[pe]: answer for every position pe held after the round being unwound
    let mut verdicts: Vec<BTreeMap<u64, bool>> = held.iter().map(|h| h.iter().map(|&x| (x, false)).collect()).collect();
    for (fanin, split) in received.into_iter().zip(sent).rev() {
        let replies: Vec<Vec<(usize, Vec<bool>)>> = m.map(fanin.into_iter().zip(verdicts).collect(), |_, (parts, ans)| {
            let mut branches: BTreeMap<u64, usize> = BTreeMap::new();
            for (_, list) in &parts {
                for &x in list {
                    *branches.entry(x).or_default() += 1;
                }
            }
            parts
                .into_iter()
                .map(|(src, list)| (src, list.iter().map(|x| branches[x] >= 2 || ans[x]).collect()))
                .collect()
        });
        let mut outboxes = vec![Vec::new(); p];
        for (pe, rs) in replies.iter().enumerate() {
            for (src, bits) in rs {
                if *src != pe {
                    let mut payload = Vec::new();
                    put_varint(&mut payload, bits.len() as u64);
                    payload.extend(pack_bits(bits));
                    outboxes[pe].push((*src, payload));
                }
            }
        }
        let inboxes = m.exchange(outboxes)?;
        let next: Vec<Result<BTreeMap<u64, bool>>> = m.map(inboxes.into_iter().zip(split).collect(), |pe, (inbox, lists)| {
            let mut bits_from: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
            for msg in inbox {
                let mut r = Reader::new(&msg.payload);
                let n = r.varint()? as usize;
                bits_from.insert(msg.src, unpack_bits(r.take(n.div_ceil(8))?, n)?);
            }
            if let Some((_, bits)) = replies[pe].iter().find(|(src, _)| *src == pe) {
                bits_from.insert(pe, bits.clone());
            }
            let mut out = BTreeMap::new();
            for (dst, list) in lists {
                let bits = bits_from
                    .remove(&dst)
                    .ok_or_else(|| Error::Decode(format!("no answer from PE {dst}")))?;
                if bits.len() != list.len() {
                    return Err(Error::Decode(format!("PE {dst} answered {} of {} positions", bits.len(), list.len())));
                }
                out.extend(list.into_iter().zip(bits));
            }
            Ok(out)
        });
        verdicts = next.into_iter().collect::<Result<Vec<_>>>()?;
    }

    let flags = m.map(batches.into_iter().zip(items).zip(verdicts).collect(), |_, ((batch, items), ans)| {
        let mut flags = vec![false; items.len()];
        for (x, origins) in batch.positions.iter().zip(&batch.origins) {
            let dup = origins.len() >= 2 || ans[x];
            for &i in origins {
                flags[i] = dup;
            }
        }
        flags
    });
    Ok(DsbfOutput { flags, stats })
}

/// Measured false-positive rate of one round on `n` distinct items spread
/// evenly over `p` PEs, averaged over `seeds`.
pub fn fp_rate_estimate(p: usize, n: u64, m: u64, seeds: &[u64]) -> Result<f64> {
    if n == 0 || seeds.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &seed in seeds {
        let mut machine = Machine::new(p, seed)?;
        let cfg = DsbfConfig::new(p, 1, m, seed);
        let items: Vec<Vec<u64>> = (0..p)
            .map(|pe| {
                let (lo, hi) = (pe as u64 * n / p as u64, (pe as u64 + 1) * n / p as u64);
                (lo..hi).map(|i| cfg.position(&i.to_le_bytes())).collect()
            })
            .collect();
        let out = machine.in_phase("fp", |mm| dsbf_round(mm, &cfg, items))?;
        let hits = out.flags.iter().flatten().filter(|&&f| f).count();
        total += hits as f64 / n as f64;
    }
    Ok(total / seeds.len() as f64)
}

fn merge_dedup(parts: &[(usize, Vec<u64>)]) -> Vec<u64> {
    let mut all: Vec<u64> = parts.iter().flat_map(|(_, l)| l.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn oracle(items: &[Vec<u64>]) -> Vec<Vec<bool>> {
        let mut count: HashMap<u64, usize> = HashMap::new();
        for &x in items.iter().flatten() {
            *count.entry(x).or_default() += 1;
        }
        items.iter().map(|v| v.iter().map(|x| count[x] >= 2).collect()).collect()
    }

    fn random_items(p: usize, per_pe: usize, m: u64, seed: u64) -> Vec<Vec<u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..p).map(|_| (0..rng.gen_range(0..=per_pe)).map(|_| rng.gen_range(0..m)).collect()).collect()
    }

    #[test]
    fn same_prefix_on_two_pes_is_duplicate() {
        let cfg = DsbfConfig::new(4, 2, 1000, 1);
        let x = cfg.position(b"abc");
        let y = cfg.position(b"xyz");
        let mut m = Machine::new(4, 1).unwrap();
        let out = dsbf_round(&mut m, &cfg, vec![vec![x], vec![], vec![x, y], vec![]]).unwrap();
        assert_eq!(out.flags, vec![vec![true], vec![], vec![true, x == y], vec![]]);
    }

    #[test]
    fn exact_against_oracle_for_all_level_counts() {
        for seed in 0..20 {
            let p = [1, 4, 6, 8, 16][seed as usize % 5];
            let items = random_items(p, 60, 300, seed);
            let want = oracle(&items);
            for k in 1..=3 {
                let mut m = Machine::new(p, seed).unwrap();
                let cfg = DsbfConfig::new(p, k, 300, seed);
                let out = m.in_phase("q", |m| dsbf_round(m, &cfg, items.clone())).unwrap();
                assert_eq!(out.flags, want, "p={p} k={k}");
                assert!(out.stats.ef_bound_held());
                assert_eq!(m.ledger().phase("q").unwrap().supersteps, 2 * cfg.dims.len() as u64);
            }
        }
    }

    #[test]
    fn grid_hops_stay_within_dims() {
        let p = 16;
        let items = random_items(p, 200, 10_000, 4);
        let mut m = Machine::new(p, 4).unwrap();
        let cfg = DsbfConfig::new(p, 2, 10_000, 4);
        m.in_phase("q", |m| dsbf_round(m, &cfg, items)).unwrap();
        for c in &m.ledger().phase("q").unwrap().pes {
            assert!(c.msgs_sent <= 2 * 3 * 2);
        }
    }

    #[test]
    fn rejects_out_of_range_position() {
        let mut m = Machine::new(2, 1).unwrap();
        let cfg = DsbfConfig::new(2, 1, 10, 1);
        assert!(matches!(dsbf_round(&mut m, &cfg, vec![vec![10], vec![]]), Err(Error::PositionOutOfRange { .. })));
    }

    #[test]
    fn false_positive_rates() {
        assert_eq!(fp_rate_estimate(4, 1, 1, &[1]).unwrap(), 0.0);
        let n = 20_000;
        let r = fp_rate_estimate(4, n, default_size(n), &[1, 2, 3]).unwrap();
        assert!((0.15..=0.45).contains(&r), "{r}");
        let r = fp_rate_estimate(4, n, 100 * n, &[1, 2]).unwrap();
        assert!(r < 0.02, "{r}");
    }
}
