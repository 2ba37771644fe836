//! Prefix-doubling merge sort.
//!
//! Every string tests ever longer prefixes for global uniqueness: a prefix
//! whose hash nobody else produced is long enough to rank the string, so the
//! string stops at that length. Duplicate detection runs through the
//! distributed Bloom filter while many strings are active and through an
//! atomic hypercube sort of `(hash, index)` pairs once few remain. The
//! truncated strings, tie-broken by global index, are then sorted by the
//! multi-level merge sort; the result is a rank permutation.

use serde::Serialize;
use crate::bloom::{dsbf_round, reduce, DsbfConfig};
use crate::error::Result;
use crate::msort::{ms_sort_tagged, LevelStats, MsConfig};
use crate::rquick::{hypercube_sort, route_back, DedupPair};
use crate::simnet::{Groups, Machine, ReduceOp};
use crate::strcore::{SortedRun, StringArena};
use std::collections::HashMap;
use xxhash_rust::xxh3::xxh3_64_with_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct PdmsConfig {
    pub ms: MsConfig,
    /// Grid levels for Bloom routing; defaults to the merge sort's level count.
    pub bloom_levels: usize,
    /// Strategy switch: sort-based detection once fewer strings are active.
    /// `None` uses `k^2 p^(1+1/k) ceil(log2 p)`.
    pub switch_threshold: Option<u64>,
    /// First tested prefix length; `None` derives it from `p` and the alphabet.
    pub init_len: Option<usize>,
    /// Filter size per round as a multiple of the active count.
    pub filter_factor: f64,
    pub seed: u64,
}

impl PdmsConfig {
    pub fn new(ms: MsConfig, seed: u64) -> Self {
        PdmsConfig {
            bloom_levels: ms.levels().max(1),
            ms,
            switch_threshold: None,
            init_len: None,
            filter_factor: std::f64::consts::E,
            seed,
        }
    }
}

pub fn initial_length(p: usize, sigma: usize) -> usize {
    let ratio = (p.max(2) as f64).log2() / (sigma.max(2) as f64).log2();
    let exp = ratio.log2().ceil().max(0.0) as u32;
    (1usize << exp).max(4)
}

pub fn switch_threshold(p: usize, k: usize) -> u64 {
    let (pf, kf) = (p as f64, k.max(1) as f64);
    let log = (p.max(2) as f64).log2().ceil();
    (kf * kf * pf.powf(1.0 + 1.0 / kf) * log).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    Bloom,
    Sorting,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub method: Detection,
    /// Largest prefix length tested this round.
    pub len: usize,
    pub active: u64,
    pub finalized: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingStats {
    pub init_len: usize,
    pub rounds: Vec<RoundStats>,
    /// Sum of all approximated prefix lengths.
    pub total: u64,
    /// Every Bloom round's Elias-Fano blocks met the size bound.
    pub ef_bound_held: bool,
}

#[derive(Clone, Debug)]
pub struct Approximation {
    /// Per PE, per input string.
    pub lengths: Vec<Vec<u32>>,
    pub stats: DoublingStats,
}

struct Doubling {
    cur: Vec<usize>,
    approx: Vec<u32>,
    active: Vec<usize>,
}

fn round_seed(seed: u64, round: usize) -> u64 {
    xxh3_64_with_seed(&(round as u64).to_le_bytes(), seed)
}

/// Over-approximates every string's distinguishing prefix by doubling.
/// Exact duplicates end at their full length. Phases: `pdms/round{i}`.
pub fn approximate_dist_prefixes(m: &mut Machine, arenas: &[StringArena], cfg: &PdmsConfig) -> Result<Approximation> {
    let p = m.p();
    assert_eq!(arenas.len(), p);
    let whole = Groups::whole(p);
    let init_len = match cfg.init_len {
        Some(l) => l.max(1),
        None => {
            let local = arenas.iter().map(|a| vec![a.max_char() as u64]).collect();
            let sigma = m.in_phase("pdms/alphabet", |m| m.allreduce(&whole, local, ReduceOp::Max))?;
            initial_length(p, sigma[0][0] as usize)
        }
    };
    let threshold = cfg.switch_threshold.unwrap_or_else(|| switch_threshold(p, cfg.ms.levels()));
    let mut state: Vec<Doubling> = arenas
        .iter()
        .map(|a| Doubling { cur: vec![init_len; a.len()], approx: vec![0; a.len()], active: (0..a.len()).collect() })
        .collect();
    let mut stats = DoublingStats { init_len, rounds: Vec::new(), total: 0, ef_bound_held: true };

    for round in 0.. {
        let name = format!("pdms/round{round}");
        let counts = state.iter().map(|s| vec![s.active.len() as u64]).collect();
        let active = m.in_phase(name.clone(), |m| m.allreduce(&whole, counts, ReduceOp::Sum))?[0][0];
        if active == 0 {
            break;
        }
        let method = if active < threshold { Detection::Sorting } else { Detection::Bloom };
        let filter = ((active as f64 * cfg.filter_factor).ceil() as u64).max(1);
        let seed = round_seed(cfg.seed, round);
        let positions: Vec<Vec<u64>> = m.map_ref(&state, |pe, st| {
            st.active
                .iter()
                .map(|&i| {
                    let s = arenas[pe].get(i);
                    reduce(xxh3_64_with_seed(&s[..st.cur[i].min(s.len())], seed), filter)
                })
                .collect()
        });
        let flags = m.in_phase(name, |m| -> Result<_> {
            Ok(match method {
                Detection::Bloom => {
                    let bloom = DsbfConfig::new(p, cfg.bloom_levels, filter, seed);
                    let out = dsbf_round(m, &bloom, positions)?;
                    stats.ef_bound_held &= out.stats.ef_bound_held();
                    out.flags
                }
                Detection::Sorting => dedup_by_sorting(m, positions)?,
            })
        })?;
        let len = state.iter().flat_map(|s| s.active.iter().map(|&i| s.cur[i])).max().unwrap_or(0);
        let finalized: Vec<u64> = m.map(state.iter_mut().zip(flags).collect(), |pe, (st, flags)| {
            let before = st.active.len();
            let mut still = Vec::new();
            for (&i, dup) in st.active.iter().zip(flags) {
                let full = arenas[pe].get(i).len();
                if !dup {
                    st.approx[i] = st.cur[i].min(full) as u32;
                } else if st.cur[i] >= full {
                    st.approx[i] = full as u32;
                } else {
                    st.cur[i] *= 2;
                    still.push(i);
                }
            }
            st.active = still;
            (before - st.active.len()) as u64
        });
        stats.rounds.push(RoundStats { round, method, len, active, finalized: finalized.iter().sum() });
    }
    let lengths: Vec<Vec<u32>> = state.into_iter().map(|s| s.approx).collect();
    stats.total = lengths.iter().flatten().map(|&d| d as u64).sum();
    Ok(Approximation { lengths, stats })
}

/// Flags every item whose hash some other item shares, by sorting
/// `(hash, index)` pairs on the hypercube, scanning neighbours, and sending
/// one bit per pair back along the recorded route.
pub fn dedup_by_sorting(m: &mut Machine, hashes: Vec<Vec<u64>>) -> Result<Vec<Vec<bool>>> {
    let p = m.p();
    let counts: Vec<usize> = hashes.iter().map(Vec::len).collect();
    let pairs: Vec<Vec<DedupPair>> = hashes
        .iter()
        .enumerate()
        .map(|(pe, hs)| {
            hs.iter().enumerate().map(|(i, &hash)| DedupPair { hash, index: (pe as u64) << 32 | i as u64 }).collect()
        })
        .collect();
    let (sorted, routes) = hypercube_sort(m, &Groups::whole(p), pairs, "dedup", true)?;

    let outboxes = sorted
        .iter()
        .enumerate()
        .map(|(pe, v)| {
            let (Some(first), Some(last)) = (v.first(), v.last()) else { return Vec::new() };
            let mut out = Vec::new();
            if pe > 0 {
                out.push((pe - 1, first.hash.to_le_bytes().to_vec()));
            }
            if pe + 1 < p {
                out.push((pe + 1, last.hash.to_le_bytes().to_vec()));
            }
            out
        })
        .collect();
    let inboxes = m.exchange(outboxes)?;
    let flags: Vec<HashMap<u64, bool>> = m.map(sorted.into_iter().zip(inboxes).collect(), |pe, (v, inbox)| {
        let mut prev = None;
        let mut next = None;
        for msg in inbox {
            let h = u64::from_le_bytes(msg.payload[..8].try_into().expect("8-byte boundary hash"));
            if msg.src < pe {
                prev = Some(h);
            } else {
                next = Some(h);
            }
        }
        (0..v.len())
            .map(|i| {
                let h = v[i].hash;
                let left = if i == 0 { prev } else { Some(v[i - 1].hash) };
                let right = if i + 1 == v.len() { next } else { Some(v[i + 1].hash) };
                (v[i].index, left == Some(h) || right == Some(h))
            })
            .collect()
    });
    let back = route_back(m, &routes.expect("routes were recorded"), flags)?;
    Ok(back
        .into_iter()
        .enumerate()
        .map(|(pe, map)| (0..counts[pe]).map(|i| map[&((pe as u64) << 32 | i as u64)]).collect())
        .collect())
}

#[derive(Clone, Debug)]
pub struct PdmsOutput {
    /// Truncated strings in global order, tagged with their global input index.
    pub runs: Vec<SortedRun>,
    pub levels: Vec<LevelStats>,
    pub approximation: Approximation,
}

impl PdmsOutput {
    /// `perm[i]` is the global input index of the `i`-th smallest string.
    pub fn permutation(&self) -> Vec<u64> {
        self.runs.iter().flat_map(|r| r.tags().unwrap_or(&[]).iter().copied()).collect()
    }
}

pub fn pdms_sort(m: &mut Machine, arenas: Vec<StringArena>, cfg: &PdmsConfig) -> Result<PdmsOutput> {
    let p = m.p();
    assert_eq!(arenas.len(), p);
    let counts = arenas.iter().map(|a| a.len() as u64).collect();
    let offsets = m.in_phase("pdms/index", |m| m.prefix_sum(&Groups::whole(p), counts))?;
    let approximation = approximate_dist_prefixes(m, &arenas, cfg)?;
    let inputs = m.map(arenas.into_iter().zip(&approximation.lengths).collect(), |pe, (a, lens)| {
        let mut t = StringArena::with_capacity(a.len(), lens.iter().map(|&d| d as usize).sum());
        for (s, &d) in a.iter().zip(lens) {
            t.push_unchecked(&s[..d as usize]);
        }
        let tags = (0..a.len() as u64).map(|i| offsets[pe] + i).collect();
        (t, tags)
    });
    let out = ms_sort_tagged(m, inputs, &cfg.ms)?;
    Ok(PdmsOutput { runs: out.runs, levels: out.levels, approximation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dist_prefixes_by_input, duplicate_heavy, generate_dn, oracle_sort, random_strings, split_even, DnSpec};

    fn run(a: &StringArena, p: usize, k: usize, seed: u64) -> (PdmsOutput, Machine) {
        let mut m = Machine::new(p, seed).unwrap();
        let cfg = PdmsConfig::new(MsConfig::new(p, k), seed);
        let out = pdms_sort(&mut m, split_even(a, p), &cfg).unwrap();
        (out, m)
    }

    #[test]
    fn initial_lengths() {
        assert_eq!(initial_length(1, 26), 4);
        assert_eq!(initial_length(1 << 20, 2), 32);
        assert_eq!(initial_length(64, 4), 4);
        assert_eq!(switch_threshold(16, 2), 4 * 64 * 4);
    }

    #[test]
    fn pair_differing_in_last_char() {
        let l = 37;
        let x = "a".repeat(l - 1);
        let a = StringArena::from_strings([format!("{x}b"), format!("{x}c")]).unwrap();
        let mut m = Machine::new(2, 1).unwrap();
        let cfg = PdmsConfig::new(MsConfig::new(2, 1), 1);
        let ap = approximate_dist_prefixes(&mut m, &split_even(&a, 2), &cfg).unwrap();
        assert_eq!(ap.lengths, vec![vec![l as u32], vec![l as u32]]);
        assert_eq!(ap.stats.rounds.len(), 5);
    }

    #[test]
    fn distinct_first_chars_finish_in_one_round() {
        let a = StringArena::from_strings((1u8..=200).map(|c| vec![c, b'x', b'y', b'z', b'w', b'q'])).unwrap();
        let mut m = Machine::new(4, 2).unwrap();
        let mut cfg = PdmsConfig::new(MsConfig::new(4, 1), 2);
        cfg.filter_factor = 100.0;
        let ap = approximate_dist_prefixes(&mut m, &split_even(&a, 4), &cfg).unwrap();
        assert!(ap.lengths.iter().flatten().all(|&d| d as usize == ap.stats.init_len));
    }

    #[test]
    fn safety_and_permutation_across_inputs() {
        let inputs = [
            random_strings(2000, 0, 30, 3, 1),
            duplicate_heavy(2000, 50, 20, 2),
            generate_dn(&DnSpec { n: 1600, len: 64, dn_ratio: 0.25, sigma: 4, seed: 3 }).unwrap(),
        ];
        for (i, a) in inputs.iter().enumerate() {
            for (p, k) in [(1, 1), (4, 1), (6, 2), (16, 2)] {
                let (out, _) = run(a, p, k, i as u64 + 10);
                let want = dist_prefixes_by_input(a);
                let got: Vec<u32> = out.approximation.lengths.iter().flatten().copied().collect();
                assert!(got.iter().zip(&want).all(|(g, w)| g >= w), "input {i} p={p}");
                let perm: Vec<usize> = out.permutation().iter().map(|&x| x as usize).collect();
                assert_eq!(perm, oracle_sort(a).perm, "input {i} p={p}");
                let rounds = out.approximation.stats.rounds.len();
                let lhat = a.max_len().max(1) as f64;
                let init = out.approximation.stats.init_len as f64;
                assert!(rounds as f64 <= (lhat / init).log2().ceil().max(0.0) + 1.0);
            }
        }
    }

    #[test]
    fn detection_methods_agree() {
        let a = random_strings(3000, 1, 6, 3, 5);
        let lengths = |threshold: u64| {
            let mut m = Machine::new(8, 7).unwrap();
            let mut cfg = PdmsConfig::new(MsConfig::new(8, 2), 7);
            cfg.switch_threshold = Some(threshold);
            approximate_dist_prefixes(&mut m, &split_even(&a, 8), &cfg).unwrap()
        };
        let bloom = lengths(0);
        let sorting = lengths(u64::MAX);
        assert!(bloom.stats.rounds.iter().all(|r| r.method == Detection::Bloom));
        assert!(sorting.stats.rounds.iter().all(|r| r.method == Detection::Sorting));
        assert_eq!(bloom.lengths, sorting.lengths);
    }

    #[test]
    fn dedup_flags_match_bloom() {
        let hashes = vec![vec![5, 9, 1], vec![9], vec![], vec![7, 9, 3, 3]];
        let mut m = Machine::new(4, 1).unwrap();
        let got = dedup_by_sorting(&mut m, hashes.clone()).unwrap();
        assert_eq!(got, vec![vec![false, true, false], vec![true], vec![], vec![false, true, true, true]]);
        let out = dsbf_round(&mut m, &DsbfConfig::new(4, 2, 10, 1), hashes).unwrap();
        assert_eq!(out.flags, got);
    }

    #[test]
    fn prefix_exchange_beats_full_strings() {
        let a = generate_dn(&DnSpec { n: 3200, len: 200, dn_ratio: 0.25, sigma: 4, seed: 4 }).unwrap();
        let (_, mp) = run(&a, 16, 2, 4);
        let mut mm = Machine::new(16, 4).unwrap();
        crate::msort::ms_sort(&mut mm, split_even(&a, 16), &MsConfig::new(16, 2)).unwrap();
        let bytes = |m: &Machine| m.ledger().phases_with_prefix("exchange/").map(|(_, ph)| ph.totals().bytes_sent).sum::<u64>();
        assert!(bytes(&mp) < bytes(&mm));
    }
}
