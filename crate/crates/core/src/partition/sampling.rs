use serde::Serialize;
use crate::error::Result;
use crate::simnet::{Groups, Machine, ReduceOp};
use crate::strcore::{SortedRun, StringArena};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    String,
    Character,
}

/// Samples drawn by one PE. `tags[i] = pe << 32 | ordinal`, so equal sample
/// strings order by origin PE and draw order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSet {
    pub arena: StringArena,
    pub tags: Vec<u64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.arena.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arena.is_empty()
    }
}

/// `j`-th of `c` evenly spaced positions in `0..m`, `j` in `1..=c`.
fn spaced(j: u64, m: u64, c: u64) -> u64 {
    (j * m).div_ceil(c + 1) - 1
}

/// Draws exactly `p'(v+1)` samples per nonempty group. Each PE takes
/// `ceil(units_i / omega) - 1` evenly spaced samples, and the first nonempty
/// PEs take one more until the total is exact.
pub fn draw_samples(
    m: &mut Machine,
    groups: &Groups,
    runs: &[SortedRun],
    mode: SamplingMode,
    v: usize,
) -> Result<Vec<SampleSet>> {
    let p = m.p();
    assert_eq!(runs.len(), p);
    let units: Vec<u64> = runs
        .iter()
        .map(|r| match mode {
            SamplingMode::String => r.len() as u64,
            SamplingMode::Character => r.total_chars(),
        })
        .collect();
    let totals = m.allreduce(groups, units.iter().map(|&u| vec![u]).collect(), ReduceOp::Sum)?;
    let target: Vec<u64> = (0..p)
        .map(|pe| groups.of(pe).map_or(0, |g| (groups.ranges()[g].len() * (v + 1)) as u64))
        .collect();
    let base: Vec<u64> = (0..p)
        .map(|pe| {
            let total = totals[pe].first().copied().unwrap_or(0);
            if total == 0 || units[pe] == 0 {
                0
            } else {
                ((units[pe] as u128 * target[pe] as u128).div_ceil(total as u128) - 1) as u64
            }
        })
        .collect();
    let scans = m.scan(groups, (0..p).map(|pe| vec![base[pe], (units[pe] > 0) as u64]).collect())?;
    let counts: Vec<u64> = (0..p)
        .map(|pe| {
            if units[pe] == 0 || scans[pe].total.is_empty() {
                return 0;
            }
            let deficit = target[pe] - scans[pe].total[0];
            base[pe] + (scans[pe].exclusive[1] < deficit) as u64
        })
        .collect();
    Ok(m.map_ref(runs, |pe, run| match mode {
        SamplingMode::String => string_samples(pe, run, counts[pe]),
        SamplingMode::Character => char_samples(pe, run, counts[pe]),
    }))
}

fn string_samples(pe: usize, run: &SortedRun, c: u64) -> SampleSet {
    let n = run.len() as u64;
    let mut out = SampleSet::default();
    for j in 1..=c {
        out.arena.push_unchecked(run.get(spaced(j, n, c) as usize));
        out.tags.push((pe as u64) << 32 | (j - 1));
    }
    out
}

/// Index of the string owning each of `c` evenly spaced character positions.
fn char_picks(run: &SortedRun, c: u64) -> Vec<usize> {
    let total = run.total_chars();
    let mut starts = Vec::with_capacity(run.len());
    let mut acc = 0u64;
    for s in run.iter() {
        starts.push(acc);
        acc += s.len() as u64;
    }
    (1..=c)
        .map(|j| {
            let pos = spaced(j, total, c);
            // Empty strings share a start with their successor; skip to the owner.
            let k = starts.partition_point(|&st| st <= pos) - 1;
            (k..run.len()).find(|&k| pos < starts[k] + run.get(k).len() as u64).unwrap_or(k)
        })
        .collect()
}

fn char_samples(pe: usize, run: &SortedRun, c: u64) -> SampleSet {
    let picks = char_picks(run, c);
    let mut out = SampleSet::default();
    let mut ordinal = 0u64;
    let mut i = 0;
    while i < picks.len() {
        let k = picks[i];
        let reps = picks[i..].iter().take_while(|&&x| x == k).count();
        let s = run.get(k);
        if reps == 1 {
            out.arena.push_unchecked(s);
            out.tags.push((pe as u64) << 32 | ordinal);
            ordinal += 1;
        } else {
            let width = digits(reps as u64 - 1);
            for q in 0..reps as u64 {
                let mut buf = s.to_vec();
                buf.extend(render(q, width));
                out.arena.push_unchecked(&buf);
                out.tags.push((pe as u64) << 32 | ordinal);
                ordinal += 1;
            }
        }
        i += reps;
    }
    out
}

fn digits(mut x: u64) -> usize {
    let mut d = 1;
    while x >= 255 {
        x /= 255;
        d += 1;
    }
    d
}

/// `x` in base 255 with digits `1..=255`, fixed width, most significant first.
fn render(mut x: u64, width: usize) -> Vec<u8> {
    let mut out = vec![1u8; width];
    for slot in out.iter_mut().rev() {
        *slot = (x % 255) as u8 + 1;
        x /= 255;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_strings, split_even};
    use crate::strcore::local_sort;

    fn sorted_runs(arenas: Vec<StringArena>) -> Vec<SortedRun> {
        arenas.iter().map(|a| local_sort(a).run).collect()
    }

    fn draw(runs: &[SortedRun], groups: &Groups, mode: SamplingMode, v: usize) -> Vec<SampleSet> {
        let mut m = Machine::new(runs.len(), 1).unwrap();
        draw_samples(&mut m, groups, runs, mode, v).unwrap()
    }

    #[test]
    fn two_pes_four_strings_each() {
        let runs = sorted_runs(vec![
            StringArena::from_strings(["a", "b", "c", "d"]).unwrap(),
            StringArena::from_strings(["e", "f", "g", "h"]).unwrap(),
        ]);
        let s = draw(&runs, &Groups::whole(2), SamplingMode::String, 1);
        assert_eq!(s[0].arena.to_vecs(), vec![b"b".to_vec(), b"c".to_vec()]);
        assert_eq!(s[1].arena.to_vecs(), vec![b"f".to_vec(), b"g".to_vec()]);
    }

    #[test]
    fn one_pe_holds_everything() {
        let a = random_strings(100, 1, 5, 4, 1);
        let runs = sorted_runs(vec![a, StringArena::new(), StringArena::new(), StringArena::new()]);
        for mode in [SamplingMode::String, SamplingMode::Character] {
            let s = draw(&runs, &Groups::whole(4), mode, 3);
            assert_eq!(s[0].len(), 16);
            assert!(s[1..].iter().all(SampleSet::is_empty));
        }
    }

    #[test]
    fn exact_totals_and_gaps() {
        for (p, per, v) in [(4, 250, 7), (6, 97, 3), (8, 5, 16), (5, 1000, 1)] {
            let a = random_strings(p * per, 0, 9, 3, p as u64);
            let runs = sorted_runs(split_even(&a, p));
            let groups = Groups::split(p, if p % 2 == 0 { 2 } else { 1 }).unwrap();
            for mode in [SamplingMode::String, SamplingMode::Character] {
                let s = draw(&runs, &groups, mode, v);
                for r in groups.ranges() {
                    let got: usize = r.clone().map(|pe| s[pe].len()).sum();
                    assert_eq!(got, r.len() * (v + 1), "p={p} mode={mode:?}");
                }
                if mode == SamplingMode::String {
                    for r in groups.ranges() {
                        let n: usize = r.clone().map(|pe| runs[pe].len()).sum();
                        let omega = n.div_ceil(r.len() * (v + 1)).max(1);
                        for pe in r.clone() {
                            let c = s[pe].len() as u64;
                            let m = runs[pe].len() as u64;
                            let mut prev = 0;
                            for j in 1..=c {
                                let pos = spaced(j, m, c);
                                assert!(pos + 1 - prev <= omega as u64 + 1);
                                prev = pos + 1;
                            }
                            assert!(m - prev <= omega as u64);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unit_length_strings_sample_like_strings() {
        let a = random_strings(400, 1, 1, 200, 3);
        let runs = sorted_runs(split_even(&a, 4));
        let s1 = draw(&runs, &Groups::whole(4), SamplingMode::String, 5);
        let s2 = draw(&runs, &Groups::whole(4), SamplingMode::Character, 5);
        assert_eq!(s1, s2);
    }

    #[test]
    fn giant_string_picked_once_without_suffix() {
        let mut strings: Vec<Vec<u8>> = vec![vec![7u8; 5000]];
        strings.extend((0..50).map(|i| vec![1, (i % 200 + 1) as u8]));
        let a = StringArena::from_strings(strings).unwrap();
        let run = local_sort(&a).run;
        let s = char_samples(0, &run, 1);
        assert_eq!(s.arena.to_vecs(), vec![vec![7u8; 5000]]);
        let s = char_samples(0, &run, 6);
        let giant: Vec<_> = s.arena.iter().filter(|x| x.starts_with(&[7, 7])).collect();
        assert_eq!(giant.len(), 6);
        assert!(giant.iter().all(|x| x.len() == 5001));
        assert!(giant.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn char_gap_bound() {
        let a = random_strings(3000, 0, 40, 4, 11);
        let runs = sorted_runs(split_even(&a, 4));
        let v = 5;
        let s = draw(&runs, &Groups::whole(4), SamplingMode::Character, v);
        let total: u64 = runs.iter().map(SortedRun::total_chars).sum();
        let omega = total as f64 / (4 * (v + 1)) as f64;
        let lhat = a.max_len() as f64;
        for (run, smp) in runs.iter().zip(&s) {
            let mut idx = char_picks(run, smp.len() as u64);
            idx.dedup();
            let mut from = 0;
            for &k in idx.iter().chain(std::iter::once(&run.len())) {
                let between: u64 = (from..k).map(|i| run.get(i).len() as u64).sum();
                assert!(between as f64 <= omega + lhat, "{between} > {omega} + {lhat}");
                from = k + 1;
            }
        }
    }

    #[test]
    fn base255_rendering() {
        assert_eq!(render(0, 1), vec![1]);
        assert_eq!(render(254, 1), vec![255]);
        assert_eq!(render(255, 2), vec![2, 1]);
        assert_eq!(digits(254), 1);
        assert_eq!(digits(255), 2);
    }
}
