use super::SampleSet;
use crate::codec::{put_bytes, put_varint, Reader};
use crate::error::{Error, Result};
use crate::rquick::rquick_sort_tagged;
use crate::simnet::{Groups, Machine};
use crate::strcore::SortedRun;
use std::ops::Range;

/// `r - 1` ascending splitters; bucket `j` holds `f_j < s <= f_{j+1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitterSet {
    pub splitters: Vec<Vec<u8>>,
}

impl SplitterSet {
    pub fn buckets(&self) -> usize {
        self.splitters.len() + 1
    }
}

/// Sorts the samples of each group with RQuick+, picks
/// `f_j = V[j|V|/r - 1]` and makes every group member agree on them.
pub fn compute_splitters(
    m: &mut Machine,
    groups: &Groups,
    samples: Vec<SampleSet>,
    r: usize,
) -> Result<Vec<SplitterSet>> {
    let p = m.p();
    if r <= 1 {
        return Ok(vec![SplitterSet::default(); p]);
    }
    let label = format!("{}/samples", m.phase());
    let inputs = samples.into_iter().map(|s| (s.arena, s.tags)).collect();
    let sorted = rquick_sort_tagged(m, groups, inputs, true, &label)?;
    let scans = m.scan(groups, sorted.iter().map(|s| vec![s.len() as u64]).collect())?;
    for (pe, sc) in scans.iter().enumerate() {
        if groups.of(pe).is_some() {
            let total = sc.total[0] as usize;
            if total > 0 && total < r {
                return Err(Error::TooFewSamples { samples: total, r });
            }
        }
    }
    let pieces: Vec<Vec<u8>> = m.map_ref(&sorted, |pe, run| {
        let mut buf = Vec::new();
        let Some(sc) = scans[pe].total.first() else { return buf };
        let total = *sc as usize;
        let off = scans[pe].exclusive[0] as usize;
        for j in 1..r {
            let pos = (j * total / r).wrapping_sub(1);
            if total > 0 && (off..off + run.len()).contains(&pos) {
                put_varint(&mut buf, j as u64);
                put_bytes(&mut buf, run.get(pos - off));
            }
        }
        buf
    });
    let all = m.allgather(groups, pieces)?;
    all.into_iter()
        .map(|frags| {
            let mut splitters = vec![Vec::new(); r - 1];
            for f in frags {
                let mut rd = Reader::new(&f);
                while !rd.is_empty() {
                    let j = rd.varint()? as usize;
                    splitters[j - 1] = rd.bytes()?.to_vec();
                }
            }
            Ok(SplitterSet { splitters })
        })
        .collect()
}

/// Bucket bounds of one local run: bucket `j` is `bounds[j]..bounds[j+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketPartition {
    pub bounds: Vec<usize>,
}

impl BucketPartition {
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, j: usize) -> Range<usize> {
        self.bounds[j]..self.bounds[j + 1]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Splits a sorted run by `f_j < s <= f_{j+1}`, comparing bytes only.
pub fn make_buckets(run: &SortedRun, splitters: &SplitterSet) -> BucketPartition {
    let mut bounds = Vec::with_capacity(splitters.buckets() + 1);
    bounds.push(0);
    for f in &splitters.splitters {
        let b = run.upper_bound(f).max(*bounds.last().unwrap());
        bounds.push(b);
    }
    bounds.push(run.len());
    BucketPartition { bounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{oracle_sort, random_strings, split_even};
    use crate::strcore::{local_sort, StringArena};

    fn run_of(strings: &[&str]) -> SortedRun {
        local_sort(&StringArena::from_strings(strings).unwrap()).run
    }

    fn samples_from(arenas: Vec<StringArena>) -> Vec<SampleSet> {
        arenas
            .into_iter()
            .enumerate()
            .map(|(pe, a)| {
                let tags = (0..a.len() as u64).map(|i| (pe as u64) << 32 | i).collect();
                SampleSet { arena: a, tags }
            })
            .collect()
    }

    #[test]
    fn every_second_sample() {
        let arenas = split_even(&StringArena::from_strings(["h", "c", "a", "f", "e", "b", "g", "d"]).unwrap(), 2);
        let mut m = Machine::new(2, 1).unwrap();
        let s = compute_splitters(&mut m, &Groups::whole(2), samples_from(arenas), 4).unwrap();
        let want = SplitterSet { splitters: vec![b"b".to_vec(), b"d".to_vec(), b"f".to_vec()] };
        assert_eq!(s, vec![want.clone(), want]);
    }

    #[test]
    fn single_bucket_has_no_splitters() {
        let mut m = Machine::new(2, 1).unwrap();
        let s = compute_splitters(&mut m, &Groups::whole(2), vec![SampleSet::default(); 2], 1).unwrap();
        assert!(s.iter().all(|x| x.splitters.is_empty()));
    }

    #[test]
    fn matches_sequential_oracle_in_groups() {
        let a = random_strings(8 * 37, 1, 6, 3, 8);
        let arenas = split_even(&a, 8);
        let groups = Groups::split(8, 2).unwrap();
        let mut m = Machine::new(8, 1).unwrap();
        let s = compute_splitters(&mut m, &groups, samples_from(arenas.clone()), 8).unwrap();
        for r in groups.ranges() {
            let local = StringArena::concat(arenas[r.clone()].iter());
            let o = oracle_sort(&local);
            let v = o.run.len();
            let want: Vec<Vec<u8>> = (1..8).map(|j| o.run.get(j * v / 8 - 1).to_vec()).collect();
            for pe in r.clone() {
                assert_eq!(s[pe].splitters, want);
            }
        }
    }

    #[test]
    fn too_few_samples() {
        let mut m = Machine::new(2, 1).unwrap();
        let arenas = vec![StringArena::from_strings(["a"]).unwrap(), StringArena::new()];
        let e = compute_splitters(&mut m, &Groups::whole(2), samples_from(arenas), 4);
        assert!(matches!(e, Err(Error::TooFewSamples { samples: 1, r: 4 })));
    }

    #[test]
    fn empty_group_gets_empty_splitters() {
        let mut m = Machine::new(2, 1).unwrap();
        let s = compute_splitters(&mut m, &Groups::whole(2), vec![SampleSet::default(); 2], 3).unwrap();
        assert_eq!(s[0].splitters, vec![Vec::<u8>::new(); 2]);
    }

    #[test]
    fn bucket_boundaries_are_inclusive_above() {
        let run = run_of(&["a", "b", "c"]);
        let b = make_buckets(&run, &SplitterSet { splitters: vec![b"b".to_vec()] });
        assert_eq!((b.range(0), b.range(1)), (0..2, 2..3));
        let b = make_buckets(&run, &SplitterSet { splitters: vec![b"z".to_vec(), b"zz".to_vec()] });
        assert_eq!(b.sizes(), vec![3, 0, 0]);
        let b = make_buckets(&run, &SplitterSet { splitters: vec![b"b".to_vec(), b"b".to_vec()] });
        assert_eq!(b.sizes(), vec![2, 0, 1]);
    }
}
