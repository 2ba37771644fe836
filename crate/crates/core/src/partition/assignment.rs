use super::{BucketPartition, SamplingMode};
use crate::codec::{put_u64s, read_u64s, Reader};
use crate::error::Result;
use crate::simnet::{Groups, Machine};
use crate::strcore::SortedRun;
use std::ops::Range;

/// One outgoing message: strings `range` of bucket `bucket` go to `dst`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    pub dst: usize,
    pub bucket: usize,
    pub range: Range<usize>,
}

/// Outgoing messages of every PE, in send order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessagePlan {
    pub sends: Vec<Vec<PlanEntry>>,
}

impl MessagePlan {
    pub fn max_sends(&self) -> usize {
        self.sends.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_receives(&self) -> usize {
        let mut recv = std::collections::HashMap::<usize, usize>::new();
        for e in self.sends.iter().flatten() {
            *recv.entry(e.dst).or_default() += 1;
        }
        recv.into_values().max().unwrap_or(0)
    }
}

/// Receiver of bucket `j` from the PE at relative position `i` of a group
/// split into `r` sub-groups of `p2` PEs each: the PE of sub-group `j`
/// sharing the sender's row.
pub fn grid_assignment(j: usize, i: usize, p2: usize) -> usize {
    j * p2 + i % p2
}

/// Every PE sends each of its `r` buckets, empty or not, along its row.
pub fn grid_plan(groups: &Groups, buckets: &[BucketPartition]) -> MessagePlan {
    let sends = buckets
        .iter()
        .enumerate()
        .map(|(pe, b)| {
            let Some(g) = groups.of(pe) else { return Vec::new() };
            let range = &groups.ranges()[g];
            let r = b.len();
            let p2 = range.len() / r;
            (0..r)
                .map(|j| PlanEntry { dst: range.start + grid_assignment(j, pe - range.start, p2), bucket: j, range: b.range(j) })
                .collect()
        })
        .collect();
    MessagePlan { sends }
}

/// Size of one local bucket: balancing units (strings or characters) and
/// the number of strings it holds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BucketShape {
    pub units: u64,
    pub strings: u64,
}

/// Per bucket, the `(receiver, unit range)` pieces one sender ships.
pub type SenderPlan = Vec<Vec<(usize, Range<u64>)>>;

/// Assignment for one group from the shapes of all its local buckets,
/// `shapes[i][j]`. Returns, per sender `i` and bucket `j`, the receivers
/// (relative to sub-group `j`) with the unit ranges they take.
///
/// A bucket is small if `units * 2 * r * p2 <= total`; the `t`-th small
/// bucket of sub-group `j` goes whole to receiver `t / r`. Large buckets are
/// laid end to end over the receivers' residual capacities
/// `ceil(total / p2) - small load`.
pub fn bounded_plan(shapes: &[Vec<BucketShape>], r: usize, p2: usize) -> Vec<SenderPlan> {
    let senders = shapes.len();
    let mut plan = vec![vec![Vec::new(); r]; senders];
    for j in 0..r {
        let total: u64 = shapes.iter().map(|s| s[j].units).sum();
        let cap = total.div_ceil(p2 as u64);
        let mut load = vec![0u64; p2];
        let mut large = Vec::new();
        let mut t = 0usize;
        for i in 0..senders {
            let b = shapes[i][j];
            if b.strings == 0 {
                continue;
            }
            if b.units * 2 * (r * p2) as u64 <= total {
                let q = (t / r).min(p2 - 1);
                load[q] += b.units;
                plan[i][j].push((q, 0..b.units));
                t += 1;
            } else {
                large.push(i);
            }
        }
        // Consecutive residual slots: receiver q owns [cum[q], cum[q+1]).
        let mut cum = Vec::with_capacity(p2 + 1);
        let mut acc = 0u64;
        cum.push(0);
        for &l in &load {
            acc += cap.saturating_sub(l);
            cum.push(acc);
        }
        let mut offset = 0u64;
        for i in large {
            let units = shapes[i][j].units;
            let (lo, hi) = (offset, offset + units);
            let mut q = cum.partition_point(|&c| c <= lo).saturating_sub(1).min(p2 - 1);
            let mut at = lo;
            while at < hi {
                let end = if q + 1 == p2 { hi } else { cum[q + 1].min(hi) };
                if end > at {
                    plan[i][j].push((q, at - lo..end - lo));
                }
                at = end;
                q += 1;
            }
            offset = hi;
        }
    }
    plan
}

/// Bounded assignment: bucket shapes are allgathered inside each group, every
/// member evaluates [`bounded_plan`] and maps unit ranges back to strings.
/// In character mode a string goes to the receiver owning its first
/// character, so no string is ever split.
pub fn bounded_assignment(
    m: &mut Machine,
    groups: &Groups,
    runs: &[SortedRun],
    buckets: &[BucketPartition],
    mode: SamplingMode,
) -> Result<MessagePlan> {
    let p = m.p();
    let shapes: Vec<Vec<BucketShape>> = m.map_ref(buckets, |pe, b| {
        (0..b.len())
            .map(|j| {
                let range = b.range(j);
                let units = match mode {
                    SamplingMode::String => range.len() as u64,
                    SamplingMode::Character => range.map(|i| runs[pe].get(i).len() as u64).sum(),
                };
                BucketShape { units, strings: b.range(j).len() as u64 }
            })
            .collect()
    });
    let payloads = shapes
        .iter()
        .map(|s| {
            let mut b = Vec::new();
            put_u64s(&mut b, &s.iter().flat_map(|x| [x.units, x.strings]).collect::<Vec<_>>());
            b
        })
        .collect();
    let all = m.allgather(groups, payloads)?;
    let mut sends = vec![Vec::new(); p];
    for (pe, list) in all.iter().enumerate() {
        let Some(g) = groups.of(pe) else { continue };
        let range = &groups.ranges()[g];
        let r = buckets[pe].len();
        let p2 = range.len() / r;
        let group_shapes = list
            .iter()
            .map(|b| {
                let v = read_u64s(&mut Reader::new(b))?;
                Ok(v.chunks(2).map(|c| BucketShape { units: c[0], strings: c[1] }).collect())
            })
            .collect::<Result<Vec<Vec<BucketShape>>>>()?;
        let plan = bounded_plan(&group_shapes, r, p2);
        let me = pe - range.start;
        #[allow(clippy::needless_range_loop)]
        for j in 0..r {
            let b = buckets[pe].range(j);
            let pieces = &plan[me][j];
            let to_global = |q: usize| range.start + j * p2 + q;
            match mode {
                SamplingMode::String => {
                    for (q, u) in pieces {
                        let s = b.start + u.start as usize..b.start + u.end as usize;
                        sends[pe].push(PlanEntry { dst: to_global(*q), bucket: j, range: s });
                    }
                }
                SamplingMode::Character => {
                    let mut first = b.start;
                    let mut offset = 0u64;
                    let mut k = 0;
                    for idx in b.clone() {
                        while k + 1 < pieces.len() && offset >= pieces[k].1.end {
                            if idx > first {
                                sends[pe].push(PlanEntry { dst: to_global(pieces[k].0), bucket: j, range: first..idx });
                            }
                            first = idx;
                            k += 1;
                        }
                        offset += runs[pe].get(idx).len() as u64;
                    }
                    if b.end > first {
                        sends[pe].push(PlanEntry { dst: to_global(pieces[k].0), bucket: j, range: first..b.end });
                    }
                }
            }
        }
    }
    Ok(MessagePlan { sends })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes(units: &[&[u64]]) -> Vec<Vec<BucketShape>> {
        units.iter().map(|row| row.iter().map(|&u| BucketShape { units: u, strings: u }).collect()).collect()
    }

    fn loads(plan: &[SenderPlan], j: usize, p2: usize) -> Vec<u64> {
        let mut l = vec![0; p2];
        for sender in plan {
            for (q, u) in &sender[j] {
                l[*q] += u.end - u.start;
            }
        }
        l
    }

    #[test]
    fn grid_mapping() {
        assert_eq!(grid_assignment(1, 1, 2), 3);
        assert_eq!(grid_assignment(0, 3, 2), 1);
        assert_eq!(grid_assignment(0, 5, 1), 0);
        let all: Vec<(usize, usize)> = (0..4).flat_map(|i| (0..2).map(move |j| (i, grid_assignment(j, i, 2)))).collect();
        assert_eq!(all, vec![(0, 0), (0, 2), (1, 1), (1, 3), (2, 0), (2, 2), (3, 1), (3, 3)]);
    }

    #[test]
    fn equal_buckets_map_naturally() {
        let plan = bounded_plan(&shapes(&[&[10, 10], &[10, 10]]), 2, 1);
        for (i, row) in plan.iter().enumerate() {
            for (j, pieces) in row.iter().enumerate() {
                assert_eq!(pieces.len(), 1, "sender {i} bucket {j}");
            }
        }
    }

    #[test]
    fn one_sender_holding_everything_splits_at_most_three_ways() {
        let plan = bounded_plan(&shapes(&[&[100, 0], &[0, 50], &[0, 50], &[0, 0]]), 2, 2);
        assert!(plan[0][0].len() <= 3);
        assert_eq!(loads(&plan, 0, 2), vec![50, 50]);
        assert_eq!(loads(&plan, 1, 2), vec![50, 50]);
    }

    #[test]
    fn balanced_to_ceiling() {
        let rows: Vec<Vec<u64>> = (0..8u64).map(|i| vec![3 + i * 7 % 11, 40 + i, 1]).collect();
        let sh = shapes(&rows.iter().map(Vec::as_slice).collect::<Vec<_>>());
        let r = 3;
        let p2 = 2;
        let plan = bounded_plan(&sh[..6], r, p2);
        for j in 0..r {
            let total: u64 = sh[..6].iter().map(|s| s[j].units).sum();
            assert_eq!(loads(&plan, j, p2).iter().sum::<u64>(), total);
            assert!(loads(&plan, j, p2).iter().all(|&l| l <= total.div_ceil(p2 as u64)));
            for sender in &plan {
                assert!(sender[j].len() <= 3);
            }
        }
    }
}
