//! Binomial-tree collectives. All groups of a [`Groups`] run concurrently,
//! sharing supersteps; each call costs `ceil(log2 |group|)` supersteps per
//! tree pass.

use super::{Machine, Outbox};
use crate::codec::{put_bytes, put_u64s, put_varint, read_u64s, Reader};
use crate::error::{Error, Result};
use std::ops::Range;

/// Disjoint contiguous PE ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groups {
    ranges: Vec<Range<usize>>,
}

impl Groups {
    pub fn whole(p: usize) -> Self {
        Groups { ranges: std::iter::once(0..p).collect() }
    }

    /// `count` contiguous groups whose sizes differ by at most one.
    pub fn split(p: usize, count: usize) -> Result<Self> {
        if count == 0 || count > p {
            return Err(Error::EmptyGroup);
        }
        Ok(Groups { ranges: (0..count).map(|i| i * p / count..(i + 1) * p / count).collect() })
    }

    pub fn from_ranges(ranges: Vec<Range<usize>>, p: usize) -> Result<Self> {
        let mut end = 0;
        for r in &ranges {
            if r.is_empty() {
                return Err(Error::EmptyGroup);
            }
            if r.start < end || r.end > p {
                return Err(Error::Config(format!("group {r:?} overlaps or exceeds p={p}")));
            }
            end = r.end;
        }
        Ok(Groups { ranges })
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Index of the group containing `pe`.
    pub fn of(&self, pe: usize) -> Option<usize> {
        let i = self.ranges.partition_point(|r| r.end <= pe);
        (i < self.ranges.len() && self.ranges[i].contains(&pe)).then_some(i)
    }

    fn rounds(&self) -> u32 {
        self.ranges.iter().map(|r| ceil_log2(r.len())).max().unwrap_or(0)
    }
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Max,
    Min,
}

impl ReduceOp {
    fn apply(self, acc: &mut [u64], x: &[u64]) {
        for (a, &b) in acc.iter_mut().zip(x) {
            *a = match self {
                ReduceOp::Sum => *a + b,
                ReduceOp::Max => (*a).max(b),
                ReduceOp::Min => (*a).min(b),
            };
        }
    }
}

/// Result of an exclusive prefix sum.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scan {
    pub exclusive: Vec<u64>,
    pub total: Vec<u64>,
}

fn lanes(b: &[u8]) -> Result<Vec<u64>> {
    read_u64s(&mut Reader::new(b))
}

fn encode_items(items: &[(usize, Vec<u8>)]) -> Vec<u8> {
    let mut buf = Vec::new();
    put_varint(&mut buf, items.len() as u64);
    for (pe, b) in items {
        put_varint(&mut buf, *pe as u64);
        put_bytes(&mut buf, b);
    }
    buf
}

fn decode_items(bytes: &[u8]) -> Result<Vec<(usize, Vec<u8>)>> {
    let mut r = Reader::new(bytes);
    let n = r.varint()? as usize;
    let mut out = Vec::with_capacity(n.min(bytes.len()));
    for _ in 0..n {
        let pe = r.varint()? as usize;
        out.push((pe, r.bytes()?.to_vec()));
    }
    Ok(out)
}

impl Machine {
    /// One tree pass towards the group roots. In round `j`, relative rank
    /// `rel` with `rel mod 2^(j+1) = 2^j` hands its state to `rel - 2^j`.
    fn tree_up<T: Clone>(
        &mut self,
        groups: &Groups,
        state: &mut [T],
        encode: impl Fn(&T) -> Vec<u8>,
        mut absorb: impl FnMut(&mut T, &[u8]) -> Result<()>,
    ) -> Result<()> {
        for j in 0..groups.rounds() {
            let step = 1usize << j;
            let mut out: Vec<Outbox> = vec![Vec::new(); self.p];
            for r in groups.ranges() {
                let g = r.len();
                let mut rel = step;
                while rel < g {
                    out[r.start + rel].push((r.start + rel - step, encode(&state[r.start + rel])));
                    rel += step << 1;
                }
            }
            for (pe, inbox) in self.exchange(out)?.into_iter().enumerate() {
                for m in inbox {
                    absorb(&mut state[pe], &m.payload)?;
                }
            }
        }
        Ok(())
    }

    pub fn broadcast(&mut self, groups: &Groups, values: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        let mut have: Vec<Option<Vec<u8>>> = vec![None; self.p];
        let mut values = values;
        for r in groups.ranges() {
            have[r.start] = Some(std::mem::take(&mut values[r.start]));
        }
        for j in 0..groups.rounds() {
            let step = 1usize << j;
            let mut out: Vec<Outbox> = vec![Vec::new(); self.p];
            for r in groups.ranges() {
                for rel in 0..step.min(r.len()) {
                    if rel + step < r.len() {
                        let v = have[r.start + rel].clone().expect("holder has value");
                        out[r.start + rel].push((r.start + rel + step, v));
                    }
                }
            }
            for (pe, inbox) in self.exchange(out)?.into_iter().enumerate() {
                if let Some(m) = inbox.into_iter().next() {
                    have[pe] = Some(m.payload);
                }
            }
        }
        Ok(have.into_iter().map(Option::unwrap_or_default).collect())
    }

    /// Collects every member's payload at its group root, in PE order.
    pub fn gather(&mut self, groups: &Groups, values: Vec<Vec<u8>>) -> Result<Vec<Option<Vec<Vec<u8>>>>> {
        let mut state: Vec<Vec<(usize, Vec<u8>)>> =
            values.into_iter().enumerate().map(|(pe, v)| vec![(pe, v)]).collect();
        self.tree_up(groups, &mut state, |s| encode_items(s), |s, b| {
            s.extend(decode_items(b)?);
            Ok(())
        })?;
        let mut res = vec![None; self.p];
        for r in groups.ranges() {
            let mut items = std::mem::take(&mut state[r.start]);
            items.sort_by_key(|(pe, _)| *pe);
            res[r.start] = Some(items.into_iter().map(|(_, b)| b).collect());
        }
        Ok(res)
    }

    /// Every member ends with all payloads of its group, in PE order.
    pub fn allgather(&mut self, groups: &Groups, values: Vec<Vec<u8>>) -> Result<Vec<Vec<Vec<u8>>>> {
        let gathered = self.gather(groups, values)?;
        let roots: Vec<Vec<u8>> = gathered
            .into_iter()
            .map(|g| {
                g.map(|items| encode_items(&items.into_iter().enumerate().collect::<Vec<_>>()))
                    .unwrap_or_default()
            })
            .collect();
        let all = self.broadcast(groups, roots)?;
        let mut res = vec![Vec::new(); self.p];
        for r in groups.ranges() {
            for pe in r.clone() {
                res[pe] = decode_items(&all[pe])?.into_iter().map(|(_, b)| b).collect();
            }
        }
        Ok(res)
    }

    /// Element-wise reduction over `u64` lanes; every member gets the result.
    pub fn allreduce(&mut self, groups: &Groups, values: Vec<Vec<u64>>, op: ReduceOp) -> Result<Vec<Vec<u64>>> {
        let mut state = values;
        self.tree_up(
            groups,
            &mut state,
            |s| {
                let mut b = Vec::new();
                put_u64s(&mut b, s);
                b
            },
            |s, b| {
                op.apply(s, &lanes(b)?);
                Ok(())
            },
        )?;
        let roots = state
            .iter()
            .map(|s| {
                let mut b = Vec::new();
                put_u64s(&mut b, s);
                b
            })
            .collect();
        let mut res = vec![Vec::new(); self.p];
        let all = self.broadcast(groups, roots)?;
        for r in groups.ranges() {
            for pe in r.clone() {
                res[pe] = lanes(&all[pe])?;
            }
        }
        Ok(res)
    }

    /// Exclusive prefix sums over `u64` lanes plus the group total:
    /// a gather to the root followed by a binomial scatter.
    pub fn scan(&mut self, groups: &Groups, values: Vec<Vec<u64>>) -> Result<Vec<Scan>> {
        let encoded = values
            .iter()
            .map(|v| {
                let mut b = Vec::new();
                put_u64s(&mut b, v);
                b
            })
            .collect();
        let gathered = self.gather(groups, encoded)?;
        // Per PE: (pe, encoded Scan) items still to be delivered.
        let mut held: Vec<Vec<(usize, Vec<u8>)>> = vec![Vec::new(); self.p];
        for r in groups.ranges() {
            let members = gathered[r.start].as_ref().expect("root gathered");
            let lanes: Vec<Vec<u64>> = members.iter().map(|b| lanes(b)).collect::<Result<_>>()?;
            let width = lanes.iter().map(Vec::len).max().unwrap_or(0);
            let mut acc = vec![0u64; width];
            let mut excl = Vec::with_capacity(lanes.len());
            for l in &lanes {
                excl.push(acc.clone());
                ReduceOp::Sum.apply(&mut acc, l);
            }
            held[r.start] = excl
                .into_iter()
                .enumerate()
                .map(|(rel, e)| {
                    let mut b = Vec::new();
                    put_u64s(&mut b, &e);
                    put_u64s(&mut b, &acc);
                    (r.start + rel, b)
                })
                .collect();
        }
        for j in (0..groups.rounds()).rev() {
            let step = 1usize << j;
            let mut out: Vec<Outbox> = vec![Vec::new(); self.p];
            for r in groups.ranges() {
                let mut rel = 0;
                while rel + step < r.len() {
                    let pe = r.start + rel;
                    let lo = pe + step;
                    let (give, keep): (Vec<_>, Vec<_>) =
                        std::mem::take(&mut held[pe]).into_iter().partition(|(q, _)| *q >= lo);
                    held[pe] = keep;
                    out[pe].push((lo, encode_items(&give)));
                    rel += step << 1;
                }
            }
            for (pe, inbox) in self.exchange(out)?.into_iter().enumerate() {
                for m in inbox {
                    held[pe].extend(decode_items(&m.payload)?);
                }
            }
        }
        let mut res = vec![Scan::default(); self.p];
        for (pe, items) in held.into_iter().enumerate() {
            for (q, b) in items {
                debug_assert_eq!(q, pe);
                let mut r = Reader::new(&b);
                let e = read_u64s(&mut r)?;
                let t = read_u64s(&mut r)?;
                res[pe] = Scan { exclusive: e, total: t };
            }
        }
        Ok(res)
    }

    /// Scalar exclusive prefix sum.
    pub fn prefix_sum(&mut self, groups: &Groups, values: Vec<u64>) -> Result<Vec<u64>> {
        let res = self.scan(groups, values.into_iter().map(|v| vec![v]).collect())?;
        Ok(res.into_iter().map(|s| s.exclusive.first().copied().unwrap_or(0)).collect())
    }
}
