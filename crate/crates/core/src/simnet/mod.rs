//! Deterministic bulk-synchronous machine with `p` virtual PEs.
//!
//! PE-local work runs in parallel (or sequentially, with identical results);
//! every cross-PE effect is an envelope delivered at the end of a superstep
//! and charged to the current phase of the [`CommLedger`].

mod collectives;
mod grid;
mod ledger;

pub use collectives::{Groups, ReduceOp, Scan};
pub use grid::{balanced_dims, Grid};
pub use ledger::{CommLedger, PeCounters, PhaseLedger};

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use xxhash_rust::xxh3::xxh3_64_with_seed;

/// An inbox entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub src: usize,
    pub payload: Vec<u8>,
}

/// Outgoing `(dst, payload)` pairs of one PE, in send order.
pub type Outbox = Vec<(usize, Vec<u8>)>;

/// `(source, destination, payload)` in flight through the grid.
type Held = (usize, usize, Vec<u8>);

#[derive(Debug, Clone)]
pub struct Machine {
    p: usize,
    seed: u64,
    parallel: bool,
    phase: String,
    ledger: CommLedger,
}

impl Machine {
    pub fn new(p: usize, seed: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("a machine needs at least one PE".into()));
        }
        Ok(Machine { p, seed, parallel: true, phase: "default".into(), ledger: CommLedger::new(p) })
    }

    /// Runs PE-local work on the calling thread only.
    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> CommLedger {
        self.ledger
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn set_phase(&mut self, name: impl Into<String>) {
        self.phase = name.into();
    }

    /// Runs `f` with the phase set to `name`, restoring the previous phase.
    pub fn in_phase<R>(&mut self, name: impl Into<String>, f: impl FnOnce(&mut Self) -> R) -> R {
        let prev = std::mem::replace(&mut self.phase, name.into());
        let r = f(self);
        self.phase = prev;
        r
    }

    /// PE-local generator, a pure function of `(seed, pe, label)`.
    pub fn rng(&self, pe: usize, label: &str) -> ChaCha8Rng {
        let mut key = Vec::with_capacity(8 + label.len());
        key.extend_from_slice(&(pe as u64).to_le_bytes());
        key.extend_from_slice(label.as_bytes());
        ChaCha8Rng::seed_from_u64(xxh3_64_with_seed(&key, self.seed))
    }

    /// Applies `f` to every PE's item, possibly concurrently; results are in PE order.
    pub fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync + Send,
    {
        if self.parallel {
            items.into_par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
        } else {
            items.into_iter().enumerate().map(|(i, t)| f(i, t)).collect()
        }
    }

    pub fn map_ref<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        if self.parallel {
            items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
        } else {
            items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
        }
    }

    /// Delivers one superstep of messages. Inboxes are ordered by
    /// `(src, send order)`.
    pub fn exchange(&mut self, outboxes: Vec<Outbox>) -> Result<Vec<Vec<Message>>> {
        assert_eq!(outboxes.len(), self.p, "one outbox per PE");
        let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); self.p];
        let mut sent = vec![0u64; self.p];
        let mut received = vec![0u64; self.p];
        if let Some(&(dst, _)) = outboxes.iter().flatten().find(|(dst, _)| *dst >= self.p) {
            return Err(Error::DestinationOutOfRange { dst, p: self.p });
        }
        for (src, out) in outboxes.into_iter().enumerate() {
            for (dst, payload) in out {
                self.ledger.record(&self.phase, src, dst, payload.len());
                sent[src] += 1;
                received[dst] += 1;
                inboxes[dst].push(Message { src, payload });
            }
        }
        self.ledger.step(&self.phase, &sent, &received);
        Ok(inboxes)
    }

    /// Runs `step` on every PE state, then delivers what it produced.
    pub fn run_superstep<S, F>(&mut self, states: &mut [S], step: F) -> Result<Vec<Vec<Message>>>
    where
        S: Send,
        F: Fn(usize, &mut S) -> Outbox + Sync + Send,
    {
        let outboxes: Vec<Outbox> = if self.parallel {
            states.par_iter_mut().enumerate().map(|(i, s)| step(i, s)).collect()
        } else {
            states.iter_mut().enumerate().map(|(i, s)| step(i, s)).collect()
        };
        self.exchange(outboxes)
    }

    /// All-to-all over a k-dimensional grid; `payloads[src][dst]`, result
    /// `[dst][src]`. Empty payloads are not transmitted and self traffic
    /// stays local.
    pub fn grid_alltoall(&mut self, dims: &[usize], payloads: Vec<Vec<Vec<u8>>>) -> Result<Vec<Vec<Vec<u8>>>> {
        let p = self.p;
        let grid = Grid::new(dims, p)?;
        assert_eq!(payloads.len(), p);
        // Items held per PE: (origin, final destination, payload).
        let mut held: Vec<Vec<(usize, usize, Vec<u8>)>> = payloads
            .into_iter()
            .enumerate()
            .map(|(src, row)| {
                assert_eq!(row.len(), p);
                row.into_iter()
                    .enumerate()
                    .filter(|(_, b)| !b.is_empty())
                    .map(|(dst, b)| (src, dst, b))
                    .collect()
            })
            .collect();
        for t in 0..grid.rounds() {
            let grid_ref = &grid;
            let split: Vec<(Vec<Held>, Outbox)> = self.map(held, |pe, items| {
                let mut keep = Vec::new();
                let mut bundles: std::collections::BTreeMap<usize, Vec<u8>> = Default::default();
                let mut counts: std::collections::BTreeMap<usize, u64> = Default::default();
                for (src, dst, b) in items {
                    let next = grid_ref.hop(pe, dst, t);
                    if next == pe {
                        keep.push((src, dst, b));
                    } else {
                        let buf = bundles.entry(next).or_default();
                        crate::codec::put_varint(buf, src as u64);
                        crate::codec::put_varint(buf, dst as u64);
                        crate::codec::put_bytes(buf, &b);
                        *counts.entry(next).or_default() += 1;
                    }
                }
                let out = bundles
                    .into_iter()
                    .map(|(next, body)| {
                        let mut msg = Vec::with_capacity(body.len() + 4);
                        crate::codec::put_varint(&mut msg, counts[&next]);
                        msg.extend_from_slice(&body);
                        (next, msg)
                    })
                    .collect();
                (keep, out)
            });
            let (mut keeps, outs): (Vec<_>, Vec<_>) = split.into_iter().unzip();
            let inboxes = self.exchange(outs)?;
            for (pe, inbox) in inboxes.into_iter().enumerate() {
                for m in inbox {
                    let mut r = crate::codec::Reader::new(&m.payload);
                    let count = r.varint()?;
                    for _ in 0..count {
                        let src = r.varint()? as usize;
                        let dst = r.varint()? as usize;
                        let b = r.bytes()?.to_vec();
                        keeps[pe].push((src, dst, b));
                    }
                }
            }
            held = keeps;
        }
        let mut delivered = vec![vec![Vec::new(); p]; p];
        for (pe, items) in held.into_iter().enumerate() {
            for (src, dst, b) in items {
                debug_assert_eq!(dst, pe);
                delivered[dst][src] = b;
            }
        }
        Ok(delivered)
    }
}
