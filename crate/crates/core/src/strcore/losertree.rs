//! r-way merging with an LCP-aware loser tree.
//!
//! Every player keeps `h`, the LCP of its current string with the most
//! recently emitted string. Two players whose `h` differ are ordered without
//! touching characters; only equal `h` values require a character scan, which
//! starts at `h`.

use super::{SortedRun, StringArena};
use std::cmp::Ordering;

struct Player<'a> {
    run: &'a SortedRun,
    pos: usize,
    h: u32,
}

impl Player<'_> {
    fn done(&self) -> bool {
        self.pos >= self.run.len()
    }

    fn current(&self) -> &[u8] {
        self.run.get(self.pos)
    }
}

struct LoserTree<'a> {
    players: Vec<Player<'a>>,
    /// `tree[0]` is the overall winner; `tree[1..size]` hold losers.
    tree: Vec<usize>,
    size: usize,
    tagged: bool,
}

impl<'a> LoserTree<'a> {
    fn new(runs: &'a [SortedRun]) -> Self {
        let size = runs.len().next_power_of_two();
        let players = runs.iter().map(|run| Player { run, pos: 0, h: 0 }).collect();
        let tagged = runs.iter().all(SortedRun::is_tagged);
        let mut t = Self {
            players,
            tree: vec![usize::MAX; size],
            size,
            tagged,
        };
        // Bottom-up tournament over the leaves; usize::MAX marks a padding leaf.
        let mut winners = vec![usize::MAX; 2 * size];
        for (i, w) in winners[size..size + runs.len()].iter_mut().enumerate() {
            *w = i;
        }
        for node in (1..size).rev() {
            let (w, l) = t.play(winners[2 * node], winners[2 * node + 1]);
            winners[node] = w;
            t.tree[node] = l;
        }
        t.tree[0] = winners[1];
        t
    }

    fn is_out(&self, p: usize) -> bool {
        p == usize::MAX || self.players[p].done()
    }

    /// Returns `(winner, loser)` and updates the loser's `h` so that it is
    /// relative to the winner.
    fn play(&mut self, a: usize, b: usize) -> (usize, usize) {
        match (self.is_out(a), self.is_out(b)) {
            (true, true) => return (a.min(b), a.max(b)),
            (true, false) => return (b, a),
            (false, true) => return (a, b),
            _ => {}
        }
        let (ha, hb) = (self.players[a].h, self.players[b].h);
        match ha.cmp(&hb) {
            Ordering::Greater => (a, b),
            Ordering::Less => (b, a),
            Ordering::Equal => {
                let pa = &self.players[a];
                let pb = &self.players[b];
                let (sa, sb) = (pa.current(), pb.current());
                let h = ha as usize;
                let l = h + super::lcp(&sa[h..], &sb[h..]);
                let ca = sa.get(l).copied().unwrap_or(0);
                let cb = sb.get(l).copied().unwrap_or(0);
                let a_first = match ca.cmp(&cb) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let (ta, tb) = if self.tagged {
                            (pa.run.tag(pa.pos), pb.run.tag(pb.pos))
                        } else {
                            (0, 0)
                        };
                        (ta, a) < (tb, b)
                    }
                };
                let (w, lo) = if a_first { (a, b) } else { (b, a) };
                self.players[lo].h = l as u32;
                (w, lo)
            }
        }
    }

    fn replay(&mut self, leaf: usize) {
        let mut cand = leaf;
        let mut node = (leaf + self.size) / 2;
        while node >= 1 {
            let (w, l) = self.play(cand, self.tree[node]);
            self.tree[node] = l;
            cand = w;
            node /= 2;
        }
        self.tree[0] = cand;
    }
}

/// Merges sorted runs into one sorted run with a valid LCP array.
///
/// Equal strings are ordered by tag (when every run is tagged) and then by
/// run index, so the merge is stable with respect to the input order.
pub fn losertree_merge(runs: &[SortedRun]) -> SortedRun {
    let tagged = !runs.is_empty() && runs.iter().all(SortedRun::is_tagged);
    match runs.len() {
        0 => return SortedRun::empty(false),
        1 => return runs[0].clone(),
        _ => {}
    }
    let total: usize = runs.iter().map(SortedRun::len).sum();
    let chars: u64 = runs.iter().map(SortedRun::total_chars).sum();
    let mut arena = StringArena::with_capacity(total, chars as usize);
    let mut lcps = Vec::with_capacity(total);
    let mut tags = tagged.then(|| Vec::with_capacity(total));

    let mut lt = LoserTree::new(runs);
    for _ in 0..total {
        let w = lt.tree[0];
        debug_assert!(!lt.is_out(w));
        let p = &mut lt.players[w];
        arena.push_unchecked(p.current());
        lcps.push(if lcps.is_empty() { 0 } else { p.h });
        if let Some(t) = tags.as_mut() {
            t.push(p.run.tag(p.pos));
        }
        p.pos += 1;
        if !p.done() {
            p.h = p.run.lcps()[p.pos];
        }
        lt.replay(w);
    }
    SortedRun::from_parts(arena, lcps, tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strcore::{local_sort, local_sort_tagged};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(strings: &[&str]) -> SortedRun {
        local_sort(&StringArena::from_strings(strings).unwrap()).run
    }

    #[test]
    fn single_run_is_identity() {
        let r = sorted(&["a", "ab", "c"]);
        assert_eq!(losertree_merge(std::slice::from_ref(&r)), r);
    }

    #[test]
    fn two_runs() {
        let out = losertree_merge(&[sorted(&["a", "c"]), sorted(&["b", "d"])]);
        assert_eq!(out.arena().to_vecs(), ["a", "b", "c", "d"].map(|s| s.as_bytes().to_vec()));
        assert_eq!(out.lcps(), &[0, 0, 0, 0]);
    }

    #[test]
    fn empty_and_exhausted_runs() {
        let out = losertree_merge(&[SortedRun::empty(false), sorted(&["x"]), SortedRun::empty(false)]);
        assert_eq!(out.len(), 1);
        assert!(losertree_merge(&[]).is_empty());
    }

    #[test]
    fn equal_strings_follow_run_order() {
        let a = StringArena::from_strings(["k", "k"]).unwrap();
        let r0 = local_sort_tagged(&a, &[10, 11]).run;
        let r1 = local_sort_tagged(&a, &[3, 12]).run;
        let out = losertree_merge(&[r0, r1]);
        assert_eq!(out.tags().unwrap(), &[3, 10, 11, 12]);
        out.validate().unwrap();
    }

    fn random_runs(seed: u64, r: usize, per: usize) -> (Vec<SortedRun>, Vec<Vec<u8>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all = Vec::new();
        let runs = (0..r)
            .map(|_| {
                let strs: Vec<Vec<u8>> = (0..per)
                    .map(|_| {
                        let len = rng.gen_range(0..16);
                        (0..len).map(|_| rng.gen_range(b'a'..=b'c')).collect()
                    })
                    .collect();
                all.extend(strs.iter().cloned());
                local_sort(&StringArena::from_strings(&strs).unwrap()).run
            })
            .collect();
        (runs, all)
    }

    #[test]
    fn eight_runs_match_concatenate_and_sort() {
        let (runs, all) = random_runs(3, 8, 500);
        let merged = losertree_merge(&runs);
        merged.validate().unwrap();
        let oracle = local_sort(&StringArena::from_strings(&all).unwrap()).run;
        assert_eq!(merged.arena(), oracle.arena());
        assert_eq!(merged.lcps(), oracle.lcps());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn merge_equals_sort_of_concatenation(seed in any::<u64>(), r in 1usize..64, per in 0usize..150) {
            let (runs, all) = random_runs(seed, r, per);
            let merged = losertree_merge(&runs);
            merged.validate().unwrap();
            let oracle = local_sort(&StringArena::from_strings(&all).unwrap()).run;
            prop_assert_eq!(merged.arena(), oracle.arena());
        }
    }
}
