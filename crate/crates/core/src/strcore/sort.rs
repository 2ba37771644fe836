//! Multikey quicksort that emits the LCP array as it sorts.

use super::{lcp, SortedRun, StringArena};

const INSERTION_THRESHOLD: usize = 32;

/// Sorted run plus the permutation witness: `perm[i]` is the input index of
/// the `i`-th output string.
#[derive(Clone, Debug)]
pub struct LocalSort {
    pub run: SortedRun,
    pub perm: Vec<usize>,
}

/// Stable lexicographic sort; equal strings keep their input order.
pub fn local_sort(arena: &StringArena) -> LocalSort {
    let (order, lcps) = sort_ids(arena, |id| (0u64, id));
    finish(arena, order, lcps, None)
}

/// Sorts by `(string, tag)`, falling back to input order on equal tags.
pub fn local_sort_tagged(arena: &StringArena, tags: &[u64]) -> LocalSort {
    assert_eq!(arena.len(), tags.len());
    let (order, lcps) = sort_ids(arena, |id| (tags[id as usize], id));
    let sorted_tags = order.iter().map(|&i| tags[i as usize]).collect();
    finish(arena, order, lcps, Some(sorted_tags))
}

fn finish(arena: &StringArena, order: Vec<u32>, lcps: Vec<u32>, tags: Option<Vec<u64>>) -> LocalSort {
    let perm: Vec<usize> = order.iter().map(|&i| i as usize).collect();
    let sorted = arena.select(perm.iter().copied());
    LocalSort {
        run: SortedRun::from_parts(sorted, lcps, tags),
        perm,
    }
}

fn sort_ids<K: Ord>(arena: &StringArena, tie: impl Fn(u32) -> K) -> (Vec<u32>, Vec<u32>) {
    let n = arena.len();
    assert!(n <= u32::MAX as usize, "too many strings for one arena");
    let strs: Vec<&[u8]> = arena.iter().collect();
    let mut ids: Vec<u32> = (0..n as u32).collect();
    let mut lcps = vec![0u32; n];
    mkqs(&strs, &mut ids, &mut lcps, 0, &tie);
    if let Some(first) = lcps.first_mut() {
        *first = 0;
    }
    (ids, lcps)
}

#[inline]
fn char_at(s: &[u8], depth: usize) -> u8 {
    s.get(depth).copied().unwrap_or(0)
}

/// Sorts `ids`, all of whose strings share a `depth`-character prefix, and
/// fills `lcps[1..]` for the segment. `lcps[0]` belongs to the caller.
fn mkqs<K: Ord>(strs: &[&[u8]], ids: &mut [u32], lcps: &mut [u32], mut depth: usize, tie: &impl Fn(u32) -> K) {
    let mut ids = ids;
    let mut lcps = lcps;
    loop {
        let n = ids.len();
        if n <= 1 {
            return;
        }
        if n < INSERTION_THRESHOLD {
            insertion_sort(strs, ids, lcps, depth, tie);
            return;
        }
        let pivot = median3(
            char_at(strs[ids[0] as usize], depth),
            char_at(strs[ids[n / 2] as usize], depth),
            char_at(strs[ids[n - 1] as usize], depth),
        );
        // Three-way partition: [0, lt) < pivot, [lt, gt) == pivot, [gt, n) > pivot.
        let (mut lt, mut i, mut gt) = (0, 0, n);
        while i < gt {
            let c = char_at(strs[ids[i] as usize], depth);
            if c < pivot {
                ids.swap(lt, i);
                lt += 1;
                i += 1;
            } else if c > pivot {
                gt -= 1;
                ids.swap(i, gt);
            } else {
                i += 1;
            }
        }
        if lt > 0 {
            lcps[lt] = depth as u32;
        }
        if gt < n {
            lcps[gt] = depth as u32;
        }
        let (left, rest) = std::mem::take(&mut ids).split_at_mut(lt);
        let (mid, right) = rest.split_at_mut(gt - lt);
        let (lcp_left, lcp_rest) = std::mem::take(&mut lcps).split_at_mut(lt);
        let (lcp_mid, lcp_right) = lcp_rest.split_at_mut(gt - lt);
        mkqs(strs, left, lcp_left, depth, tie);
        mkqs(strs, right, lcp_right, depth, tie);
        if pivot == 0 {
            // Every string in the middle ended here: they are all equal.
            mid.sort_by_key(|&id| tie(id));
            for h in lcp_mid.iter_mut().skip(1) {
                *h = depth as u32;
            }
            return;
        }
        ids = mid;
        lcps = lcp_mid;
        depth += 1;
    }
}

fn median3(a: u8, b: u8, c: u8) -> u8 {
    if a < b {
        if b < c {
            b
        } else if a < c {
            c
        } else {
            a
        }
    } else if a < c {
        a
    } else if b < c {
        c
    } else {
        b
    }
}

fn insertion_sort<K: Ord>(strs: &[&[u8]], ids: &mut [u32], lcps: &mut [u32], depth: usize, tie: &impl Fn(u32) -> K) {
    let less = |a: u32, b: u32| {
        let (sa, sb) = (&strs[a as usize][depth..], &strs[b as usize][depth..]);
        sa.cmp(sb).then_with(|| tie(a).cmp(&tie(b))).is_lt()
    };
    for i in 1..ids.len() {
        let mut j = i;
        while j > 0 && less(ids[j], ids[j - 1]) {
            ids.swap(j, j - 1);
            j -= 1;
        }
    }
    for i in 1..ids.len() {
        let (a, b) = (strs[ids[i - 1] as usize], strs[ids[i] as usize]);
        lcps[i] = (depth + lcp(&a[depth..], &b[depth..])) as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn strings(a: &StringArena) -> Vec<Vec<u8>> {
        a.to_vecs()
    }

    #[test]
    fn small_example() {
        let a = StringArena::from_strings(["b", "a", "ab"]).unwrap();
        let out = local_sort(&a);
        assert_eq!(strings(out.run.arena()), vec![b"a".to_vec(), b"ab".to_vec(), b"b".to_vec()]);
        assert_eq!(out.run.lcps(), &[0, 1, 0]);
        assert_eq!(out.perm, vec![1, 2, 0]);
    }

    #[test]
    fn sorted_input_gives_identity() {
        let a = StringArena::from_strings((0..200).map(|i| format!("{i:05}"))).unwrap();
        let out = local_sort(&a);
        assert_eq!(out.perm, (0..200).collect::<Vec<_>>());
        out.run.validate().unwrap();
    }

    // Oracle: generic comparison sort of (string, index) plus pairwise LCPs.
    fn oracle(input: &[Vec<u8>]) -> (Vec<usize>, Vec<u32>) {
        let mut idx: Vec<usize> = (0..input.len()).collect();
        idx.sort_by(|&a, &b| input[a].cmp(&input[b]).then(a.cmp(&b)));
        let lcps = (0..idx.len())
            .map(|i| if i == 0 { 0 } else { lcp(&input[idx[i - 1]], &input[idx[i]]) as u32 })
            .collect();
        (idx, lcps)
    }

    #[test]
    fn thousand_random_strings_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let input: Vec<Vec<u8>> = (0..1000)
            .map(|_| {
                let len = rng.gen_range(0..20);
                (0..len).map(|_| rng.gen_range(b'a'..=b'd')).collect()
            })
            .collect();
        let arena = StringArena::from_strings(&input).unwrap();
        let out = local_sort(&arena);
        let (perm, lcps) = oracle(&input);
        assert_eq!(out.perm, perm);
        assert_eq!(out.run.lcps(), &lcps[..]);
    }

    #[test]
    fn tags_break_ties() {
        let a = StringArena::from_strings(["x", "x", "w", "x"]).unwrap();
        let out = local_sort_tagged(&a, &[9, 1, 5, 4]);
        assert_eq!(out.perm, vec![2, 1, 3, 0]);
        assert_eq!(out.run.tags().unwrap(), &[5, 1, 4, 9]);
        out.run.validate().unwrap();
    }

    proptest! {
        #[test]
        fn output_is_sorted_permutation(input in prop::collection::vec(
            prop::collection::vec(1u8..5, 0..40), 0..300)) {
            let arena = StringArena::from_strings(&input).unwrap();
            let out = local_sort(&arena);
            out.run.validate().unwrap();
            let (perm, _) = oracle(&input);
            prop_assert_eq!(out.perm, perm);
        }
    }
}
