//! Synthetic inputs, corpus files and the sequential ground truth.

mod file;
mod generate;

pub use file::{read_corpus, read_corpus_auto, write_corpus, CorpusFormat, CORPUS_MAGIC};
pub use generate::{all_equal_length, duplicate_heavy, generate_dn, random_strings, DnSpec};

use crate::strcore::{distinguishing_prefixes, DistPrefixes, LocalSort, SortedRun, StringArena};

/// Ground-truth sort: a generic comparison sort that is stable by input
/// index, with the LCP array recomputed pairwise.
pub fn oracle_sort(arena: &StringArena) -> LocalSort {
    let mut perm: Vec<usize> = (0..arena.len()).collect();
    perm.sort_by(|&a, &b| arena.get(a).cmp(arena.get(b)));
    let sorted = arena.select(perm.iter().copied());
    LocalSort {
        run: SortedRun::from_sorted_arena(sorted, None),
        perm,
    }
}

/// Distinguishing prefixes of an unsorted input, reported in sorted order.
pub fn measure_dist_prefixes(arena: &StringArena) -> DistPrefixes {
    distinguishing_prefixes(&oracle_sort(arena).run)
}

/// Distinguishing prefix length of every string, in input order.
pub fn dist_prefixes_by_input(arena: &StringArena) -> Vec<u32> {
    let o = oracle_sort(arena);
    let d = distinguishing_prefixes(&o.run);
    let mut out = vec![0; arena.len()];
    for (rank, &i) in o.perm.iter().enumerate() {
        out[i] = d.lengths[rank];
    }
    out
}

/// Measured `D / N` of an input.
pub fn dn_ratio(arena: &StringArena) -> f64 {
    measure_dist_prefixes(arena).ratio(arena.total_chars())
}

/// Splits an input into `p` contiguous blocks whose sizes differ by at most one.
pub fn split_even(arena: &StringArena, p: usize) -> Vec<StringArena> {
    let n = arena.len();
    (0..p)
        .map(|pe| {
            let lo = pe * n / p;
            let hi = (pe + 1) * n / p;
            arena.select(lo..hi)
        })
        .collect()
}
