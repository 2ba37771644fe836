//! Sequential string primitives.

mod arena;
mod compress;
mod dprefix;
mod losertree;
mod run;
mod sort;

pub use arena::StringArena;
pub use compress::{lcp_compress, lcp_decompress, CompressedRun};
pub use dprefix::{distinguishing_prefixes, DistPrefixes};
pub use losertree::losertree_merge;
pub use run::{decode_run, encode_run, SortedRun};
pub use sort::{local_sort, local_sort_tagged, LocalSort};

use std::cmp::Ordering;

/// Number of leading equal characters of `a` and `b`.
pub fn lcp(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Lexicographic order with tags breaking ties between equal strings.
pub fn cmp_tagged(a: &[u8], ta: u64, b: &[u8], tb: u64) -> Ordering {
    a.cmp(b).then(ta.cmp(&tb))
}
