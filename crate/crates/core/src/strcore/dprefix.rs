use super::SortedRun;

/// Distinguishing prefix lengths of a fully sorted input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistPrefixes {
    pub lengths: Vec<u32>,
    /// `D`, the sum of all lengths.
    pub total: u64,
    /// Longest distinguishing prefix.
    pub max: u32,
}

impl DistPrefixes {
    /// `D / N` for a set with `n_chars` characters (0 for an empty set).
    pub fn ratio(&self, n_chars: u64) -> f64 {
        if n_chars == 0 {
            0.0
        } else {
            self.total as f64 / n_chars as f64
        }
    }
}

/// `d(s_i) = min(|s_i|, 1 + max(lcp[i], lcp[i+1]))`, missing neighbours
/// counting as LCP 0. The run must hold the complete input.
pub fn distinguishing_prefixes(run: &SortedRun) -> DistPrefixes {
    let n = run.len();
    let lcps = run.lcps();
    let lengths: Vec<u32> = (0..n)
        .map(|i| {
            let left = if i == 0 { 0 } else { lcps[i] };
            let right = if i + 1 < n { lcps[i + 1] } else { 0 };
            (run.get(i).len() as u32).min(1 + left.max(right))
        })
        .collect();
    let total = lengths.iter().map(|&d| d as u64).sum();
    let max = lengths.iter().copied().max().unwrap_or(0);
    DistPrefixes { lengths, total, max }
}
