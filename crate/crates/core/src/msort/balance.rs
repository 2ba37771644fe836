use serde::Serialize;
use super::{LevelStats, MsConfig};
use crate::partition::SamplingMode;

/// Observed per-level maxima next to the analytic bucket bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelBalance {
    pub level: usize,
    pub observed: LevelStats,
    /// `prod (1 + r_s/v)(1 + 1/k) * n / prod r_s` over levels `s <= t`.
    pub bucket_strings_bound: f64,
    /// Character bucket bound: the closed form
    /// `(1+r/v)^t (N/r^t + t(1+(v+1)/r) p/r^(t-1) lhat)` for uniform
    /// schedules, its per-level recursion otherwise.
    pub bucket_chars_bound: f64,
    /// `bucket_strings_bound / p''`, rounded up.
    pub strings_pe_bound: f64,
    /// `bucket_chars_bound / p'' + lhat`.
    pub chars_pe_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub mode: SamplingMode,
    pub levels: Vec<LevelBalance>,
}

impl BalanceReport {
    pub fn buckets_within_bounds(&self) -> bool {
        self.levels.iter().all(|l| match self.mode {
            SamplingMode::String => l.observed.max_bucket_strings as f64 <= l.bucket_strings_bound,
            SamplingMode::Character => l.observed.max_bucket_chars as f64 <= l.bucket_chars_bound,
        })
    }
}

/// Compares a run's level statistics with the analytic bounds for input
/// size `n` strings, `n_chars` characters and longest string `lhat`.
pub fn level_balance_report(
    stats: &[LevelStats],
    cfg: &MsConfig,
    p: usize,
    n: u64,
    n_chars: u64,
    lhat: usize,
) -> BalanceReport {
    let k = cfg.schedule.len().max(1) as f64;
    let v = cfg.sampling.factor as f64;
    let lhat = lhat as f64;
    let uniform = cfg.schedule.windows(2).all(|w| w[0] == w[1]);
    let mut strings = n as f64;
    let mut chars = n_chars as f64;
    let mut growth = 1.0;
    let mut group = p as f64;
    let mut levels = Vec::with_capacity(stats.len());
    for (t, st) in stats.iter().enumerate() {
        let r = cfg.schedule[t] as f64;
        let t1 = (t + 1) as f64;
        growth *= 1.0 + r / v;
        strings = strings * (1.0 + r / v) * (1.0 + 1.0 / k) / r;
        chars = (1.0 + r / v) * chars / r + (1.0 + (v + 1.0) / r) * group * lhat;
        let chars_bound = if uniform {
            growth * (n_chars as f64 / r.powf(t1) + t1 * (1.0 + (v + 1.0) / r) * p as f64 / r.powf(t as f64) * lhat)
        } else {
            chars
        };
        group /= r;
        levels.push(LevelBalance {
            level: t + 1,
            observed: st.clone(),
            bucket_strings_bound: strings,
            bucket_chars_bound: chars_bound,
            strings_pe_bound: (strings / group).ceil(),
            chars_pe_bound: chars_bound / group + lhat,
        });
    }
    BalanceReport { mode: cfg.sampling.mode, levels }
}
