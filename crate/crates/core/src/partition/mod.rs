//! Regular sampling, splitter selection, bucket formation and the two
//! string assignment strategies of one recursion level.

mod assignment;
mod sampling;
mod splitters;

pub use assignment::{
    bounded_assignment, bounded_plan, grid_assignment, grid_plan, BucketShape, MessagePlan, PlanEntry, SenderPlan,
};
pub use sampling::{draw_samples, SampleSet, SamplingMode};
pub use splitters::{compute_splitters, make_buckets, BucketPartition, SplitterSet};

/// Sampling configuration of a sort; `factor` is `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    pub factor: usize,
}

impl SamplingConfig {
    /// `v = 2kr` with the largest split factor `r` of a `k`-level schedule.
    pub fn default_for(mode: SamplingMode, schedule: &[usize]) -> Self {
        let r = schedule.iter().copied().max().unwrap_or(1);
        SamplingConfig { mode, factor: (2 * schedule.len().max(1) * r).max(1) }
    }
}
