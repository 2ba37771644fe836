//! Multi-level distributed string merge sort.
//!
//! After a local sort, each of the `k` levels partitions every PE group into
//! `r_t` sub-groups: regular sampling and splitter selection, an assignment
//! of local buckets to receivers, one direct exchange superstep, and an LCP
//! loser-tree merge of everything received.

mod balance;

pub use balance::{level_balance_report, BalanceReport, LevelBalance};

use serde::Serialize;
use crate::error::{Error, Result};
use crate::partition::{
    bounded_assignment, compute_splitters, draw_samples, grid_plan, make_buckets, MessagePlan, SamplingConfig,
    SamplingMode,
};
use crate::simnet::{balanced_dims, Groups, Machine};
use crate::strcore::{decode_run, encode_run, local_sort, local_sort_tagged, losertree_merge, SortedRun, StringArena};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Assignment {
    Grid,
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MsConfig {
    /// Split factors `r_1..r_k`; their product is `p`.
    pub schedule: Vec<usize>,
    pub sampling: SamplingConfig,
    pub assignment: Assignment,
    pub lcp_compression: bool,
}

impl MsConfig {
    /// `k` levels with near-equal factors, `v = 2kr`, grid assignment.
    pub fn new(p: usize, k: usize) -> Self {
        let schedule = default_schedule(p, k);
        MsConfig {
            sampling: SamplingConfig::default_for(SamplingMode::String, &schedule),
            schedule,
            assignment: Assignment::Grid,
            lcp_compression: false,
        }
    }

    pub fn with_schedule(mut self, schedule: Vec<usize>) -> Self {
        self.sampling = SamplingConfig::default_for(self.sampling.mode, &schedule);
        self.schedule = schedule;
        self
    }

    pub fn with_sampling(mut self, mode: SamplingMode) -> Self {
        self.sampling.mode = mode;
        self
    }

    pub fn with_assignment(mut self, a: Assignment) -> Self {
        self.assignment = a;
        self
    }

    pub fn with_compression(mut self, on: bool) -> Self {
        self.lcp_compression = on;
        self
    }

    pub fn levels(&self) -> usize {
        self.schedule.len()
    }
}

/// Near-equal split factors, largest first; unit factors are dropped, so a
/// `p` with few divisors gets fewer levels.
pub fn default_schedule(p: usize, k: usize) -> Vec<usize> {
    balanced_dims(p, k.max(1)).into_iter().filter(|&f| f > 1).collect()
}

pub fn validate_schedule(schedule: &[usize], p: usize) -> Result<()> {
    if schedule.contains(&0) || schedule.iter().product::<usize>() != p {
        return Err(Error::BadSchedule { schedule: schedule.to_vec(), p });
    }
    Ok(())
}

/// What one level did, measured by the driver (not by the PEs).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    pub r: usize,
    pub group_size: usize,
    pub max_bucket_strings: u64,
    pub max_bucket_chars: u64,
    pub max_strings_pe: u64,
    pub max_chars_pe: u64,
    pub max_sends: usize,
    pub max_receives: usize,
    /// Largest `received chars - ||B^j|| / p''` over all receivers.
    pub max_char_overshoot: f64,
    /// Largest `received strings - ceil(|B^j| / p'')` over all receivers.
    pub max_string_overshoot: i64,
}

#[derive(Clone, Debug)]
pub struct MsOutput {
    pub runs: Vec<SortedRun>,
    pub levels: Vec<LevelStats>,
}

pub fn ms_sort(m: &mut Machine, arenas: Vec<StringArena>, cfg: &MsConfig) -> Result<MsOutput> {
    assert_eq!(arenas.len(), m.p());
    let runs = m.in_phase("init", |m| m.map(arenas, |_, a| local_sort(&a).run));
    sort_runs(m, runs, cfg)
}

/// Like [`ms_sort`], with a tie-breaking tag per string carried to the output.
pub fn ms_sort_tagged(m: &mut Machine, inputs: Vec<(StringArena, Vec<u64>)>, cfg: &MsConfig) -> Result<MsOutput> {
    assert_eq!(inputs.len(), m.p());
    let runs = m.in_phase("init", |m| m.map(inputs, |_, (a, t)| local_sort_tagged(&a, &t).run));
    sort_runs(m, runs, cfg)
}

fn sort_runs(m: &mut Machine, mut runs: Vec<SortedRun>, cfg: &MsConfig) -> Result<MsOutput> {
    let p = m.p();
    validate_schedule(&cfg.schedule, p)?;
    let mut levels = Vec::with_capacity(cfg.schedule.len());
    let mut groups = Groups::whole(p);
    for (t, &r) in cfg.schedule.iter().enumerate() {
        let level = t + 1;
        let group_size = p / groups.len();
        let p2 = group_size / r;

        let buckets = m.in_phase(format!("partition/L{level}"), |m| -> Result<_> {
            let samples = draw_samples(m, &groups, &runs, cfg.sampling.mode, cfg.sampling.factor)?;
            let splitters = compute_splitters(m, &groups, samples, r)?;
            Ok(m.map_ref(&runs, |pe, run| make_buckets(run, &splitters[pe])))
        })?;
        let plan = m.in_phase(format!("assign/L{level}"), |m| match cfg.assignment {
            Assignment::Grid => Ok(grid_plan(&groups, &buckets)),
            Assignment::Bounded => bounded_assignment(m, &groups, &runs, &buckets, cfg.sampling.mode),
        })?;
        debug_assert!(plan_stays_in_group(&plan, &groups));

        let mut stats = bucket_stats(&runs, &buckets, &groups, r);
        stats.level = level;
        stats.r = r;
        stats.group_size = group_size;
        stats.max_sends = plan.max_sends();
        stats.max_receives = plan.max_receives();
        let bucket_totals = bucket_totals(&runs, &buckets, &groups, r);

        runs = m.in_phase(format!("exchange/L{level}"), |m| exchange(m, &runs, &plan, cfg.lcp_compression))?;
        if cfg!(debug_assertions) {
            for run in &runs {
                run.validate()?;
            }
        }

        groups = Groups::split(p, groups.len() * r)?;
        for (pe, run) in runs.iter().enumerate() {
            stats.max_strings_pe = stats.max_strings_pe.max(run.len() as u64);
            stats.max_chars_pe = stats.max_chars_pe.max(run.total_chars());
            let (strings, chars) = bucket_totals[groups.of(pe).expect("every PE has a group")];
            stats.max_char_overshoot = stats.max_char_overshoot.max(run.total_chars() as f64 - chars as f64 / p2 as f64);
            stats.max_string_overshoot =
                stats.max_string_overshoot.max(run.len() as i64 - strings.div_ceil(p2 as u64) as i64);
        }
        levels.push(stats);
    }
    Ok(MsOutput { runs, levels })
}

fn plan_stays_in_group(plan: &MessagePlan, groups: &Groups) -> bool {
    plan.sends.iter().enumerate().all(|(pe, list)| list.iter().all(|e| groups.of(e.dst) == groups.of(pe)))
}

/// Global `(strings, chars)` of every next-level sub-group's bucket.
fn bucket_totals(
    runs: &[SortedRun],
    buckets: &[crate::partition::BucketPartition],
    groups: &Groups,
    r: usize,
) -> Vec<(u64, u64)> {
    let mut totals = vec![(0u64, 0u64); groups.len() * r];
    for (pe, b) in buckets.iter().enumerate() {
        let g = groups.of(pe).expect("every PE has a group");
        for j in 0..r {
            let range = b.range(j);
            totals[g * r + j].0 += range.len() as u64;
            totals[g * r + j].1 += range.map(|i| runs[pe].get(i).len() as u64).sum::<u64>();
        }
    }
    totals
}

fn bucket_stats(
    runs: &[SortedRun],
    buckets: &[crate::partition::BucketPartition],
    groups: &Groups,
    r: usize,
) -> LevelStats {
    let totals = bucket_totals(runs, buckets, groups, r);
    LevelStats {
        max_bucket_strings: totals.iter().map(|t| t.0).max().unwrap_or(0),
        max_bucket_chars: totals.iter().map(|t| t.1).max().unwrap_or(0),
        ..Default::default()
    }
}

/// One superstep: every plan entry becomes a message carrying an encoded
/// slice of the sender's run; receivers merge in sender order.
fn exchange(m: &mut Machine, runs: &[SortedRun], plan: &MessagePlan, compress: bool) -> Result<Vec<SortedRun>> {
    let outboxes = m.map_ref(runs, |pe, run| {
        plan.sends[pe]
            .iter()
            .map(|e| {
                let mut buf = Vec::new();
                encode_run(run, e.range.clone(), compress, run.is_tagged(), &mut buf);
                (e.dst, buf)
            })
            .collect()
    });
    let inboxes = m.exchange(outboxes)?;
    let tagged = runs.iter().any(SortedRun::is_tagged);
    let merged: Vec<Result<SortedRun>> = m.map(inboxes, |_, inbox| {
        let parts = inbox.iter().map(|msg| decode_run(&msg.payload)).collect::<Result<Vec<_>>>()?;
        if parts.is_empty() {
            return Ok(SortedRun::empty(tagged));
        }
        Ok(losertree_merge(&parts))
    });
    merged.into_iter().collect()
}
