//! Run reports, output verification and the benchmark grid behind the CLI.

mod bench;

pub use bench::{run_suite, write_csv, BenchCell, CsvRow, Suite, CSV_HEADER};

use crate::corpus::{measure_dist_prefixes, oracle_sort, split_even};
use crate::error::{Error, Result};
use crate::msort::{default_schedule, level_balance_report, ms_sort, validate_schedule, Assignment, BalanceReport, MsConfig};
use crate::partition::{SamplingConfig, SamplingMode};
use crate::pdms::{pdms_sort, DoublingStats, PdmsConfig};
use crate::rquick::rquick_sort;
use crate::simnet::{CommLedger, Machine};
use crate::strcore::{SortedRun, StringArena};
use serde::Serialize;
use serde_json::Value;
use std::cmp::Ordering;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Algo {
    #[serde(rename = "ms")]
    Ms,
    #[serde(rename = "pdms")]
    Pdms,
    #[serde(rename = "rquick")]
    Rquick,
    #[serde(rename = "rquick+")]
    RquickPlus,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ms => "ms",
            Algo::Pdms => "pdms",
            Algo::Rquick => "rquick",
            Algo::RquickPlus => "rquick+",
        }
    }
}

/// Everything that determines a sorting run besides the input.
#[derive(Clone, Debug, PartialEq)]
pub struct SortSpec {
    pub algo: Algo,
    pub p: usize,
    pub levels: usize,
    /// Explicit split factors; derived from `p` and `levels` when absent.
    pub schedule: Option<Vec<usize>>,
    pub sampling: SamplingMode,
    pub sampling_factor: Option<usize>,
    pub assignment: Assignment,
    pub compress_lcp: bool,
    pub seed: u64,
}

impl SortSpec {
    pub fn new(algo: Algo, p: usize, levels: usize) -> Self {
        SortSpec {
            algo,
            p,
            levels,
            schedule: None,
            sampling: SamplingMode::String,
            sampling_factor: None,
            assignment: Assignment::Grid,
            compress_lcp: false,
            seed: 0,
        }
    }

    pub fn ms_config(&self) -> Result<MsConfig> {
        if self.p == 0 {
            return Err(Error::Config("at least one PE is required".into()));
        }
        let schedule = match &self.schedule {
            Some(s) => {
                validate_schedule(s, self.p)?;
                s.clone()
            }
            None => default_schedule(self.p, self.levels),
        };
        let mut sampling = SamplingConfig::default_for(self.sampling, &schedule);
        if let Some(v) = self.sampling_factor {
            if v == 0 {
                return Err(Error::Config("sampling factor must be positive".into()));
            }
            sampling.factor = v;
        }
        Ok(MsConfig { schedule, sampling, assignment: self.assignment, lcp_compression: self.compress_lcp })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub algo: Algo,
    pub p: usize,
    pub levels: usize,
    pub schedule: Vec<usize>,
    pub sampling: SamplingMode,
    pub sampling_factor: usize,
    pub assignment: Assignment,
    pub compress_lcp: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputSummary {
    pub n: u64,
    pub chars: u64,
    pub max_len: usize,
    pub dn_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub correct: bool,
    pub first_mismatch: Option<u64>,
    pub detail: Option<String>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict { correct: true, first_mismatch: None, detail: None }
    }

    pub fn fail(index: u64, detail: impl Into<String>) -> Self {
        Verdict { correct: false, first_mismatch: Some(index), detail: Some(detail.into()) }
    }
}

/// Ledger aggregates shown in the CSV summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    /// Bytes sent in string-exchange phases; for RQuick, all bytes.
    pub bytes_exchange: u64,
    pub msgs_max_pe: u64,
    pub supersteps: u64,
    pub max_strings_pe: u64,
    pub max_chars_pe: u64,
    pub exchange_phases: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub input: InputSummary,
    pub verdict: Verdict,
    pub metrics: Metrics,
    pub balance: Option<BalanceReport>,
    pub doubling: Option<DoublingStats>,
    pub ledger: Value,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortedOutput {
    Strings(StringArena),
    /// Global input index of each string, smallest first.
    Permutation(Vec<u64>),
}

#[derive(Clone, Debug)]
pub struct SortOutcome {
    pub output: SortedOutput,
    pub report: RunReport,
}

/// Sorts `input` on a simulated machine as `spec` describes, checks the result
/// against the sequential oracle and builds the report.
pub fn run_sort(input: &StringArena, spec: &SortSpec) -> Result<SortOutcome> {
    let cfg = spec.ms_config()?;
    let p = spec.p;
    let mut m = Machine::new(p, spec.seed)?;
    let arenas = split_even(input, p);
    let (runs, balance, doubling) = match spec.algo {
        Algo::Ms => {
            let out = ms_sort(&mut m, arenas, &cfg)?;
            let bal = level_balance_report(&out.levels, &cfg, p, input.len() as u64, input.total_chars(), input.max_len());
            (out.runs, Some(bal), None)
        }
        Algo::Pdms => {
            let out = pdms_sort(&mut m, arenas, &PdmsConfig::new(cfg.clone(), spec.seed))?;
            let approx = &out.approximation;
            let lhat = approx.lengths.iter().flatten().copied().max().unwrap_or(0) as usize;
            let bal = level_balance_report(&out.levels, &cfg, p, input.len() as u64, approx.stats.total, lhat);
            (out.runs, Some(bal), Some(approx.stats.clone()))
        }
        Algo::Rquick | Algo::RquickPlus => (rquick_sort(&mut m, arenas, spec.algo == Algo::RquickPlus)?, None, None),
    };
    let ledger = m.into_ledger();
    let metrics = metrics(&ledger, &runs, spec.algo);
    let (output, verdict) = match spec.algo {
        Algo::Pdms => {
            let perm: Vec<u64> = runs.iter().flat_map(|r| r.tags().unwrap_or(&[]).iter().copied()).collect();
            let v = verify_permutation(input, &perm);
            (SortedOutput::Permutation(perm), v)
        }
        _ => {
            let sorted = SortedRun::concat(runs).into_parts().0;
            let v = verify_sorted(input, &sorted);
            (SortedOutput::Strings(sorted), v)
        }
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigEcho {
            algo: spec.algo,
            p,
            levels: cfg.schedule.len(),
            schedule: cfg.schedule.clone(),
            sampling: cfg.sampling.mode,
            sampling_factor: cfg.sampling.factor,
            assignment: cfg.assignment,
            compress_lcp: cfg.lcp_compression,
            seed: spec.seed,
        },
        input: summarize(input),
        verdict,
        metrics,
        balance,
        doubling,
        ledger: ledger.to_json(),
    };
    Ok(SortOutcome { output, report })
}

pub fn summarize(input: &StringArena) -> InputSummary {
    InputSummary {
        n: input.len() as u64,
        chars: input.total_chars(),
        max_len: input.max_len(),
        dn_ratio: measure_dist_prefixes(input).ratio(input.total_chars()),
    }
}

fn metrics(ledger: &CommLedger, runs: &[SortedRun], algo: Algo) -> Metrics {
    let exchange: Vec<_> = ledger.phases_with_prefix("exchange/").collect();
    let bytes_exchange = match algo {
        Algo::Rquick | Algo::RquickPlus => ledger.totals().bytes_sent,
        _ => exchange.iter().map(|(_, ph)| ph.totals().bytes_sent).sum(),
    };
    let mut per_pe = vec![0u64; ledger.p()];
    for (_, ph) in ledger.phases() {
        for (pe, c) in ph.pes.iter().enumerate() {
            per_pe[pe] += c.msgs_sent;
        }
    }
    Metrics {
        bytes_exchange,
        msgs_max_pe: per_pe.into_iter().max().unwrap_or(0),
        supersteps: ledger.total_supersteps(),
        max_strings_pe: runs.iter().map(|r| r.len() as u64).max().unwrap_or(0),
        max_chars_pe: runs.iter().map(SortedRun::total_chars).max().unwrap_or(0),
        exchange_phases: exchange.len(),
    }
}

/// Checks that `sorted` is `original` in ascending order.
pub fn verify_sorted(original: &StringArena, sorted: &StringArena) -> Verdict {
    let want = oracle_sort(original).run;
    for i in 0..want.len().min(sorted.len()) {
        if want.get(i) != sorted.get(i) {
            return Verdict::fail(i as u64, "string differs from the sorted input");
        }
    }
    match sorted.len().cmp(&want.len()) {
        Ordering::Equal => Verdict::pass(),
        Ordering::Less => Verdict::fail(sorted.len() as u64, format!("{} strings missing", want.len() - sorted.len())),
        Ordering::Greater => Verdict::fail(want.len() as u64, format!("{} extra strings", sorted.len() - want.len())),
    }
}

/// Checks that `perm` lists every input index once, in string order.
pub fn verify_permutation(original: &StringArena, perm: &[u64]) -> Verdict {
    let n = original.len();
    if perm.len() != n {
        return Verdict::fail(perm.len().min(n) as u64, format!("{} entries for {n} strings", perm.len()));
    }
    let mut seen = vec![false; n];
    for (i, &x) in perm.iter().enumerate() {
        if x >= n as u64 || std::mem::replace(&mut seen[x as usize], true) {
            return Verdict::fail(i as u64, format!("entry {x} is out of range or repeated"));
        }
    }
    for i in 1..n {
        if original.get(perm[i - 1] as usize) > original.get(perm[i] as usize) {
            return Verdict::fail(i as u64, "string ranked before a smaller one");
        }
    }
    Verdict::pass()
}
