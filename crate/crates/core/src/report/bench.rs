use super::{run_sort, Algo, RunReport, SortSpec};
use crate::corpus::{generate_dn, DnSpec};
use crate::error::Result;
use crate::msort::default_schedule;
use std::io::Write;

pub const CSV_HEADER: &str = "algo,p,k,dn_ratio,n,bytes_exchange,msgs_max_pe,supersteps,max_strings_pe,max_chars_pe,correct,exchange_phases,bytes_per_string";

const STRINGS_PER_PE: usize = 200;
const STRING_LEN: usize = 64;
const SIGMA: u16 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// p in {4, 16, 64}, k in {1, 2, 3}, D/N = 0.5.
    WeakNp,
    /// D/N in {0, 0.25, 0.5, 0.75, 1}, p in {4, 16, 64}, k = 2, MS and PDMS.
    WeakDn,
    /// p = 64, k in {1, 2, 3}, MS and PDMS.
    Levels,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::WeakNp => "weak-np",
            Suite::WeakDn => "weak-dn",
            Suite::Levels => "levels",
        }
    }

    /// `(algo, p, k, target D/N)` per cell.
    fn cells(self) -> Vec<(Algo, usize, usize, f64)> {
        let mut cells = Vec::new();
        match self {
            Suite::WeakNp => {
                for p in [4, 16, 64] {
                    for k in 1..=3 {
                        if default_schedule(p, k).len() == k {
                            cells.push((Algo::Ms, p, k, 0.5));
                            cells.push((Algo::Pdms, p, k, 0.5));
                        }
                    }
                    cells.push((Algo::RquickPlus, p, 1, 0.5));
                }
            }
            Suite::WeakDn => {
                for dn in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    for p in [4, 16, 64] {
                        cells.push((Algo::Ms, p, 2, dn));
                        cells.push((Algo::Pdms, p, 2, dn));
                    }
                }
            }
            Suite::Levels => {
                for k in 1..=3 {
                    cells.push((Algo::Ms, 64, k, 0.5));
                    cells.push((Algo::Pdms, 64, k, 0.5));
                }
            }
        }
        cells
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub algo: Algo,
    pub p: usize,
    pub k: usize,
    pub dn_ratio: f64,
    pub n: u64,
    pub bytes_exchange: u64,
    pub msgs_max_pe: u64,
    pub supersteps: u64,
    pub max_strings_pe: u64,
    pub max_chars_pe: u64,
    pub correct: bool,
    pub exchange_phases: usize,
}

impl CsvRow {
    fn from_report(r: &RunReport) -> Self {
        CsvRow {
            algo: r.config.algo,
            p: r.config.p,
            k: r.config.levels,
            dn_ratio: r.input.dn_ratio,
            n: r.input.n,
            bytes_exchange: r.metrics.bytes_exchange,
            msgs_max_pe: r.metrics.msgs_max_pe,
            supersteps: r.metrics.supersteps,
            max_strings_pe: r.metrics.max_strings_pe,
            max_chars_pe: r.metrics.max_chars_pe,
            correct: r.verdict.correct,
            exchange_phases: r.metrics.exchange_phases,
        }
    }

    pub fn to_csv(&self) -> String {
        let per_string = if self.n == 0 { 0.0 } else { self.bytes_exchange as f64 / self.n as f64 };
        format!(
            "{},{},{},{:.4},{},{},{},{},{},{},{},{},{:.2}",
            self.algo.name(),
            self.p,
            self.k,
            self.dn_ratio,
            self.n,
            self.bytes_exchange,
            self.msgs_max_pe,
            self.supersteps,
            self.max_strings_pe,
            self.max_chars_pe,
            self.correct,
            self.exchange_phases,
            per_string
        )
    }
}

#[derive(Clone, Debug)]
pub struct BenchCell {
    /// File stem for the cell's report.
    pub name: String,
    pub report: RunReport,
    pub row: CsvRow,
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<BenchCell>> {
    let mut out = Vec::new();
    for (algo, p, k, dn) in suite.cells() {
        let input = generate_dn(&DnSpec { n: STRINGS_PER_PE * p, len: STRING_LEN, dn_ratio: dn, sigma: SIGMA, seed })?;
        let mut spec = SortSpec::new(algo, p, k);
        spec.seed = seed;
        let report = run_sort(&input, &spec)?.report;
        let name = format!("{}-{}-p{p}-k{k}-dn{:03}", suite.name(), algo.name(), (dn * 100.0).round() as u32);
        out.push(BenchCell { name, row: CsvRow::from_report(&report), report });
    }
    Ok(out)
}

pub fn write_csv(rows: &[CsvRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_shapes() {
        assert_eq!(Suite::WeakDn.cells().len(), 30);
        assert_eq!(Suite::Levels.cells().len(), 6);
        assert!(Suite::WeakNp.cells().iter().all(|&(_, p, k, _)| p != 4 || k < 3));
    }

    #[test]
    fn levels_suite_counts_exchange_phases() {
        let cells = run_suite(Suite::Levels, 1).unwrap();
        for c in &cells {
            assert!(c.row.correct);
            assert_eq!(c.row.exchange_phases, c.row.k);
        }
        let mut csv = Vec::new();
        write_csv(&cells.iter().map(|c| c.row.clone()).collect::<Vec<_>>(), &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 7);
    }
}
