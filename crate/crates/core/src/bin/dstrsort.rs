use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dstrsort::corpus::{dn_ratio, generate_dn, read_corpus_auto, write_corpus, CorpusFormat, DnSpec};
use dstrsort::msort::Assignment;
use dstrsort::partition::SamplingMode;
use dstrsort::report::{run_sort, run_suite, verify_permutation, verify_sorted, write_csv, Algo, SortSpec, SortedOutput, Suite};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dstrsort", version, about = "Distributed string sorting on a simulated machine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a corpus with a target D/N ratio.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        len: usize,
        #[arg(long = "dn-ratio")]
        dn_ratio: f64,
        #[arg(long, default_value_t = 4)]
        sigma: u16,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Bin)]
        format: Format,
    },
    /// Sort a corpus and write the sorted corpus (or a rank permutation for pdms).
    Sort {
        #[arg(long, value_enum, default_value_t = AlgoArg::Ms)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 1)]
        pes: usize,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Split factors such as `4x4`; their product must equal `--pes`.
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
        #[arg(long, value_enum, default_value_t = SamplingArg::String)]
        sampling: SamplingArg,
        #[arg(long = "sampling-factor")]
        sampling_factor: Option<usize>,
        #[arg(long, value_enum, default_value_t = AssignmentArg::Grid)]
        assignment: AssignmentArg,
        #[arg(long = "compress-lcp", value_enum, default_value_t = Switch::Off)]
        compress_lcp: Switch,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a sorted corpus or a permutation against the original input.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, conflicts_with = "perm", required_unless_present = "perm")]
        sorted: Option<PathBuf>,
        #[arg(long)]
        perm: Option<PathBuf>,
    },
    /// Run a benchmark grid, writing one report per cell and a CSV summary.
    Bench {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Bin,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ms,
    Pdms,
    Rquick,
    #[value(name = "rquick+")]
    RquickPlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    String,
    Char,
}

#[derive(Clone, Copy, ValueEnum)]
enum AssignmentArg {
    Grid,
    Bounded,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    WeakNp,
    WeakDn,
    Levels,
}

#[derive(Clone)]
struct Schedule(Vec<usize>);

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.split(['x', 'X', ','])
        .map(|f| f.trim().parse::<usize>().map_err(|e| format!("bad factor {f:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Schedule)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Gen { n, len, dn_ratio: target, sigma, seed, out, format } => {
            let arena = generate_dn(&DnSpec { n, len, dn_ratio: target, sigma, seed })?;
            let format = match format {
                Format::Bin => CorpusFormat::Binary,
                Format::Text => CorpusFormat::Text,
            };
            write_corpus(&arena, &out, format).with_context(|| format!("writing {}", out.display()))?;
            println!("n={} D/N={:.2}", arena.len(), dn_ratio(&arena));
            Ok(true)
        }
        Cmd::Sort {
            algo,
            pes,
            levels,
            schedule,
            sampling,
            sampling_factor,
            assignment,
            compress_lcp,
            seed,
            input,
            out,
            report,
        } => {
            let (arena, format) = read_corpus_auto(&input).with_context(|| format!("reading {}", input.display()))?;
            let spec = SortSpec {
                algo: match algo {
                    AlgoArg::Ms => Algo::Ms,
                    AlgoArg::Pdms => Algo::Pdms,
                    AlgoArg::Rquick => Algo::Rquick,
                    AlgoArg::RquickPlus => Algo::RquickPlus,
                },
                p: pes,
                levels,
                schedule: schedule.map(|s| s.0),
                sampling: match sampling {
                    SamplingArg::String => SamplingMode::String,
                    SamplingArg::Char => SamplingMode::Character,
                },
                sampling_factor,
                assignment: match assignment {
                    AssignmentArg::Grid => Assignment::Grid,
                    AssignmentArg::Bounded => Assignment::Bounded,
                },
                compress_lcp: compress_lcp == Switch::On,
                seed,
            };
            let outcome = run_sort(&arena, &spec)?;
            match &outcome.output {
                SortedOutput::Strings(s) => write_corpus(s, &out, format),
                SortedOutput::Permutation(perm) => write_perm(perm, &out),
            }
            .with_context(|| format!("writing {}", out.display()))?;
            let r = &outcome.report;
            if let Some(path) = report {
                fs::write(&path, r.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "{} p={} n={} correct={} bytes_exchange={} supersteps={}",
                r.config.algo.name(),
                r.config.p,
                r.input.n,
                r.verdict.correct,
                r.metrics.bytes_exchange,
                r.metrics.supersteps
            );
            Ok(r.verdict.correct)
        }
        Cmd::Verify { input, sorted, perm } => {
            let (arena, _) = read_corpus_auto(&input).with_context(|| format!("reading {}", input.display()))?;
            let verdict = match (sorted, perm) {
                (Some(path), _) => {
                    let (s, _) = read_corpus_auto(&path).with_context(|| format!("reading {}", path.display()))?;
                    verify_sorted(&arena, &s)
                }
                (None, Some(path)) => verify_permutation(&arena, &read_perm(&path)?),
                (None, None) => bail!("one of --sorted or --perm is required"),
            };
            if verdict.correct {
                println!("PASS");
            } else {
                println!(
                    "FAIL at index {}: {}",
                    verdict.first_mismatch.unwrap_or(0),
                    verdict.detail.as_deref().unwrap_or("mismatch")
                );
            }
            Ok(verdict.correct)
        }
        Cmd::Bench { suite, out, seed } => {
            let suite = match suite {
                SuiteArg::WeakNp => Suite::WeakNp,
                SuiteArg::WeakDn => Suite::WeakDn,
                SuiteArg::Levels => Suite::Levels,
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let cells = run_suite(suite, seed)?;
            for c in &cells {
                fs::write(out.join(format!("{}.json", c.name)), c.report.to_json() + "\n")?;
            }
            let rows: Vec<_> = cells.iter().map(|c| c.row.clone()).collect();
            let csv = out.join(format!("{}.csv", suite.name()));
            write_csv(&rows, fs::File::create(&csv)?)?;
            println!("{} cells -> {}", cells.len(), csv.display());
            Ok(cells.iter().all(|c| c.row.correct))
        }
    }
}

fn write_perm(perm: &[u64], path: &Path) -> dstrsort::Result<()> {
    let bytes: Vec<u8> = perm.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    Ok(())
}

fn read_perm(path: &Path) -> Result<Vec<u64>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() % 8 != 0 {
        bail!("permutation file length {} is not a multiple of 8", bytes.len());
    }
    Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
}
