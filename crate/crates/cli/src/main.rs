//! Command-line surface: enumeration bounds, candidate generation,
//! per-tuple signatures and classes, batch partition and hunt runs, and
//! re-verification of results files.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 on integrity
//! errors (method disagreement, signature not divisible by 8, verification
//! mismatches).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use brieskorn::enumerate::{enumerate_candidates, proposition_bounds, SearchRange};
use brieskorn::io::{
    candidates_line, parse_candidates, result_line, results_header, write_partition_summary,
};
use brieskorn::orchestrate::{run_hunt, run_partition, verify_results, JobOptions};
use brieskorn::signature::{
    class_order, classify, signature_only, CostCaps, Method, Precision, PrecisionLevel,
    Strategy,
};
use brieskorn::{Error, ExponentTuple};

#[derive(Parser)]
#[command(
    name = "brieskorn",
    version,
    about = "Brieskorn-Pham links: certificates, Milnor fiber signatures, bP classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the per-coordinate search bounds for tuple length m
    Bounds {
        /// Tuple length (at least 4)
        #[arg(long)]
        m: usize,
    },
    /// Enumerate tuples passing both certificates within a range
    Candidates {
        /// Tuple length (at least 4)
        #[arg(long)]
        m: usize,
        /// Override a lower bound, as position:value (1-based, repeatable)
        #[arg(long = "min", value_name = "I:V")]
        min: Vec<String>,
        /// Override an upper bound, as position:value (1-based, repeatable)
        #[arg(long = "max", value_name = "I:V")]
        max: Vec<String>,
        /// Output file (stdout when absent)
        #[arg(long = "out")]
        out: Option<PathBuf>,
    },
    /// Compute signatures of tuples, without class residues
    Signature {
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Compute signatures and class residues of tuples
    Classify {
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Classify a candidates file and tally classes of bP
    Partition {
        #[command(flatten)]
        batch: BatchArgs,
        /// Also write the per-class summary to this file
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Classify a candidates file until every class of bP is realized
    Hunt {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Recompute signatures of a results file and report disagreements
    Verify {
        /// Results file to re-check
        #[arg(long = "in")]
        input: PathBuf,
        /// Evaluator to recompute with
        #[arg(long, default_value = "zagier")]
        method: String,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        caps: CapArgs,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// Candidates file with the tuples to evaluate
    #[arg(long = "in", conflicts_with = "tuple")]
    input: Option<PathBuf>,
    /// A single tuple given inline instead of a file
    #[arg(value_name = "EXPONENT")]
    tuple: Vec<u64>,
    /// Output file (stdout when absent)
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// naive, histogram, zagier, auto, or cross-check
    #[arg(long, default_value = "auto")]
    method: String,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Candidates file to classify
    #[arg(long = "in")]
    input: PathBuf,
    /// Results file to write
    #[arg(long = "out")]
    out: PathBuf,
    /// naive, histogram, zagier, auto, or cross-check
    #[arg(long, default_value = "auto")]
    method: String,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Checkpoint file; resumed from when it already exists
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Commits between checkpoint writes
    #[arg(long, default_value_t = 1000)]
    checkpoint_interval: u64,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Args)]
struct CapArgs {
    /// Most lattice points the naive evaluator may enumerate
    #[arg(long = "naive-cap", default_value_t = 100_000_000)]
    naive_cap: u128,
    /// Byte budget of the histogram evaluator
    #[arg(long = "hist-mem-cap", default_value_t = 1 << 30)]
    hist_mem_cap: u128,
    /// auto, hardware, 128, or 256
    #[arg(long, default_value = "auto")]
    precision: String,
    /// Highest rung the auto precision ladder may climb
    #[arg(long = "max-precision", default_value = "256")]
    max_precision: String,
}

impl CapArgs {
    fn caps(&self) -> anyhow::Result<CostCaps> {
        Ok(CostCaps {
            naive_points: self.naive_cap,
            histogram_bytes: self.hist_mem_cap,
            max_precision: parse_level(&self.max_precision)?,
        })
    }

    fn precision(&self) -> anyhow::Result<Precision> {
        if self.precision == "auto" {
            Ok(Precision::Auto)
        } else {
            Ok(Precision::Fixed(parse_level(&self.precision)?))
        }
    }
}

fn parse_level(text: &str) -> anyhow::Result<PrecisionLevel> {
    match text {
        "hardware" | "f64" => Ok(PrecisionLevel::Hardware),
        "128" => Ok(PrecisionLevel::Bits128),
        "256" => Ok(PrecisionLevel::Bits256),
        other => bail!("unknown precision level {other:?} (hardware, 128, 256)"),
    }
}

fn parse_strategy(text: &str) -> anyhow::Result<Strategy> {
    match text {
        "auto" => Ok(Strategy::Auto),
        "naive" => Ok(Strategy::Naive),
        "histogram" => Ok(Strategy::Histogram),
        "zagier" => Ok(Strategy::Zagier),
        "cross-check" => Ok(Strategy::CrossCheck),
        other => bail!("unknown method {other:?} (naive, histogram, zagier, auto, cross-check)"),
    }
}

fn parse_method(text: &str) -> anyhow::Result<Method> {
    Method::from_tag(text)
        .ok_or_else(|| anyhow!("unknown evaluator {text:?} (naive, histogram, zagier)"))
}

/// Parses a repeatable "position:value" bound override, 1-based position.
fn parse_override(text: &str, m: usize) -> anyhow::Result<(usize, u64)> {
    let (idx, value) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("bound override must be position:value, got {text:?}"))?;
    let idx: usize = idx.parse().context("bound position")?;
    let value: u64 = value.parse().context("bound value")?;
    if idx == 0 || idx > m {
        bail!("bound position {idx} is outside 1..={m}");
    }
    Ok((idx - 1, value))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let help = !e.use_stderr();
            let _ = e.print();
            return if help { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let integrity = e
                .downcast_ref::<Error>()
                .is_some_and(|err| err.is_integrity());
            ExitCode::from(if integrity { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Bounds { m } => {
            let bounds = proposition_bounds(m)?;
            println!("# position lo hi");
            for (i, hi) in bounds.iter().enumerate() {
                println!("{} 2 {hi}", i + 1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Candidates { m, min, max, out } => {
            let default = SearchRange::default_for(m)?;
            let mut lo = default.lo().to_vec();
            let mut hi = default.hi().to_vec();
            for text in &min {
                let (i, v) = parse_override(text, m)?;
                lo[i] = v;
            }
            for text in &max {
                let (i, v) = parse_override(text, m)?;
                hi[i] = v;
            }
            let range = SearchRange::new(lo, hi)?;
            let mut writer = open_output(out.as_deref())?;
            let count = enumerate_candidates(&range, |tuple| {
                writer
                    .write_all(candidates_line(tuple).as_bytes())
                    .map_err(Error::Io)
            })?;
            writer.flush()?;
            eprintln!("{count} candidates");
            Ok(ExitCode::SUCCESS)
        }
        Command::Signature { eval } => run_eval(eval, false),
        Command::Classify { eval } => run_eval(eval, true),
        Command::Partition { batch, summary } => {
            let opts = batch_options(&batch)?;
            let outcome = run_partition(&batch.input, &batch.out, &opts)?;
            report_rejections(&outcome.rejected);
            let mut stdout = std::io::stdout().lock();
            write_partition_summary(&mut stdout, &outcome.partition)?;
            if let Some(path) = summary {
                let mut file = BufWriter::new(File::create(&path)?);
                write_partition_summary(&mut file, &outcome.partition)?;
                file.flush()?;
            }
            eprintln!(
                "{} tuples, {} of {} classes realized",
                outcome.partition.total(),
                outcome.partition.classes_found(),
                outcome.partition.order()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Hunt { batch } => {
            let opts = batch_options(&batch)?;
            let outcome = run_hunt(&batch.input, &batch.out, &opts)?;
            report_rejections(&outcome.rejected);
            println!(
                "hunt {}: {} classes of {} recorded, {} tuples consumed",
                if outcome.completed {
                    "complete"
                } else {
                    "incomplete"
                },
                outcome.recorded,
                outcome.partition.order(),
                outcome.consumed
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            input,
            method,
            threads,
            caps,
        } => {
            let report = verify_results(
                &input,
                parse_method(&method)?,
                &caps.caps()?,
                caps.precision()?,
                threads,
            )?;
            for skip in &report.skipped {
                println!("skip line {}: {} ({})", skip.index, skip.tuple, skip.reason);
            }
            for mm in &report.mismatches {
                println!(
                    "MISMATCH line {}: {} claimed tau {} (class {}), recomputed tau {} (class {})",
                    mm.index,
                    mm.tuple,
                    mm.claimed_tau,
                    mm.claimed_class.map_or("-".into(), |g: u64| g.to_string()),
                    mm.recomputed_tau,
                    mm.recomputed_class.map_or("-".into(), |g: u64| g.to_string()),
                );
            }
            println!(
                "{} checked, {} mismatches, {} skipped",
                report.checked,
                report.mismatches.len(),
                report.skipped.len()
            );
            Ok(if report.mismatches.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn run_eval(args: EvalArgs, with_class: bool) -> anyhow::Result<ExitCode> {
    let tuples: Vec<ExponentTuple> = if let Some(path) = &args.input {
        let bytes =
            std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        parse_candidates(&bytes[..])?
    } else if !args.tuple.is_empty() {
        vec![ExponentTuple::new(args.tuple.clone())?]
    } else {
        bail!("provide a tuple or --in FILE");
    };
    if tuples.is_empty() {
        bail!("no tuples to evaluate");
    }
    let strategy = parse_strategy(&args.method)?;
    let caps = args.caps.caps()?;
    let precision = args.caps.precision()?;
    let m = tuples[0].m();

    let mut writer = open_output(args.out.as_deref())?;
    writer.write_all(results_header(m, class_order(m).ok()).as_bytes())?;
    let run_all = |writer: &mut Box<dyn Write + Send>| -> anyhow::Result<()> {
        for tuple in &tuples {
            let record = if with_class {
                classify(tuple, strategy, &caps, precision)?
            } else {
                signature_only(tuple, strategy, &caps, precision)?
            };
            writer.write_all(result_line(&record).as_bytes())?;
        }
        Ok(())
    };
    with_thread_pool(args.threads, || run_all(&mut writer))?;
    writer.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(feature = "parallel")]
fn with_thread_pool<T: Send>(
    threads: usize,
    body: impl FnOnce() -> anyhow::Result<T> + Send,
) -> anyhow::Result<T> {
    if threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        pool.install(body)
    } else {
        body()
    }
}

#[cfg(not(feature = "parallel"))]
fn with_thread_pool<T>(
    _threads: usize,
    body: impl FnOnce() -> anyhow::Result<T>,
) -> anyhow::Result<T> {
    body()
}

fn batch_options(batch: &BatchArgs) -> anyhow::Result<JobOptions> {
    Ok(JobOptions {
        workers: batch.threads,
        strategy: parse_strategy(&batch.method)?,
        precision: batch.caps.precision()?,
        caps: batch.caps.caps()?,
        checkpoint: batch.checkpoint.clone(),
        checkpoint_interval: batch.checkpoint_interval.max(1),
        stop_after: None,
    })
}

fn report_rejections(rejected: &[brieskorn::orchestrate::RejectedTuple]) {
    for reject in rejected {
        eprintln!(
            "rejected input tuple {} ({}): {}",
            reject.index, reject.tuple, reject.reason
        );
    }
}

fn open_output(path: Option<&std::path::Path>) -> anyhow::Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}
