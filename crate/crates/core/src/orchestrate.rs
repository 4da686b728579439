//! Batch classification over candidate files: full partition mode and hunt
//! mode (stop once every class is realized), with worker parallelism,
//! strictly input-ordered commits, and checkpoint/resume.
//!
//! Workers evaluate chunks speculatively; the coordinator owns the input
//! cursor, the partition state, the output file, and every checkpoint write.
//! Commit order equals input order for any worker count, so output bytes are
//! identical whether the run uses one thread or many, and identical again
//! after a kill and resume at any commit boundary.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{
    candidates_line, parse_candidates, parse_results, read_checkpoint, result_line,
    results_header, sha256_hex, write_checkpoint_atomic, Checkpoint,
};
use crate::signature::{
    class_order, classify, signature_only, CostCaps, Method, Precision, SignatureRecord,
    Strategy,
};
use crate::topology::{is_homotopy_sphere, klt_certificate, ExponentTuple};

/// Tally of class residues over a batch, with the first tuple realizing
/// each class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    m: usize,
    order: u64,
    counts: Vec<u64>,
    representatives: Vec<Option<ExponentTuple>>,
}

impl ClassPartition {
    pub fn new(m: usize, order: u64) -> Self {
        ClassPartition {
            m,
            order,
            counts: vec![0; order as usize],
            representatives: vec![None; order as usize],
        }
    }

    pub fn empty() -> Self {
        ClassPartition::new(0, 0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Tallies one classified tuple; true when its class is newly realized.
    pub fn record(&mut self, class: u64, tuple: &ExponentTuple) -> bool {
        let slot = class as usize;
        self.counts[slot] += 1;
        if self.representatives[slot].is_none() {
            self.representatives[slot] = Some(tuple.clone());
            true
        } else {
            false
        }
    }

    /// Restores one class slot from serialized state.
    pub fn restore(&mut self, class: u64, count: u64, representative: Option<ExponentTuple>) {
        let slot = class as usize;
        self.counts[slot] = count;
        self.representatives[slot] = representative;
    }

    pub fn count(&self, class: u64) -> u64 {
        self.counts[class as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn found(&self, class: u64) -> bool {
        self.counts[class as usize] > 0
    }

    pub fn representative(&self, class: u64) -> Option<&ExponentTuple> {
        self.representatives[class as usize].as_ref()
    }

    pub fn classes_found(&self) -> u64 {
        self.counts.iter().filter(|&&c| c > 0).count() as u64
    }

    pub fn is_complete(&self) -> bool {
        self.order > 0 && self.classes_found() == self.order
    }

    /// Number of tuples tallied.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Knobs of one batch run.
#[derive(Debug, Clone)]
pub struct JobOptions {
    /// Worker threads; 0 uses the default pool size, 1 runs sequentially.
    pub workers: usize,
    pub strategy: Strategy,
    pub precision: Precision,
    pub caps: CostCaps,
    pub checkpoint: Option<PathBuf>,
    /// Commits between checkpoint writes.
    pub checkpoint_interval: u64,
    /// Stop after this many commits, leaving the output as a crash would;
    /// a resume hook for tests and operations.
    pub stop_after: Option<u64>,
}

impl Default for JobOptions {
    fn default() -> Self {
        JobOptions {
            workers: 0,
            strategy: Strategy::Auto,
            precision: Precision::Auto,
            caps: CostCaps::default(),
            checkpoint: None,
            checkpoint_interval: 1000,
            stop_after: None,
        }
    }
}

/// Input tuple that failed the certificates; reported, never silently
/// dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedTuple {
    /// Position in the input sequence, 1-based.
    pub index: u64,
    pub tuple: ExponentTuple,
    pub reason: String,
}

#[derive(Debug)]
pub struct PartitionOutcome {
    pub partition: ClassPartition,
    pub rejected: Vec<RejectedTuple>,
    /// Input tuples consumed, valid or not.
    pub consumed: u64,
    /// Commit count this run resumed from, if it resumed.
    pub resumed_from: Option<u64>,
    /// True when stop_after ended the run before the input was exhausted.
    pub stopped_early: bool,
}

#[derive(Debug)]
pub struct HuntOutcome {
    pub partition: ClassPartition,
    pub rejected: Vec<RejectedTuple>,
    pub consumed: u64,
    /// Tuples written to the output file, one per newly found class.
    pub recorded: u64,
    /// True when every class of the group was realized.
    pub completed: bool,
    pub resumed_from: Option<u64>,
    pub stopped_early: bool,
}

/// Classifies every input tuple in order, writing one results line each.
pub fn run_partition(input: &Path, output: &Path, opts: &JobOptions) -> Result<PartitionOutcome> {
    let run = run_job(Mode::Partition, input, output, opts)?;
    Ok(PartitionOutcome {
        partition: run.partition,
        rejected: run.rejected,
        consumed: run.consumed,
        resumed_from: run.resumed_from,
        stopped_early: run.stopped_early,
    })
}

/// Classifies input tuples in order, recording only the first tuple of each
/// class, and stops as soon as every class of bP₄ₖ is realized.
pub fn run_hunt(input: &Path, output: &Path, opts: &JobOptions) -> Result<HuntOutcome> {
    let run = run_job(Mode::Hunt, input, output, opts)?;
    Ok(HuntOutcome {
        recorded: run.partition.classes_found(),
        completed: run.partition.is_complete(),
        partition: run.partition,
        rejected: run.rejected,
        consumed: run.consumed,
        resumed_from: run.resumed_from,
        stopped_early: run.stopped_early,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Partition,
    Hunt,
}

impl Mode {
    fn tag(self) -> &'static str {
        match self {
            Mode::Partition => "partition",
            Mode::Hunt => "hunt",
        }
    }
}

struct RunState {
    partition: ClassPartition,
    rejected: Vec<RejectedTuple>,
    consumed: u64,
    resumed_from: Option<u64>,
    stopped_early: bool,
}

/// Tuples per speculative batch; fixed so commit boundaries do not depend on
/// the worker count.
const BATCH: usize = 256;

fn run_job(mode: Mode, input: &Path, output: &Path, opts: &JobOptions) -> Result<RunState> {
    let bytes = std::fs::read(input)?;
    let digest = sha256_hex(&bytes);
    let tuples = parse_candidates(&bytes[..])?;

    if tuples.is_empty() {
        File::create(output)?;
        return Ok(RunState {
            partition: ClassPartition::empty(),
            rejected: Vec::new(),
            consumed: 0,
            resumed_from: None,
            stopped_early: false,
        });
    }
    let m = tuples[0].m();
    let order = class_order(m)?;

    // Fresh state, or the checkpointed state with the output truncated back
    // to the last committed byte.
    let mut partition = ClassPartition::new(m, order);
    let mut committed: u64 = 0;
    let mut out_bytes: u64 = 0;
    let mut resumed_from = None;
    let file = match opts.checkpoint.as_deref().map(read_checkpoint) {
        Some(Ok(checkpoint)) => {
            if checkpoint.digest != digest || checkpoint.mode != mode.tag() {
                return Err(Error::CheckpointMismatch);
            }
            partition = checkpoint.partition;
            committed = checkpoint.committed;
            out_bytes = checkpoint.out_bytes;
            resumed_from = Some(committed);
            let file = OpenOptions::new().read(true).write(true).open(output)?;
            file.set_len(out_bytes)?;
            let mut file = file;
            file.seek(SeekFrom::End(0))?;
            file
        }
        Some(Err(Error::Io(e))) if e.kind() == std::io::ErrorKind::NotFound => {
            fresh_output(output, m, order, &mut out_bytes)?
        }
        Some(Err(e)) => return Err(e),
        None => fresh_output(output, m, order, &mut out_bytes)?,
    };
    let mut writer = BufWriter::new(file);

    let pool = build_pool(opts.workers);
    let caps = opts.caps;
    let strategy = opts.strategy;
    let precision = opts.precision;

    let mut rejected = Vec::new();
    let mut stopped_early = false;
    let mut since_checkpoint: u64 = 0;

    'outer: while (committed as usize) < tuples.len() {
        let batch_end = (committed as usize + BATCH).min(tuples.len());
        let batch = &tuples[committed as usize..batch_end];
        let evaluated: Vec<Evaluated> = evaluate_batch(
            &pool,
            batch,
            opts.workers,
            move |t| evaluate_one(t, strategy, &caps, precision),
        );

        for outcome in evaluated {
            let index = committed + 1;
            match outcome {
                Ok(record) => {
                    let class = record.class.expect("evaluate_one attaches a class");
                    let newly_found = partition.record(class, &record.tuple);
                    let line = match mode {
                        Mode::Partition => Some(result_line(&record)),
                        Mode::Hunt if newly_found => Some(result_line(&record)),
                        Mode::Hunt => None,
                    };
                    if let Some(line) = line {
                        writer.write_all(line.as_bytes())?;
                        out_bytes += line.len() as u64;
                    }
                }
                Err(CertificateFailure { tuple, reason }) => {
                    rejected.push(RejectedTuple {
                        index,
                        tuple,
                        reason,
                    });
                }
                Err(Abort(e)) => return Err(e),
            }
            committed += 1;
            since_checkpoint += 1;

            if let Some(path) = opts.checkpoint.as_deref() {
                if since_checkpoint >= opts.checkpoint_interval {
                    writer.flush()?;
                    write_checkpoint_atomic(
                        path,
                        &Checkpoint {
                            digest: digest.clone(),
                            mode: mode.tag().to_string(),
                            committed,
                            out_bytes,
                            partition: partition.clone(),
                        },
                    )?;
                    since_checkpoint = 0;
                }
            }
            if mode == Mode::Hunt && partition.is_complete() {
                break 'outer;
            }
            if opts.stop_after.is_some_and(|limit| committed >= limit) {
                stopped_early = (committed as usize) < tuples.len();
                if stopped_early {
                    // Leave the files as a crash would: flushed output, last
                    // periodic checkpoint only.
                    writer.flush()?;
                    return Ok(RunState {
                        partition,
                        rejected,
                        consumed: committed,
                        resumed_from,
                        stopped_early,
                    });
                }
            }
        }
    }

    writer.flush()?;
    if let Some(path) = opts.checkpoint.as_deref() {
        write_checkpoint_atomic(
            path,
            &Checkpoint {
                digest,
                mode: mode.tag().to_string(),
                committed,
                out_bytes,
                partition: partition.clone(),
            },
        )?;
    }
    Ok(RunState {
        partition,
        rejected,
        consumed: committed,
        resumed_from,
        stopped_early,
    })
}

fn fresh_output(output: &Path, m: usize, order: u64, out_bytes: &mut u64) -> Result<File> {
    let mut file = File::create(output)?;
    let header = results_header(m, Some(order));
    file.write_all(header.as_bytes())?;
    *out_bytes = header.len() as u64;
    Ok(file)
}

/// Per-tuple evaluation outcome: a record, a reported certificate failure,
/// or a hard abort (integrity errors and resource refusals).
type Evaluated = std::result::Result<SignatureRecord, BatchFailure>;

enum BatchFailure {
    CertificateFailure { tuple: ExponentTuple, reason: String },
    Abort(Error),
}
use BatchFailure::{Abort, CertificateFailure};

fn evaluate_one(
    tuple: &ExponentTuple,
    strategy: Strategy,
    caps: &CostCaps,
    precision: Precision,
) -> Evaluated {
    // Certificates are verified, not assumed.
    let sphere = match is_homotopy_sphere(tuple) {
        Ok(v) => v,
        Err(e) => return Err(Abort(e)),
    };
    if !sphere.is_sphere() {
        return Err(CertificateFailure {
            tuple: tuple.clone(),
            reason: "not a homotopy sphere".into(),
        });
    }
    let cert = klt_certificate(tuple);
    if !cert.passes {
        return Err(CertificateFailure {
            tuple: tuple.clone(),
            reason: format!(
                "Kahler-Einstein certificate failed (cond1 {} cond2 {} cond3 {})",
                cert.cond1, cert.cond2, cert.cond3
            ),
        });
    }
    match classify(tuple, strategy, caps, precision) {
        Ok(record) => {
            debug_assert!(record.class.is_some());
            Ok(record)
        }
        Err(e) => Err(Abort(e)),
    }
}

#[cfg(feature = "parallel")]
type Pool = Option<rayon::ThreadPool>;
#[cfg(not(feature = "parallel"))]
type Pool = ();

#[cfg(feature = "parallel")]
fn build_pool(workers: usize) -> Pool {
    if workers == 1 {
        return None;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        builder = builder.num_threads(workers);
    }
    builder.build().ok()
}

#[cfg(not(feature = "parallel"))]
fn build_pool(_workers: usize) -> Pool {}

#[cfg(feature = "parallel")]
fn evaluate_batch<F>(pool: &Pool, batch: &[ExponentTuple], workers: usize, f: F) -> Vec<Evaluated>
where
    F: Fn(&ExponentTuple) -> Evaluated + Sync + Send,
{
    use rayon::prelude::*;
    match pool {
        Some(pool) if workers != 1 => {
            pool.install(|| batch.par_iter().map(&f).collect())
        }
        _ => batch.iter().map(&f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn evaluate_batch<F>(_pool: &Pool, batch: &[ExponentTuple], _workers: usize, f: F) -> Vec<Evaluated>
where
    F: Fn(&ExponentTuple) -> Evaluated + Sync + Send,
{
    batch.iter().map(&f).collect()
}

/// One disagreement found by re-verification.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyMismatch {
    /// Position in the results file, 1-based over records.
    pub index: u64,
    pub tuple: ExponentTuple,
    pub claimed_tau: i128,
    pub recomputed_tau: i128,
    pub claimed_class: Option<u64>,
    pub recomputed_class: Option<u64>,
}

/// Record the chosen evaluator refused under its caps.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySkip {
    pub index: u64,
    pub tuple: ExponentTuple,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub checked: u64,
    pub mismatches: Vec<VerifyMismatch>,
    pub skipped: Vec<VerifySkip>,
}

/// Recomputes τ for every record of a results file with one chosen
/// evaluator and reports every disagreement with both values.
pub fn verify_results(
    input: &Path,
    method: Method,
    caps: &CostCaps,
    precision: Precision,
    workers: usize,
) -> Result<VerifyReport> {
    let file = std::fs::read(input)?;
    let results = parse_results(&file[..])?;
    let strategy = match method {
        Method::Naive => Strategy::Naive,
        Method::Histogram => Strategy::Histogram,
        Method::Zagier => Strategy::Zagier,
    };
    let pool = build_pool(workers);
    let caps_copy = *caps;
    let recomputed: Vec<std::result::Result<SignatureRecord, String>> = {
        let tuples: Vec<ExponentTuple> =
            results.records.iter().map(|r| r.tuple.clone()).collect();
        let eval = move |t: &ExponentTuple| {
            signature_only(t, strategy, &caps_copy, precision).map_err(|e| e.to_string())
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            match &pool {
                Some(pool) if workers != 1 => {
                    pool.install(|| tuples.par_iter().map(&eval).collect())
                }
                _ => tuples.iter().map(&eval).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = pool;
            tuples.iter().map(&eval).collect()
        }
    };

    let mut report = VerifyReport::default();
    for (i, (claimed, outcome)) in results.records.iter().zip(recomputed).enumerate() {
        let index = i as u64 + 1;
        match outcome {
            Ok(record) => {
                report.checked += 1;
                if record.tau != claimed.tau {
                    let recomputed_class = crate::signature::km_class(record.tau, claimed.tuple.m()).ok();
                    report.mismatches.push(VerifyMismatch {
                        index,
                        tuple: claimed.tuple.clone(),
                        claimed_tau: claimed.tau,
                        recomputed_tau: record.tau,
                        claimed_class: claimed.class,
                        recomputed_class,
                    });
                }
            }
            Err(reason) => report.skipped.push(VerifySkip {
                index,
                tuple: claimed.tuple.clone(),
                reason,
            }),
        }
    }
    Ok(report)
}

/// Writes the tuples of a hunt output back out as a candidates file.
pub fn hunt_subset_as_candidates(results_path: &Path, out: &Path) -> Result<()> {
    let file = std::fs::read(results_path)?;
    let results = parse_results(&file[..])?;
    let mut writer = BufWriter::new(File::create(out)?);
    for record in &results.records {
        writer.write_all(candidates_line(&record.tuple).as_bytes())?;
    }
    writer.flush()?;
    Ok(())
}
