//! Milnor-fiber signature by three interchangeable evaluators and the map
//! from τ to the class residue in bP₄ₖ.

pub mod dd;
pub mod histogram;
pub mod naive;
pub mod zagier;

pub use histogram::{build_histogram, tau_histogram, LatticeHistogram};
pub use naive::{tau_naive, tau_naive_serial};
pub use zagier::{tau_zagier, tau_zagier_serial, tau_zagier_with_multiple, ZagierEvaluation};

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::numeric::bp_order;
use crate::topology::{is_homotopy_sphere, ExponentTuple};

/// Evaluator that produced a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Naive,
    Histogram,
    Zagier,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Histogram => "histogram",
            Method::Zagier => "zagier",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Method> {
        match tag {
            "naive" => Some(Method::Naive),
            "histogram" => Some(Method::Histogram),
            "zagier" => Some(Method::Zagier),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Working precision of the cotangent-sum evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrecisionLevel {
    /// Plain IEEE double.
    Hardware,
    /// Double-double software floats, ~106 mantissa bits.
    Bits128,
    /// 256-bit software floats.
    Bits256,
}

impl std::fmt::Display for PrecisionLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrecisionLevel::Hardware => "hardware",
            PrecisionLevel::Bits128 => "128",
            PrecisionLevel::Bits256 => "256",
        })
    }
}

/// Requested precision: one fixed level, or a ladder that climbs until the
/// rounding residual drops below 1/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Auto,
    Fixed(PrecisionLevel),
}

/// Resource limits steering the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostCaps {
    /// Most lattice points the naive evaluator may enumerate.
    pub naive_points: u128,
    /// Largest working set the histogram evaluator may allocate.
    pub histogram_bytes: u128,
    /// Highest rung of the precision ladder.
    pub max_precision: PrecisionLevel,
}

impl Default for CostCaps {
    fn default() -> Self {
        CostCaps {
            naive_points: 100_000_000,
            histogram_bytes: 1 << 30,
            max_precision: PrecisionLevel::Bits256,
        }
    }
}

/// Evaluator selection for one classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Cheapest applicable evaluator under the caps.
    Auto,
    Naive,
    Histogram,
    Zagier,
    /// Two independent evaluators that must agree.
    CrossCheck,
}

/// One classified tuple: the exact signature, how it was computed, and the
/// class residue when the link is a homotopy sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureRecord {
    pub tuple: ExponentTuple,
    pub tau: i128,
    pub method: Method,
    /// Common multiple N used by the evaluator.
    pub multiple: u64,
    /// Distance from the raw cotangent sum to the returned integer.
    pub residual: Option<f64>,
    pub precision: Option<PrecisionLevel>,
    /// Residue in [0, |bP₄ₖ|); 0 denotes the standard sphere. Absent when
    /// the link is not a homotopy sphere or m < 5.
    pub class: Option<u64>,
}

/// τ/8 reduced into [0, |bP₄ₖ|) for m = 2k+1; 0 is the standard sphere.
pub fn km_class(tau: i128, m: usize) -> Result<u64> {
    if m % 2 == 0 || m < 5 {
        return Err(Error::ClassArity { m });
    }
    if tau % 8 != 0 {
        return Err(Error::TauNotDivisible { tau });
    }
    let k = ((m - 1) / 2) as u32;
    let order = bp_order(k)?.order;
    let class = BigInt::from(tau / 8).mod_floor(&BigInt::from(order.clone()));
    u64::try_from(&class).map_err(|_| Error::OrderOverflow { k })
}

/// Order of bP₄ₖ for tuple length m = 2k+1, as u64.
pub fn class_order(m: usize) -> Result<u64> {
    if m % 2 == 0 || m < 5 {
        return Err(Error::ClassArity { m });
    }
    let k = ((m - 1) / 2) as u32;
    let order = bp_order(k)?.order;
    u64::try_from(&order).map_err(|_| Error::OrderOverflow { k })
}

/// Computes τ with the requested strategy and attaches the class residue
/// when the link passes the homotopy-sphere test.
pub fn classify(
    tuple: &ExponentTuple,
    strategy: Strategy,
    caps: &CostCaps,
    precision: Precision,
) -> Result<SignatureRecord> {
    let mut record = signature_only(tuple, strategy, caps, precision)?;
    let m = tuple.m();
    if m >= 5 && m % 2 == 1 && is_homotopy_sphere(tuple)?.is_sphere() {
        record.class = Some(km_class(record.tau, m)?);
    }
    Ok(record)
}

/// Computes τ with the requested strategy; never attaches a class.
pub fn signature_only(
    tuple: &ExponentTuple,
    strategy: Strategy,
    caps: &CostCaps,
    precision: Precision,
) -> Result<SignatureRecord> {
    match strategy {
        Strategy::Naive => run_naive(tuple, caps),
        Strategy::Histogram => run_histogram(tuple, caps),
        Strategy::Zagier => run_zagier(tuple, caps, precision),
        Strategy::Auto => match cheapest_exact(tuple, caps) {
            Some(Method::Naive) => run_naive(tuple, caps),
            Some(Method::Histogram) => run_histogram(tuple, caps),
            _ => run_zagier(tuple, caps, precision),
        },
        Strategy::CrossCheck => {
            let exact = match cheapest_exact(tuple, caps) {
                Some(Method::Naive) => run_naive(tuple, caps)?,
                Some(Method::Histogram) => run_histogram(tuple, caps)?,
                _ => return Err(Error::NoExactMethod),
            };
            let zagier = run_zagier(tuple, caps, precision)?;
            if exact.tau != zagier.tau {
                return Err(Error::CrossCheckMismatch {
                    tuple: tuple.to_string(),
                    a: exact.method.tag(),
                    tau_a: exact.tau,
                    b: zagier.method.tag(),
                    tau_b: zagier.tau,
                    records: Box::new((exact, zagier)),
                });
            }
            Ok(exact)
        }
    }
}

/// Cheapest applicable exact evaluator under the caps, if any.
fn cheapest_exact(tuple: &ExponentTuple, caps: &CostCaps) -> Option<Method> {
    let points = tuple.lattice_points();
    let n = u64::try_from(&tuple.lcm()).ok().filter(|&n| n <= 1 << 52);
    let hist_ok =
        n.is_some_and(|n| histogram::histogram_bytes(n) <= caps.histogram_bytes);
    let hist_ops = n.map_or(u128::MAX, |n| tuple.m() as u128 * 2 * n as u128);
    if points <= caps.naive_points && (points <= hist_ops || !hist_ok) {
        Some(Method::Naive)
    } else if hist_ok {
        Some(Method::Histogram)
    } else {
        None
    }
}

fn run_naive(tuple: &ExponentTuple, caps: &CostCaps) -> Result<SignatureRecord> {
    let tau = tau_naive(tuple, caps.naive_points)?;
    let n = u64::try_from(&tuple.lcm()).map_err(|_| Error::MultipleTooLarge)?;
    Ok(SignatureRecord {
        tuple: tuple.clone(),
        tau,
        method: Method::Naive,
        multiple: n,
        residual: None,
        precision: None,
        class: None,
    })
}

fn run_histogram(tuple: &ExponentTuple, caps: &CostCaps) -> Result<SignatureRecord> {
    let (tau, n) = tau_histogram(tuple, caps.histogram_bytes)?;
    Ok(SignatureRecord {
        tuple: tuple.clone(),
        tau,
        method: Method::Histogram,
        multiple: n,
        residual: None,
        precision: None,
        class: None,
    })
}

fn run_zagier(
    tuple: &ExponentTuple,
    caps: &CostCaps,
    precision: Precision,
) -> Result<SignatureRecord> {
    let eval = tau_zagier(tuple, precision, caps.max_precision)?;
    Ok(SignatureRecord {
        tuple: tuple.clone(),
        tau: eval.tau,
        method: Method::Zagier,
        multiple: eval.multiple,
        residual: Some(eval.residual),
        precision: Some(eval.level),
        class: None,
    })
}

/// Fixed-size index chunks; the same chunking is used by the sequential and
/// parallel paths so results match bit for bit.
pub(crate) fn split_ranges(total: u64) -> Vec<(u64, u64)> {
    const CHUNK: u64 = 1 << 20;
    let mut ranges = Vec::with_capacity((total / CHUNK + 1) as usize);
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        ranges.push((start, end));
        start = end;
    }
    ranges
}

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}
