//! Signature by exact residue histograms: each coordinate's scaled values
//! xᵢ·(N/aᵢ) form a comb modulo 2N, and the coordinates are folded one at a
//! time by cyclic convolution. No rounding anywhere.
//!
//! Bucket counters start as u64 and the whole fold restarts with
//! arbitrary-precision counters if any bucket overflows.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::topology::ExponentTuple;

/// Counts of partial lattice points per scaled residue modulo 2N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeHistogram {
    modulus: u64,
    counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Counts {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

struct Overflow;

impl LatticeHistogram {
    /// Point mass at residue zero: the empty product of combs.
    pub fn new(modulus: u64) -> Self {
        let mut counts = vec![0u64; modulus as usize];
        counts[0] = 1;
        LatticeHistogram {
            modulus,
            counts: Counts::Small(counts),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn uses_big_counters(&self) -> bool {
        matches!(self.counts, Counts::Big(_))
    }

    pub fn count(&self, residue: u64) -> BigUint {
        match &self.counts {
            Counts::Small(v) => BigUint::from(v[residue as usize]),
            Counts::Big(v) => v[residue as usize].clone(),
        }
    }

    pub fn total(&self) -> BigUint {
        match &self.counts {
            Counts::Small(v) => v.iter().map(|&c| BigUint::from(c)).sum(),
            Counts::Big(v) => v.iter().sum(),
        }
    }

    /// Convolves with the comb {x·step mod 2N : x = 1..=points}, promoting
    /// to arbitrary-precision counters on overflow.
    pub fn fold_comb(&mut self, step: u64, points: u64) {
        let promoted = match &self.counts {
            Counts::Small(v) => match fold_small(v, self.modulus, step, points) {
                Ok(next) => {
                    self.counts = Counts::Small(next);
                    return;
                }
                Err(Overflow) => v.iter().map(|&c| BigUint::from(c)).collect(),
            },
            Counts::Big(v) => v.clone(),
        };
        self.counts = Counts::Big(fold_big(&promoted, self.modulus, step, points));
    }

    /// Signature read-off: residues in (0, N) minus residues in (N, 2N).
    pub fn tau(&self) -> Result<i128> {
        let n = (self.modulus / 2) as usize;
        let (plus, minus): (BigUint, BigUint) = match &self.counts {
            Counts::Small(v) => (
                v[1..n].iter().map(|&c| BigUint::from(c)).sum(),
                v[n + 1..].iter().map(|&c| BigUint::from(c)).sum(),
            ),
            Counts::Big(v) => (v[1..n].iter().sum(), v[n + 1..].iter().sum()),
        };
        let tau = BigInt::from(plus) - BigInt::from(minus);
        i128::try_from(&tau).map_err(|_| Error::NaiveCapExceeded {
            required: u128::MAX,
            cap: u128::MAX,
        })
    }
}

fn fold_small(counts: &[u64], modulus: u64, step: u64, points: u64) -> std::result::Result<Vec<u64>, Overflow> {
    let body = |range: std::ops::Range<usize>, out: &mut [u64]| -> std::result::Result<(), Overflow> {
        for (slot, t) in out.iter_mut().zip(range) {
            let mut acc: u64 = 0;
            let mut idx = t as u64;
            for _ in 0..points {
                idx = if idx >= step { idx - step } else { idx + modulus - step };
                acc = acc.checked_add(counts[idx as usize]).ok_or(Overflow)?;
            }
            *slot = acc;
        }
        Ok(())
    };
    run_folds(modulus as usize, body)
}

fn fold_big(counts: &[BigUint], modulus: u64, step: u64, points: u64) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); modulus as usize];
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = BigUint::zero();
        let mut idx = t as u64;
        for _ in 0..points {
            idx = if idx >= step { idx - step } else { idx + modulus - step };
            acc += &counts[idx as usize];
        }
        *slot = acc;
    }
    out
}

#[cfg(feature = "parallel")]
fn run_folds<F>(modulus: usize, body: F) -> std::result::Result<Vec<u64>, Overflow>
where
    F: Fn(std::ops::Range<usize>, &mut [u64]) -> std::result::Result<(), Overflow> + Sync,
{
    use rayon::prelude::*;
    let mut out = vec![0u64; modulus];
    let chunk = 1 << 14;
    let failed = out
        .par_chunks_mut(chunk)
        .enumerate()
        .map(|(i, slice)| {
            let start = i * chunk;
            body(start..start + slice.len(), slice)
        })
        .any(|r| r.is_err());
    if failed {
        Err(Overflow)
    } else {
        Ok(out)
    }
}

#[cfg(not(feature = "parallel"))]
fn run_folds<F>(modulus: usize, body: F) -> std::result::Result<Vec<u64>, Overflow>
where
    F: Fn(std::ops::Range<usize>, &mut [u64]) -> std::result::Result<(), Overflow> + Sync,
{
    let mut out = vec![0u64; modulus];
    body(0..modulus, &mut out)?;
    Ok(out)
}

/// Exact signature by histogram convolution, along with the common multiple
/// N it used. Refuses when the two working arrays would exceed the byte cap.
pub fn tau_histogram(tuple: &ExponentTuple, mem_cap_bytes: u128) -> Result<(i128, u64)> {
    let hist = build_histogram(tuple, mem_cap_bytes)?;
    debug_assert_eq!(hist.total(), lattice_points_exact(tuple));
    Ok((hist.tau()?, hist.modulus() / 2))
}

pub(crate) fn lattice_points_exact(tuple: &ExponentTuple) -> BigUint {
    tuple
        .entries()
        .iter()
        .map(|&a| BigUint::from(a - 1))
        .product()
}

/// Builds the fully folded histogram. Coordinates fold densest comb first so
/// the largest one is materialized directly instead of convolved.
pub fn build_histogram(tuple: &ExponentTuple, mem_cap_bytes: u128) -> Result<LatticeHistogram> {
    if tuple.m() % 2 == 0 {
        return Err(Error::EvenArity { m: tuple.m() });
    }
    let n = u64::try_from(&tuple.lcm()).map_err(|_| Error::MultipleTooLarge)?;
    if n > 1 << 62 {
        return Err(Error::MultipleTooLarge);
    }
    let required = histogram_bytes(n);
    if required > mem_cap_bytes {
        return Err(Error::HistogramCapExceeded {
            required,
            cap: mem_cap_bytes,
        });
    }
    let modulus = 2 * n;
    let mut order: Vec<u64> = tuple.entries().to_vec();
    order.sort_unstable_by(|x, y| y.cmp(x));

    let mut hist = LatticeHistogram::new(modulus);
    // Densest comb: place directly, a delta at zero convolved with anything
    // is the comb itself.
    let first = order[0];
    let step = n / first;
    let mut counts = vec![0u64; modulus as usize];
    for x in 1..first {
        counts[(x * step) as usize] = 1;
    }
    hist.counts = Counts::Small(counts);
    for &a in &order[1..] {
        hist.fold_comb(n / a, a - 1);
    }
    Ok(hist)
}

/// Working-set estimate: input and output arrays of 2N u64 buckets.
pub fn histogram_bytes(n: u64) -> u128 {
    2 * (2 * n as u128) * 8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::naive::tau_naive;

    fn tuple(values: &[u64]) -> ExponentTuple {
        ExponentTuple::new(values.to_vec()).unwrap()
    }

    #[test]
    fn matches_naive_on_examples() {
        let t = tuple(&[2, 2, 2, 3, 5]);
        let (tau, n) = tau_histogram(&t, 1 << 30).unwrap();
        assert_eq!(tau, 8);
        assert_eq!(n, 30);

        let t = tuple(&[2, 3, 7, 43, 47]);
        let (tau, _) = tau_histogram(&t, 1 << 30).unwrap();
        assert_eq!(tau, tau_naive(&t, 1 << 20).unwrap());
        assert_eq!(tau % 8, 0);
    }

    #[test]
    fn matches_naive_on_m3() {
        let t = tuple(&[3, 3, 3]);
        assert_eq!(tau_histogram(&t, 1 << 30).unwrap().0, -6);
    }

    #[test]
    fn conservation_per_fold() {
        let t = tuple(&[4, 5, 6, 7, 9]);
        let n = u64::try_from(&t.lcm()).unwrap();
        let mut hist = LatticeHistogram::new(2 * n);
        let mut expected = BigUint::from(1u32);
        for &a in t.entries().iter().rev() {
            hist.fold_comb(n / a, a - 1);
            expected *= BigUint::from(a - 1);
            assert_eq!(hist.total(), expected);
        }
        assert_eq!(hist.tau().unwrap(), tau_naive(&t, 1 << 30).unwrap());
    }

    #[test]
    fn memory_cap_refusal() {
        let t = tuple(&[2, 3, 7, 43, 47]);
        match tau_histogram(&t, 1024) {
            Err(Error::HistogramCapExceeded { required, cap }) => {
                assert_eq!(cap, 1024);
                assert!(required > 1024);
            }
            other => panic!("expected cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn promotes_to_big_counters() {
        // (1000,)^9 has 999^9 ~ 9.9e26 lattice points: bucket counters blow
        // through u64 midway through the folds.
        let t = tuple(&[1000; 9]);
        let hist = build_histogram(&t, 1 << 30).unwrap();
        assert!(hist.uses_big_counters());
        assert_eq!(hist.total(), lattice_points_exact(&t));
        let tau = hist.tau().unwrap();
        // The cotangent sum at 128-bit precision is an independent route to
        // the same integer (hardware precision cannot resolve it here).
        let z = crate::signature::tau_zagier(
            &t,
            crate::signature::Precision::Fixed(crate::signature::PrecisionLevel::Bits128),
            crate::signature::PrecisionLevel::Bits256,
        )
        .unwrap();
        assert_eq!(tau, z.tau);
    }

    #[test]
    fn even_arity_is_rejected() {
        assert!(matches!(
            tau_histogram(&tuple(&[2, 3, 5, 7]), 1 << 30),
            Err(Error::EvenArity { m: 4 })
        ));
    }
}
