//! Signature by direct lattice enumeration: every interior point of the box
//! is classified by the residue of Σ xᵢ/aᵢ modulo 2, computed exactly as
//! Σ xᵢ·(N/aᵢ) modulo 2N.

use crate::error::{Error, Result};
use crate::topology::ExponentTuple;

use super::split_ranges;

/// Point tally of one enumeration: residues in (0, N) count plus, residues
/// in (N, 2N) count minus, and exact 0 or N counts neither.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PointTally {
    pub plus: u64,
    pub minus: u64,
    pub neither: u64,
}

impl PointTally {
    fn merge(self, o: PointTally) -> PointTally {
        PointTally {
            plus: self.plus + o.plus,
            minus: self.minus + o.minus,
            neither: self.neither + o.neither,
        }
    }

    pub fn tau(self) -> i128 {
        self.plus as i128 - self.minus as i128
    }

    pub fn total(self) -> u128 {
        self.plus as u128 + self.minus as u128 + self.neither as u128
    }
}

/// Exact signature by nested enumeration; refuses when Π (aᵢ − 1) exceeds
/// the cap, reporting the required cost.
pub fn tau_naive(tuple: &ExponentTuple, cap: u128) -> Result<i128> {
    Ok(tally_points(tuple, cap, false)?.tau())
}

/// Sequential twin of [`tau_naive`], bypassing the thread pool.
pub fn tau_naive_serial(tuple: &ExponentTuple, cap: u128) -> Result<i128> {
    Ok(tally_points(tuple, cap, true)?.tau())
}

pub(crate) fn tally_points(
    tuple: &ExponentTuple,
    cap: u128,
    force_serial: bool,
) -> Result<PointTally> {
    if tuple.m() % 2 == 0 {
        return Err(Error::EvenArity { m: tuple.m() });
    }
    let points = tuple.lattice_points();
    if points > cap || points > u64::MAX as u128 {
        return Err(Error::NaiveCapExceeded {
            required: points,
            cap,
        });
    }
    let points = points as u64;
    let n = u64::try_from(&tuple.lcm()).map_err(|_| Error::MultipleTooLarge)?;
    if n > 1 << 62 {
        return Err(Error::MultipleTooLarge);
    }

    let a = tuple.entries().to_vec();
    let steps: Vec<u64> = a.iter().map(|&ai| n / ai).collect();
    let ranges = split_ranges(points);
    let scan = |&(start, end): &(u64, u64)| scan_range(&a, &steps, n, start, end);

    let tallies: Vec<PointTally> = if force_serial {
        ranges.iter().map(scan).collect()
    } else {
        super::map_ordered(&ranges, scan)
    };
    let tally = tallies
        .into_iter()
        .fold(PointTally::default(), PointTally::merge);
    debug_assert_eq!(tally.total(), points as u128);
    Ok(tally)
}

/// Walks flattened grid indices [start, end) with an odometer over the
/// digits xᵢ − 1, maintaining the residue incrementally.
fn scan_range(a: &[u64], steps: &[u64], n: u64, start: u64, end: u64) -> PointTally {
    let m = a.len();
    let n2 = 2 * n;
    // Decode the mixed-radix digits of `start`, last coordinate fastest.
    let mut digits = vec![0u64; m];
    let mut rest = start;
    for i in (0..m).rev() {
        let radix = a[i] - 1;
        digits[i] = rest % radix;
        rest /= radix;
    }
    let mut rho: u64 = 0;
    for i in 0..m {
        rho = (rho + ((digits[i] + 1) as u128 * steps[i] as u128 % n2 as u128) as u64) % n2;
    }
    // Wrap-back amount when digit i rolls over from its maximum to zero.
    let back: Vec<u64> = (0..m)
        .map(|i| ((a[i] - 2) as u128 * steps[i] as u128 % n2 as u128) as u64)
        .collect();

    let mut tally = PointTally::default();
    let mut remaining = end - start;
    loop {
        if rho == 0 || rho == n {
            tally.neither += 1;
        } else if rho < n {
            tally.plus += 1;
        } else {
            tally.minus += 1;
        }
        remaining -= 1;
        if remaining == 0 {
            break;
        }
        // Advance the odometer.
        let mut i = m - 1;
        loop {
            digits[i] += 1;
            if digits[i] < a[i] - 1 {
                rho += steps[i];
                if rho >= n2 {
                    rho -= n2;
                }
                break;
            }
            digits[i] = 0;
            rho = (rho + n2 - back[i]) % n2;
            i -= 1;
        }
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(values: &[u64]) -> ExponentTuple {
        ExponentTuple::new(values.to_vec()).unwrap()
    }

    #[test]
    fn hand_checked_values() {
        assert_eq!(tau_naive(&tuple(&[2, 2, 2, 2, 2]), 1 << 20).unwrap(), 1);
        assert_eq!(tau_naive(&tuple(&[2, 2, 2, 3, 5]), 1 << 20).unwrap(), 8);
        assert_eq!(tau_naive(&tuple(&[3, 3, 3]), 1 << 20).unwrap(), -6);
    }

    #[test]
    fn point_split_accounts_for_every_point() {
        let t = tuple(&[3, 3, 3]);
        let tally = tally_points(&t, 1 << 20, true).unwrap();
        assert_eq!(tally.total(), 8);
        assert_eq!(tally.neither, 2); // sums exactly 1 and 2
        assert_eq!(tally.minus, 6);
        assert_eq!(tally.plus, 0);
    }

    #[test]
    fn even_arity_is_rejected() {
        assert!(matches!(
            tau_naive(&tuple(&[2, 3, 5, 7]), 1 << 20),
            Err(Error::EvenArity { m: 4 })
        ));
    }

    #[test]
    fn cap_refusal_reports_cost() {
        let t = tuple(&[11, 11, 11, 11, 11]);
        match tau_naive(&t, 1000) {
            Err(Error::NaiveCapExceeded { required, cap }) => {
                assert_eq!(required, 100_000);
                assert_eq!(cap, 1000);
            }
            other => panic!("expected cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn parallel_and_serial_agree() {
        for vals in [vec![2, 3, 7, 11, 13], vec![4, 5, 6, 7, 9], vec![2, 2, 3, 3, 25]] {
            let t = tuple(&vals);
            assert_eq!(
                tau_naive(&t, 1 << 30).unwrap(),
                tau_naive_serial(&t, 1 << 30).unwrap()
            );
        }
    }

    #[test]
    fn permutation_invariance() {
        let base = tau_naive(&tuple(&[2, 3, 4, 5, 6]), 1 << 20).unwrap();
        let permuted = ExponentTuple::new(vec![6, 4, 2, 5, 3]).unwrap();
        assert_eq!(tau_naive(&permuted, 1 << 20).unwrap(), base);
    }
}
