//! Recursive search for exponent tuples passing both the Kähler-Einstein
//! certificate and the homotopy-sphere test, within a box of per-coordinate
//! bounds.
//!
//! Pruning is sound only: a prefix is abandoned exactly when no completion
//! can satisfy the reciprocal-sum inequalities, so the emitted set always
//! equals a brute-force filter over the box.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::sylvester;
use crate::topology::{is_homotopy_sphere, klt_certificate, ExponentTuple};

/// Inclusive per-coordinate search box. Lower bounds are non-decreasing and
/// at least 2; upper bounds dominate the lower bounds componentwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRange {
    lo: Vec<u64>,
    hi: Vec<u64>,
}

impl SearchRange {
    pub fn new(lo: Vec<u64>, hi: Vec<u64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidRange {
                reason: "empty bounds".into(),
            });
        }
        if lo.len() != hi.len() {
            return Err(Error::InvalidRange {
                reason: format!(
                    "lower bounds have length {}, upper bounds {}",
                    lo.len(),
                    hi.len()
                ),
            });
        }
        for i in 0..lo.len() {
            if lo[i] < 2 {
                return Err(Error::InvalidRange {
                    reason: format!("lower bound {} at position {} is below 2", lo[i], i + 1),
                });
            }
            if i > 0 && lo[i - 1] > lo[i] {
                return Err(Error::InvalidRange {
                    reason: "lower bounds must be non-decreasing".into(),
                });
            }
            if lo[i] > hi[i] {
                return Err(Error::InvalidRange {
                    reason: format!("lower bound exceeds upper bound at position {}", i + 1),
                });
            }
        }
        Ok(SearchRange { lo, hi })
    }

    /// The maximal range of the finiteness bounds for tuple length m ≥ 4,
    /// with upper bounds saturated to u64 when they exceed it.
    pub fn default_for(m: usize) -> Result<Self> {
        let hi = proposition_bounds(m)?
            .into_iter()
            .map(|b| b.to_u64().unwrap_or(u64::MAX))
            .collect();
        SearchRange::new(vec![2; m], hi)
    }

    pub fn m(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[u64] {
        &self.lo
    }

    pub fn hi(&self) -> &[u64] {
        &self.hi
    }
}

/// Exact inclusive upper bounds implied by the extremal sequence:
/// a_k ≤ (m−k+1)(c_k − 1) − 1 for k < m and
/// a_m ≤ ⌈(m!/(m−2))(c_m − 1)⌉ − 1.
pub fn proposition_bounds(m: usize) -> Result<Vec<BigUint>> {
    if m < 4 {
        return Err(Error::BoundsDomain { m });
    }
    let mut bounds = Vec::with_capacity(m);
    for k in 1..m {
        let c = sylvester(k as u32) - BigUint::one();
        bounds.push(BigUint::from((m - k + 1) as u64) * c - BigUint::one());
    }
    let factorial: BigUint = (1..=m as u128).product::<u128>().into();
    let c = sylvester(m as u32) - BigUint::one();
    let divisor = BigUint::from(m as u64 - 2);
    let numer = factorial * c;
    // ceil(numer / divisor) − 1
    let ceiling = (&numer + &divisor - BigUint::one()) / &divisor;
    bounds.push(ceiling - BigUint::one());
    Ok(bounds)
}

/// Emits every sorted tuple in the range passing all three Kähler-Einstein
/// inequalities and the homotopy-sphere test, in lexicographic order, and
/// returns how many were emitted.
pub fn enumerate_candidates<F>(range: &SearchRange, mut sink: F) -> Result<u64>
where
    F: FnMut(&ExponentTuple) -> Result<()>,
{
    let mut search = Search {
        range,
        m: range.m(),
        values: Vec::with_capacity(range.m()),
        count: 0,
        sink: &mut sink,
    };
    let partial = BigRational::zero();
    search.descend(0, &partial)?;
    Ok(search.count)
}

struct Search<'a, F> {
    range: &'a SearchRange,
    m: usize,
    values: Vec<u64>,
    count: u64,
    sink: &'a mut F,
}

impl<F> Search<'_, F>
where
    F: FnMut(&ExponentTuple) -> Result<()>,
{
    fn descend(&mut self, depth: usize, partial: &BigRational) -> Result<()> {
        let start = self
            .values
            .last()
            .map_or(self.range.lo[depth], |&prev| prev.max(self.range.lo[depth]));
        let remaining = (self.m - depth) as u64;
        let one = BigRational::one();
        let excess_scale = BigInt::from(self.m as u64 - 2);

        for v in start..=self.range.hi[depth] {
            let v_big = BigInt::from(v);
            // Largest total still reachable: the current slot and every later
            // one contribute at most 1/v each. At the last slot this is the
            // exact complement of the first inequality.
            let reach =
                partial + BigRational::new(BigInt::from(remaining), v_big.clone());
            if reach <= one {
                break;
            }
            // Smallest total is partial + 1/v while the largest entry is at
            // least v, so the second inequality fails for every completion
            // once (partial − 1)·v·(m−2) ≥ 1. Exact complement at the last
            // slot.
            if partial > &one {
                let excess = (partial - &one)
                    * BigRational::new(v_big * excess_scale.clone(), BigInt::one());
                if excess >= one {
                    break;
                }
            }
            if depth + 1 == self.m {
                let mut entries = self.values.clone();
                entries.push(v);
                let tuple = ExponentTuple::from_sorted(entries)
                    .expect("search values are sorted and at least 2");
                if is_homotopy_sphere(&tuple)?.is_sphere() {
                    let cert = klt_certificate(&tuple);
                    debug_assert!(
                        cert.cond1 && cert.cond2,
                        "pruning must match the certificate"
                    );
                    if cert.passes {
                        (self.sink)(&tuple)?;
                        self.count += 1;
                    }
                }
            } else {
                self.values.push(v);
                let next = partial + BigRational::new(BigInt::one(), BigInt::from(v));
                self.descend(depth + 1, &next)?;
                self.values.pop();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proposition_bounds_m5() {
        let bounds = proposition_bounds(5).unwrap();
        let expected: Vec<BigUint> = [4u64, 7, 17, 83, 72_239]
            .iter()
            .map(|&v| BigUint::from(v))
            .collect();
        assert_eq!(bounds, expected);
    }

    #[test]
    fn proposition_bounds_m7_head() {
        let bounds = proposition_bounds(7).unwrap();
        assert_eq!(bounds[0], BigUint::from(6u64));
        assert_eq!(bounds[1], BigUint::from(11u64));
    }

    #[test]
    fn proposition_bounds_m4() {
        let bounds = proposition_bounds(4).unwrap();
        let expected: Vec<BigUint> = [3u64, 5, 11, 503]
            .iter()
            .map(|&v| BigUint::from(v))
            .collect();
        assert_eq!(bounds, expected);
    }

    #[test]
    fn proposition_bounds_m9_exceeds_u64() {
        let bounds = proposition_bounds(9).unwrap();
        assert!(bounds[8] > BigUint::from(u64::MAX));
        // Saturation keeps the range constructible.
        let range = SearchRange::default_for(9).unwrap();
        assert_eq!(range.hi()[8], u64::MAX);
    }

    #[test]
    fn bounds_domain_guard() {
        assert!(matches!(proposition_bounds(3), Err(Error::BoundsDomain { m: 3 })));
        assert!(matches!(
            SearchRange::default_for(3),
            Err(Error::BoundsDomain { m: 3 })
        ));
    }

    #[test]
    fn range_validation() {
        assert!(SearchRange::new(vec![2, 3, 4], vec![6, 11, 30]).is_ok());
        assert!(SearchRange::new(vec![3, 2, 4], vec![6, 11, 30]).is_err());
        assert!(SearchRange::new(vec![2, 3, 4], vec![6, 2, 30]).is_err());
        assert!(SearchRange::new(vec![1, 3, 4], vec![6, 11, 30]).is_err());
        assert!(SearchRange::new(vec![], vec![]).is_err());
    }

    #[test]
    fn fixed_prefix_window() {
        let range =
            SearchRange::new(vec![2, 3, 7, 43, 43], vec![2, 3, 7, 43, 100]).unwrap();
        let mut found = Vec::new();
        enumerate_candidates(&range, |t| {
            found.push(t.clone());
            Ok(())
        })
        .unwrap();
        let favored = ExponentTuple::new(vec![2, 3, 7, 43, 47]).unwrap();
        let rejected = ExponentTuple::new(vec![2, 3, 7, 43, 43]).unwrap();
        assert!(found.contains(&favored));
        assert!(!found.contains(&rejected));
    }

    #[test]
    fn emission_is_lexicographic_and_unique() {
        let range = SearchRange::new(vec![2; 5], vec![12; 5]).unwrap();
        let mut emitted = Vec::new();
        enumerate_candidates(&range, |t| {
            emitted.push(t.entries().to_vec());
            Ok(())
        })
        .unwrap();
        let mut sorted = emitted.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(emitted, sorted);
        assert!(!emitted.is_empty());
    }
}
