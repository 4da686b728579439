//! Exact integer and rational arithmetic: gcd/lcm, the Sylvester (extremal)
//! sequence, Bernoulli numbers, and the order of the group bP₄ₖ.

use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

/// Order of the cyclic group bP₄ₖ of homotopy (4k−1)-spheres bounding
/// parallelizable manifolds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpOrder {
    pub k: u32,
    pub order: BigUint,
}

/// Greatest common divisor of a non-empty sequence.
pub fn gcd_all(values: &[u64]) -> Result<u64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().fold(0u64, |acc, &v| acc.gcd(&v)))
}

/// Least common multiple of a non-empty sequence, exact at any magnitude.
pub fn lcm_all(values: &[u64]) -> Result<BigUint> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut acc = BigUint::one();
    for &v in values {
        acc = acc.lcm(&BigUint::from(v));
    }
    Ok(acc)
}

/// k-th term of the Sylvester sequence 2, 3, 7, 43, 1807, …, defined by
/// c₁ = 2 and c_{k+1} = c₁⋯c_k + 1 = c_k² − c_k + 1.
///
/// The sum of reciprocals of the first m terms is 1 − 1/(c_{m+1} − 1), and
/// among m naturals with reciprocal sum below 1 this is the closest approach
/// to 1, which is what makes the sequence extremal.
pub fn sylvester(k: u32) -> BigUint {
    assert!(k >= 1, "sylvester sequence starts at k = 1");
    let mut c = BigUint::from(2u32);
    for _ in 1..k {
        c = &c * &c - &c + 1u32;
    }
    c
}

/// Absolute value of the 2m-th Bernoulli number as an exact rational:
/// B₁ = 1/6, B₂ = 1/30, B₃ = 1/42, B₄ = 1/30, B₅ = 5/66, …
///
/// Computed by the defining recurrence Σ_{j=0}^{n-1} C(n+1,j)·B_j = −(n+1)·B_n
/// over exact rationals; no floating point anywhere. Values are cached.
pub fn bernoulli_abs(m: u32) -> ExactRational {
    assert!(m >= 1, "bernoulli index starts at m = 1");
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![BigRational::one()]));
    let mut table = cache.lock().expect("bernoulli cache poisoned");
    let n = 2 * m as usize;
    while table.len() <= n {
        let next = table.len();
        // binomial row C(next+1, j) for j = 0..=next
        let mut binom = BigUint::one();
        let mut sum = BigRational::zero();
        for (j, b) in table.iter().enumerate() {
            sum += b * BigRational::from(BigInt::from(binom.clone()));
            binom = binom * BigUint::from(next + 1 - j) / BigUint::from(j + 1);
        }
        let value = -sum / BigRational::from(BigInt::from(next as u64 + 1));
        table.push(value);
    }
    table[n].abs()
}

/// Order of bP₄ₖ: 2^{2k−2}·(2^{2k−1} − 1)·numerator(4·Bₖ/k), with the
/// numerator taken of the reduced fraction and Bₖ = `bernoulli_abs(k)`.
///
/// Yields 28, 992, 8128 for k = 2, 3, 4. For k = 5 the formula evaluates to
/// 261632; a figure of 130,816 circulates in the literature but does not
/// match the formula itself, so the formula value is returned.
pub fn bp_order(k: u32) -> Result<BpOrder> {
    if k < 2 {
        return Err(Error::BpOrderDomain { k });
    }
    let fraction = bernoulli_abs(k) * BigRational::new(BigInt::from(4), BigInt::from(k));
    let numerator = fraction
        .numer()
        .magnitude()
        .clone();
    let order = (BigUint::one() << (2 * k - 2))
        * ((BigUint::one() << (2 * k - 1)) - BigUint::one())
        * numerator;
    Ok(BpOrder { k, order })
}

/// Exact Σ 1/vᵢ over a sequence of positive integers.
pub fn reciprocal_sum(values: &[u64]) -> ExactRational {
    values
        .iter()
        .map(|&v| BigRational::new(BigInt::one(), BigInt::from(v)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_all_examples() {
        assert_eq!(gcd_all(&[6, 10, 15]).unwrap(), 1);
        assert_eq!(gcd_all(&[8, 12]).unwrap(), 4);
        assert_eq!(gcd_all(&[7]).unwrap(), 7);
        assert!(matches!(gcd_all(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn lcm_all_examples() {
        assert_eq!(lcm_all(&[2, 2, 2, 3, 5]).unwrap(), BigUint::from(30u32));
        assert_eq!(
            lcm_all(&[3, 4, 8, 8, 9, 43, 83, 85, 97]).unwrap(),
            BigUint::from(2_118_701_160u64)
        );
        assert_eq!(
            lcm_all(&[6, 6, 6, 6, 6, 10, 25, 59, 73]).unwrap(),
            BigUint::from(646_050u64)
        );
        assert!(matches!(lcm_all(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn sylvester_listing() {
        let expected: [u64; 7] = [2, 3, 7, 43, 1807, 3_263_443, 10_650_056_950_807];
        for (i, &want) in expected.iter().enumerate() {
            assert_eq!(sylvester(i as u32 + 1), BigUint::from(want));
        }
    }

    #[test]
    fn sylvester_recursions_agree() {
        let mut product = BigUint::one();
        for k in 1..=10u32 {
            let c_k = sylvester(k);
            let c_next = sylvester(k + 1);
            assert_eq!(c_next, &c_k * &c_k - &c_k + 1u32);
            product *= &c_k;
            assert_eq!(c_next, &product + 1u32);
        }
    }

    #[test]
    fn sylvester_reciprocal_identity() {
        // Σ_{i=1..m} 1/cᵢ = 1 − 1/(c_{m+1} − 1), exactly.
        for m in 2..=8u32 {
            let sum: BigRational = (1..=m)
                .map(|i| {
                    BigRational::new(BigInt::one(), BigInt::from(sylvester(i)))
                })
                .sum();
            let tail = BigRational::new(
                BigInt::one(),
                BigInt::from(sylvester(m + 1) - BigUint::one()),
            );
            assert_eq!(sum, BigRational::one() - tail);
        }
    }

    /// Independent oracle: the explicit double sum
    /// B_n = Σ_{k=0}^{n} 1/(k+1) Σ_{j=0}^{k} (−1)^j C(k,j) j^n.
    fn bernoulli_oracle(n: u32) -> BigRational {
        let mut total = BigRational::zero();
        for k in 0..=n {
            let mut inner = BigInt::zero();
            let mut binom = BigInt::one();
            for j in 0..=k {
                let jn = if j == 0 && n == 0 {
                    BigInt::one()
                } else {
                    BigInt::from(j).pow(n)
                };
                let term = &binom * jn;
                if j % 2 == 0 {
                    inner += term;
                } else {
                    inner -= term;
                }
                binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
            }
            total += BigRational::new(inner, BigInt::from(k + 1));
        }
        total
    }

    #[test]
    fn bernoulli_matches_independent_oracle() {
        for m in 1..=8u32 {
            assert_eq!(bernoulli_abs(m), bernoulli_oracle(2 * m).abs(), "m = {m}");
        }
    }

    #[test]
    fn bernoulli_frozen_values() {
        let cases = [(1u32, 1i64, 6i64), (2, 1, 30), (3, 1, 42), (4, 1, 30), (5, 5, 66)];
        for (m, num, den) in cases {
            assert_eq!(
                bernoulli_abs(m),
                BigRational::new(BigInt::from(num), BigInt::from(den))
            );
        }
    }

    #[test]
    fn bp_order_known_groups() {
        assert_eq!(bp_order(2).unwrap().order, BigUint::from(28u32));
        assert_eq!(bp_order(3).unwrap().order, BigUint::from(992u32));
        assert_eq!(bp_order(4).unwrap().order, BigUint::from(8128u32));
        assert_eq!(bp_order(5).unwrap().order, BigUint::from(261_632u32));
        assert!(matches!(bp_order(1), Err(Error::BpOrderDomain { k: 1 })));
    }

    #[test]
    fn extremal_bound_for_three_terms() {
        // Brute force over all triples 2 ≤ a₁ ≤ a₂ ≤ a₃ ≤ 200 with Σ 1/aᵢ < 1:
        // the maximum is 41/42, attained by (2, 3, 7).
        let mut best_num: u128 = 0;
        let mut best_den: u128 = 1;
        for a1 in 2u128..=200 {
            for a2 in a1..=200 {
                for a3 in a2..=200 {
                    let num = a2 * a3 + a1 * a3 + a1 * a2;
                    let den = a1 * a2 * a3;
                    if num < den && num * best_den > best_num * den {
                        best_num = num;
                        best_den = den;
                    }
                }
            }
        }
        assert_eq!(best_num * 42, best_den * 41);
    }
}
