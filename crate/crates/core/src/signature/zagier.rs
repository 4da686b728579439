//! Signature by the cotangent sum
//! τ = ((−1)^k / N) Σ_{j=0}^{N−1} cot(π(2j+1)/2N) · Π_i cot(π(2j+1)/2aᵢ),
//! where N is any common multiple of the exponents.
//!
//! Per-exponent cotangent factors depend only on (2j+1) mod 2aᵢ and come
//! from small precomputed tables; only the N-dependent factor is evaluated
//! per term. Terms where some argument is exactly π/2 carry an exact zero
//! factor, detected on the integers, never by epsilon. Accumulation is
//! compensated and chunked, with chunk results merged in a fixed order, so
//! the sequential and parallel paths produce identical bits.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::error::{Error, Result};
use crate::topology::ExponentTuple;

use super::dd::{self, Dd};
use super::{map_ordered, split_ranges, Precision, PrecisionLevel};

/// Outcome of one cotangent-sum evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZagierEvaluation {
    pub tau: i128,
    /// The common multiple N that sized the sum.
    pub multiple: u64,
    /// Distance from the raw sum to the returned integer; below 1/4 by
    /// construction.
    pub residual: f64,
    pub level: PrecisionLevel,
}

/// Evaluates the sum with N = lcm(a), climbing the precision ladder as
/// requested.
pub fn tau_zagier(
    tuple: &ExponentTuple,
    precision: Precision,
    max_level: PrecisionLevel,
) -> Result<ZagierEvaluation> {
    let n = default_multiple(tuple)?;
    evaluate(tuple, n, precision, max_level, false)
}

/// Sequential twin of [`tau_zagier`], bypassing the thread pool.
pub fn tau_zagier_serial(
    tuple: &ExponentTuple,
    precision: Precision,
    max_level: PrecisionLevel,
) -> Result<ZagierEvaluation> {
    let n = default_multiple(tuple)?;
    evaluate(tuple, n, precision, max_level, true)
}

/// Evaluates the sum with an explicit common multiple of the exponents; the
/// result does not depend on which multiple is chosen.
pub fn tau_zagier_with_multiple(
    tuple: &ExponentTuple,
    n: u64,
    precision: Precision,
    max_level: PrecisionLevel,
) -> Result<ZagierEvaluation> {
    if tuple.entries().iter().any(|&a| n % a != 0) {
        return Err(Error::NotCommonMultiple { n });
    }
    if n > 1 << 52 {
        return Err(Error::MultipleTooLarge);
    }
    evaluate(tuple, n, precision, max_level, false)
}

fn default_multiple(tuple: &ExponentTuple) -> Result<u64> {
    let n = u64::try_from(&tuple.lcm()).map_err(|_| Error::MultipleTooLarge)?;
    if n > 1 << 52 {
        return Err(Error::MultipleTooLarge);
    }
    Ok(n)
}

fn evaluate(
    tuple: &ExponentTuple,
    n: u64,
    precision: Precision,
    max_level: PrecisionLevel,
    force_serial: bool,
) -> Result<ZagierEvaluation> {
    let m = tuple.m();
    if m % 2 == 0 {
        return Err(Error::EvenArity { m });
    }
    let negate = ((m - 1) / 2) % 2 == 1;
    let levels: Vec<PrecisionLevel> = match precision {
        Precision::Fixed(level) => vec![level],
        Precision::Auto => [
            PrecisionLevel::Hardware,
            PrecisionLevel::Bits128,
            PrecisionLevel::Bits256,
        ]
        .into_iter()
        .filter(|&l| l <= max_level)
        .collect(),
    };

    let a = tuple.entries();
    let mut worst = f64::INFINITY;
    for level in levels {
        let outcome = match level {
            PrecisionLevel::Hardware => evaluate_level::<f64>(a, n, negate, force_serial),
            PrecisionLevel::Bits128 => evaluate_level::<Dd>(a, n, negate, force_serial),
            PrecisionLevel::Bits256 => evaluate_level::<F256>(a, n, negate, force_serial),
        };
        if let Some((tau, residual)) = outcome {
            if residual < 0.25 {
                return Ok(ZagierEvaluation {
                    tau,
                    multiple: n,
                    residual,
                    level,
                });
            }
            worst = residual;
        }
    }
    Err(Error::PrecisionInsufficient { residual: worst })
}

/// Working float of one precision rung.
pub(crate) trait WorkFloat: Clone + Send + Sync {
    type Acc: Clone + Send;
    /// cot(π u / n2) with 0 < u < n2 and n2 even; exactly zero at u = n2/2.
    fn cot_pi(u: u64, n2: u64) -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, rhs: &Self) -> Self;
    fn acc_zero() -> Self::Acc;
    fn acc_add(acc: &mut Self::Acc, term: &Self);
    fn acc_finish(acc: Self::Acc) -> Self;
    /// Applies the sign, divides by N, and rounds; None when the magnitude
    /// is too large for this precision to resolve a quarter-unit window.
    fn finalize(total: Self, negate: bool, n: u64) -> Option<(i128, f64)>;
}

fn evaluate_level<W: WorkFloat>(
    a: &[u64],
    n: u64,
    negate: bool,
    force_serial: bool,
) -> Option<(i128, f64)> {
    let n2 = 2 * n;
    let two_a: Vec<u64> = a.iter().map(|&ai| 2 * ai).collect();
    let tables: Vec<Vec<W>> = a
        .iter()
        .map(|&ai| (0..ai).map(|r| W::cot_pi(2 * r + 1, 2 * ai)).collect())
        .collect();

    let ranges = split_ranges(n);
    let scan = |&(start, end): &(u64, u64)| -> W {
        let mut acc = W::acc_zero();
        let mut residues: Vec<u64> = two_a.iter().map(|&t| (2 * start + 1) % t).collect();
        let mut o = 2 * start + 1;
        for _ in start..end {
            'term: {
                if o == n {
                    break 'term;
                }
                let mut w = W::cot_pi(o, n2);
                for (table, &r) in tables.iter().zip(&residues) {
                    let factor = &table[(r >> 1) as usize];
                    if factor.is_zero() {
                        break 'term;
                    }
                    w = w.mul(factor);
                }
                W::acc_add(&mut acc, &w);
            }
            o += 2;
            for (res, &t) in residues.iter_mut().zip(&two_a) {
                *res += 2;
                if *res >= t {
                    *res -= t;
                }
            }
        }
        W::acc_finish(acc)
    };

    let chunk_sums: Vec<W> = if force_serial {
        ranges.iter().map(scan).collect()
    } else {
        map_ordered(&ranges, scan)
    };
    let mut acc = W::acc_zero();
    for sum in &chunk_sums {
        W::acc_add(&mut acc, sum);
    }
    W::finalize(W::acc_finish(acc), negate, n)
}

/// Splits a float into nearest integer and fractional remainder using two
/// rounding passes, valid when the fraction is carried partly by a low-order
/// component of a multi-part value.
fn two_stage_round(hi: f64, lo: f64) -> (i128, f64) {
    let a = hi.round();
    let b = lo + (hi - a);
    let c = b.round();
    (a as i128 + c as i128, (b - c).abs())
}

impl WorkFloat for f64 {
    type Acc = (f64, f64);

    fn cot_pi(u: u64, n2: u64) -> f64 {
        debug_assert!(u > 0 && u < n2);
        if 2 * u == n2 {
            return 0.0;
        }
        let theta = std::f64::consts::PI * (u as f64) / (n2 as f64);
        let (s, c) = theta.sin_cos();
        c / s
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn mul(&self, rhs: &f64) -> f64 {
        self * rhs
    }

    fn acc_zero() -> (f64, f64) {
        (0.0, 0.0)
    }

    fn acc_add(acc: &mut (f64, f64), term: &f64) {
        let y = term - acc.1;
        let t = acc.0 + y;
        acc.1 = (t - acc.0) - y;
        acc.0 = t;
    }

    fn acc_finish(acc: (f64, f64)) -> f64 {
        acc.0
    }

    fn finalize(total: f64, negate: bool, n: u64) -> Option<(i128, f64)> {
        let raw = if negate { -total } else { total } / n as f64;
        if !raw.is_finite() || raw.abs() >= (1u64 << 51) as f64 {
            return None;
        }
        Some(two_stage_round(raw, 0.0))
    }
}

impl WorkFloat for Dd {
    type Acc = Dd;

    fn cot_pi(u: u64, n2: u64) -> Dd {
        dd::cot_pi_ratio(u, n2)
    }

    fn is_zero(&self) -> bool {
        Dd::is_zero(*self)
    }

    fn mul(&self, rhs: &Dd) -> Dd {
        Dd::mul(*self, *rhs)
    }

    fn acc_zero() -> Dd {
        Dd::ZERO
    }

    fn acc_add(acc: &mut Dd, term: &Dd) {
        *acc = acc.add(*term);
    }

    fn acc_finish(acc: Dd) -> Dd {
        acc
    }

    fn finalize(total: Dd, negate: bool, n: u64) -> Option<(i128, f64)> {
        let signed = if negate { total.neg() } else { total };
        let raw = signed.div(Dd::from_u64(n));
        if !raw.hi.is_finite() || raw.hi.abs() >= (1u128 << 103) as f64 {
            return None;
        }
        Some(two_stage_round(raw.hi, raw.lo))
    }
}

/// 256-bit software float on top of a big-float library; the cold top rung
/// of the ladder.
#[derive(Clone)]
pub(crate) struct F256(BigFloat);

/// Working precision in bits; extra guard bits over the nominal 256.
const P256: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(
        Consts::new().expect("constants cache allocation")
    );
}

fn bf_from_u64(v: u64) -> BigFloat {
    BigFloat::from_u64(v, P256)
}

fn bf_to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let Some((words, _len, sign, exponent, _inexact)) = v.as_raw_parts() else {
        return f64::NAN;
    };
    // Words are little-endian; the top word holds the leading 64 mantissa
    // bits of a value in [0.5, 1) × 2^exponent.
    let top = *words.last().expect("normalized mantissa") as f64;
    let magnitude = top * (exponent as f64 - 64.0).exp2();
    if sign == Sign::Neg {
        -magnitude
    } else {
        magnitude
    }
}

impl WorkFloat for F256 {
    type Acc = F256;

    fn cot_pi(u: u64, n2: u64) -> F256 {
        debug_assert!(n2 % 2 == 0 && u > 0 && u < n2);
        let half = n2 / 2;
        if u == half {
            return F256(BigFloat::new(P256));
        }
        if u > half {
            let mut flipped = Self::cot_pi(n2 - u, n2).0;
            flipped.inv_sign();
            return F256(flipped);
        }
        CONSTS.with(|cc| {
            let cc = &mut *cc.borrow_mut();
            let pi = cc.pi(P256, RM);
            let theta = pi
                .mul(&bf_from_u64(u), P256, RM)
                .div(&bf_from_u64(n2), P256, RM);
            let sin = theta.sin(P256, RM, cc);
            let cos = theta.cos(P256, RM, cc);
            F256(cos.div(&sin, P256, RM))
        })
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn mul(&self, rhs: &F256) -> F256 {
        F256(self.0.mul(&rhs.0, P256, RM))
    }

    fn acc_zero() -> F256 {
        F256(BigFloat::new(P256))
    }

    fn acc_add(acc: &mut F256, term: &F256) {
        acc.0 = acc.0.add(&term.0, P256, RM);
    }

    fn acc_finish(acc: F256) -> F256 {
        acc
    }

    fn finalize(total: F256, negate: bool, n: u64) -> Option<(i128, f64)> {
        let mut signed = total.0;
        if negate {
            signed.inv_sign();
        }
        let raw = signed.div(&bf_from_u64(n), P256, RM);
        if raw.is_nan() || raw.is_inf() {
            return None;
        }
        if raw.exponent().is_some_and(|e| e >= 250) {
            return None;
        }
        let coarse = bf_to_f64(&raw).round();
        let base = coarse as i128;
        let rest = raw.sub_full_prec(&BigFloat::from_f64(coarse, P256));
        let (extra, residual) = two_stage_round(bf_to_f64(&rest), 0.0);
        Some((base + extra, residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::naive::tau_naive;

    fn tuple(values: &[u64]) -> ExponentTuple {
        ExponentTuple::new(values.to_vec()).unwrap()
    }

    fn eval(values: &[u64], precision: Precision) -> ZagierEvaluation {
        tau_zagier(&tuple(values), precision, PrecisionLevel::Bits256).unwrap()
    }

    #[test]
    fn two_term_sum_is_exactly_one() {
        for level in [
            PrecisionLevel::Hardware,
            PrecisionLevel::Bits128,
            PrecisionLevel::Bits256,
        ] {
            let out = eval(&[2, 2, 2, 2, 2], Precision::Fixed(level));
            assert_eq!(out.tau, 1, "level {level}");
            assert_eq!(out.multiple, 2);
            assert!(out.residual < 1e-9);
        }
    }

    #[test]
    fn agrees_with_naive_including_sign() {
        // m = 3 exercises the (−1)^k sign: k = 1 flips.
        let out = eval(&[3, 3, 3], Precision::Auto);
        assert_eq!(out.tau, -6);
        assert_eq!(tau_naive(&tuple(&[3, 3, 3]), 1 << 20).unwrap(), -6);

        for vals in [
            vec![2, 2, 2, 3, 5],
            vec![2, 3, 7, 43, 47],
            vec![2, 3, 4, 5, 6, 7, 9],
            vec![4, 5, 6, 7, 9],
        ] {
            let t = tuple(&vals);
            let want = tau_naive(&t, 1 << 26).unwrap();
            let out = tau_zagier(&t, Precision::Auto, PrecisionLevel::Bits256).unwrap();
            assert_eq!(out.tau, want, "{t}");
        }
    }

    #[test]
    fn multiple_choice_does_not_matter() {
        for vals in [vec![2, 2, 2, 3, 5], vec![3, 4, 5, 7, 9], vec![2, 3, 11, 13, 17]] {
            let t = tuple(&vals);
            let n = u64::try_from(&t.lcm()).unwrap();
            let a = tau_zagier_with_multiple(&t, n, Precision::Auto, PrecisionLevel::Bits256)
                .unwrap();
            let b = tau_zagier_with_multiple(&t, 2 * n, Precision::Auto, PrecisionLevel::Bits256)
                .unwrap();
            assert_eq!(a.tau, b.tau);
        }
    }

    #[test]
    fn rejects_non_multiples() {
        let t = tuple(&[2, 3, 7, 43, 47]);
        assert!(matches!(
            tau_zagier_with_multiple(&t, 30, Precision::Auto, PrecisionLevel::Bits256),
            Err(Error::NotCommonMultiple { n: 30 })
        ));
    }

    #[test]
    fn serial_and_parallel_match_bitwise() {
        let t = tuple(&[2, 3, 7, 43, 47]);
        let par = tau_zagier(&t, Precision::Auto, PrecisionLevel::Bits256).unwrap();
        let ser = tau_zagier_serial(&t, Precision::Auto, PrecisionLevel::Bits256).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn extended_levels_agree_on_small_tuples() {
        for vals in [vec![2, 2, 2, 3, 5], vec![3, 3, 3], vec![2, 3, 7, 11, 13]] {
            let base = eval(&vals, Precision::Fixed(PrecisionLevel::Hardware)).tau;
            assert_eq!(eval(&vals, Precision::Fixed(PrecisionLevel::Bits128)).tau, base);
            assert_eq!(eval(&vals, Precision::Fixed(PrecisionLevel::Bits256)).tau, base);
        }
    }

    #[test]
    fn even_arity_is_rejected() {
        assert!(matches!(
            tau_zagier(&tuple(&[2, 3, 5, 7]), Precision::Auto, PrecisionLevel::Bits256),
            Err(Error::EvenArity { m: 4 })
        ));
    }

    #[test]
    fn big_float_round_trip() {
        for v in [0.0, 1.5, -2.75, 26576.0, -1.0e10, 3.25e-9] {
            let bf = BigFloat::from_f64(v, P256);
            assert_eq!(bf_to_f64(&bf), v);
        }
    }
}
