//! Double-double arithmetic (pairs of f64 with ~106-bit effective mantissa)
//! and the cotangent of rational multiples of pi on top of it.
//!
//! Products use Dekker splitting rather than fused multiply-add so results
//! are identical on targets without an FMA unit.

/// Unevaluated sum hi + lo with |lo| at most half an ulp of hi.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    let err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141_592_653_589_793,
        lo: 1.224_646_799_147_353_2e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion; any u64 splits into two doubles without loss.
    #[inline]
    pub fn from_u64(x: u64) -> Dd {
        let hi = x as f64;
        let lo = (x as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Exact conversion for values below 2^106.
    pub fn from_u128(x: u128) -> Dd {
        debug_assert!(x < 1 << 106);
        let hi = x as f64;
        let lo = (x as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn from_i128(x: i128) -> Dd {
        let mag = Dd::from_u128(x.unsigned_abs());
        if x < 0 {
            mag.neg()
        } else {
            mag
        }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    /// Exact ratio of two u64 values to full double-double accuracy.
    #[inline]
    pub fn from_ratio(n: u64, d: u64) -> Dd {
        Dd::from_u64(n).div(Dd::from_u64(d))
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }
}

const TAYLOR_TERMS: usize = 16;

/// 1/(2k+1)! for k = 0..16, exact factorials divided in double-double.
fn sin_coeffs() -> &'static [Dd; TAYLOR_TERMS] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Dd; TAYLOR_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [Dd::ZERO; TAYLOR_TERMS];
        let mut fact = 1u128;
        let mut arg = 1u128;
        for (k, slot) in out.iter_mut().enumerate() {
            while arg < (2 * k as u128 + 1) {
                arg += 1;
                fact *= arg;
            }
            *slot = Dd::ONE.div(Dd::from_u128(fact));
            if k % 2 == 1 {
                *slot = slot.neg();
            }
        }
        out
    })
}

/// 1/(2k)! for k = 0..16.
fn cos_coeffs() -> &'static [Dd; TAYLOR_TERMS] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Dd; TAYLOR_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [Dd::ZERO; TAYLOR_TERMS];
        let mut fact = 1u128;
        let mut arg = 0u128;
        for (k, slot) in out.iter_mut().enumerate() {
            while arg < (2 * k as u128) {
                arg += 1;
                fact *= arg;
            }
            *slot = Dd::ONE.div(Dd::from_u128(fact));
            if k % 2 == 1 {
                *slot = slot.neg();
            }
        }
        out
    })
}

/// Taylor sine, valid for |x| up to pi/4.
fn sin_taylor(x: Dd) -> Dd {
    let x2 = x.mul(x);
    let coeffs = sin_coeffs();
    let mut acc = coeffs[TAYLOR_TERMS - 1];
    for k in (0..TAYLOR_TERMS - 1).rev() {
        acc = acc.mul(x2).add(coeffs[k]);
    }
    x.mul(acc)
}

/// Taylor cosine, valid for |x| up to pi/4.
fn cos_taylor(x: Dd) -> Dd {
    let x2 = x.mul(x);
    let coeffs = cos_coeffs();
    let mut acc = coeffs[TAYLOR_TERMS - 1];
    for k in (0..TAYLOR_TERMS - 1).rev() {
        acc = acc.mul(x2).add(coeffs[k]);
    }
    acc
}

/// cot(pi * u / n2) for 0 < u < n2 with n2 even.
///
/// All reductions happen on the integers u and n2 before any rounding: the
/// half-turn reflection, the quarter-turn complement, and the exact zero at
/// u = n2/2, so accuracy is uniform across the whole period.
pub fn cot_pi_ratio(u: u64, n2: u64) -> Dd {
    debug_assert!(n2 % 2 == 0);
    debug_assert!(u > 0 && u < n2);
    let half = n2 / 2;
    if u == half {
        return Dd::ZERO;
    }
    if u > half {
        return cot_pi_ratio(n2 - u, n2).neg();
    }
    if 4 * u == n2 {
        return Dd::ONE;
    }
    if 4 * u < n2 {
        let theta = Dd::PI.mul(Dd::from_ratio(u, n2));
        cos_taylor(theta).div(sin_taylor(theta))
    } else {
        // cot(pi x) = tan(pi (1/2 - x))
        let v = half - u;
        let theta = Dd::PI.mul(Dd::from_ratio(v, n2));
        sin_taylor(theta).div(cos_taylor(theta))
    }
}
