//! Numeric substrate: the binary float `Real`, exact rationals, elementary
//! functions, the precision policy and the agreement metric.

mod decimal;
mod elementary;
mod real;

use std::fmt;

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use decimal::parse_decimal;
pub(crate) use decimal::floor_log10;
pub use elementary::ln_rational;
pub(crate) use elementary::ln_ratio_fixed;
pub use real::Real;
pub(crate) use real::round_shift;

/// Bits of slack the accuracy contract allows every operation.
pub const GUARD_ALLOWANCE: u32 = 8;

/// Extra bits carried above the decimal target.
pub const DEFAULT_GUARD_BITS: u32 = 64;

/// `ceil(digits * log2(10))`.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}

/// Decimal digits representable in `bits` bits, `floor(bits * log10(2))`.
pub fn digits_for_bits(bits: u32) -> u32 {
    (bits as f64 * std::f64::consts::LOG10_2).floor() as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub working_bits: u32,
    pub guard_bits: u32,
    pub target_digits: u32,
}

impl PrecisionPolicy {
    pub fn for_digits(target_digits: u32) -> PrecisionPolicy {
        PrecisionPolicy {
            working_bits: bits_for_digits(target_digits) + DEFAULT_GUARD_BITS,
            guard_bits: DEFAULT_GUARD_BITS,
            target_digits,
        }
    }

    /// The same target with 64 more working bits, for the re-check run.
    pub fn recheck(&self) -> PrecisionPolicy {
        PrecisionPolicy {
            working_bits: self.working_bits + 64,
            ..*self
        }
    }
}

/// `q` correctly rounded to `p` bits.
pub fn to_real(q: &BigRational, p: u32) -> Real {
    Real::from_rational(q, p)
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Number of agreeing decimal digits, or `Exact` for identical values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Agreement {
    Digits(i64),
    Exact,
}

impl Agreement {
    pub fn at_least(&self, digits: i64) -> bool {
        match self {
            Agreement::Exact => true,
            Agreement::Digits(d) => *d >= digits,
        }
    }

    /// Digits as an integer, with `Exact` mapped to `i64::MAX`.
    pub fn as_i64(&self) -> i64 {
        match self {
            Agreement::Exact => i64::MAX,
            Agreement::Digits(d) => *d,
        }
    }
}

impl fmt::Display for Agreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agreement::Exact => f.write_str("MAX"),
            Agreement::Digits(d) => write!(f, "{d}"),
        }
    }
}

/// `floor(-log10(|a - b| / max(|a|, |b|)))`, computed exactly.
pub fn agreement_digits(a: &Real, b: &Real) -> Agreement {
    if a == b {
        return Agreement::Exact;
    }
    let (qa, qb) = (a.to_rational(), b.to_rational());
    let diff = (&qa - &qb).abs();
    let scale = qa.abs().max(qb.abs());
    if scale.is_zero() {
        return Agreement::Exact;
    }
    // floor(-log10(d/s)) = -ceil(log10(d/s)) = -(floor_log10(d/s) + 1) unless d/s is a power of ten
    let r = diff / scale;
    let fl = floor_log10(&r);
    let exact_pow = {
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut p = BigRational::from_integer(BigInt::from(1));
        if fl >= 0 {
            for _ in 0..fl {
                p = &p * &ten;
            }
        } else {
            for _ in 0..(-fl) {
                p = &p / &ten;
            }
        }
        p == r
    };
    Agreement::Digits(if exact_pow { -fl } else { -fl - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_bits() {
        let p = PrecisionPolicy::for_digits(40);
        assert_eq!(p.working_bits, 133 + 64);
        assert!(p.working_bits >= bits_for_digits(p.target_digits) + p.guard_bits);
        assert_eq!(p.recheck().working_bits, p.working_bits + 64);
        assert_eq!(digits_for_bits(128), 38);
    }

    #[test]
    fn to_real_examples() {
        assert_eq!(to_real(&rational(1, 1), 64), Real::one(64));
        assert_eq!(to_real(&rational(27, 25), 64).to_decimal(10), "1.080000000");
        assert_eq!(to_real(&rational(-1, 12), 64).to_decimal(5), "-0.083333");
    }

    #[test]
    fn agreement_examples() {
        let a = Real::from_decimal_str("1.0000", 64).unwrap();
        let b = Real::from_decimal_str("1.0001", 64).unwrap();
        // relative difference is 0.0001/1.0001, just under 1e-4
        assert_eq!(agreement_digits(&a, &b), Agreement::Digits(4));
        assert_eq!(agreement_digits(&a, &a), Agreement::Exact);
        assert_eq!(agreement_digits(&Real::zero(64), &Real::zero(128)), Agreement::Exact);
        let e1 = Real::one(128).exp();
        let e2 = Real::one(256).exp();
        assert!(agreement_digits(&e1, &e2).at_least(36));
        assert_eq!(agreement_digits(&e1, &e2), agreement_digits(&e2, &e1));
        let x = Real::from_int(1, 64);
        let y = Real::from_int(2, 64);
        assert_eq!(agreement_digits(&x, &y), Agreement::Digits(0));
    }

    #[test]
    fn ln_rational_reciprocal() {
        let q = rational(1, 2);
        assert_eq!(ln_rational(&q, 128), -Real::ln2(128));
        assert!(ln_rational(&rational(1, 1), 64).is_zero());
    }
}
