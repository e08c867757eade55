use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision binary floating value `mant * 2^exp`.
///
/// A nonzero mantissa always carries exactly `prec` significant bits, so two
/// `Real`s of equal precision and equal value have identical representations.
/// Binary operations produce a result at the larger of the two precisions,
/// rounded to nearest (ties to even).
#[derive(Clone)]
pub struct Real {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

/// Round `m / 2^shift` to nearest, ties to even. Works on the magnitude so the
/// rounding is symmetric in sign.
pub(crate) fn round_shift(m: &BigInt, shift: u64) -> BigInt {
    if shift == 0 {
        return m.clone();
    }
    let mag = m.magnitude();
    let q = mag >> shift;
    let half_bit = mag.bit(shift - 1);
    let round_up = if !half_bit {
        false
    } else {
        // strictly above half, or exactly half and q odd
        let below_half = mag.trailing_zeros().map_or(false, |tz| tz < shift - 1);
        below_half || q.bit(0)
    };
    let q = if round_up { q + 1u32 } else { q };
    BigInt::from_biguint(if m.is_negative() { Sign::Minus } else { Sign::Plus }, q)
}

impl Real {
    pub fn zero(prec: u32) -> Real {
        Real {
            mant: BigInt::zero(),
            exp: 0,
            prec: prec.max(2),
        }
    }

    pub fn one(prec: u32) -> Real {
        Real::from_int(1, prec)
    }

    /// Builds `mant * 2^exp` rounded to `prec` bits.
    pub fn from_parts(mant: BigInt, exp: i64, prec: u32) -> Real {
        let prec = prec.max(2);
        if mant.is_zero() {
            return Real::zero(prec);
        }
        let bits = mant.bits() as i64;
        let p = prec as i64;
        match bits.cmp(&p) {
            Ordering::Greater => {
                let sh = (bits - p) as u64;
                let m = round_shift(&mant, sh);
                if m.bits() as i64 > p {
                    // rounded up to a power of two
                    Real {
                        mant: m >> 1usize,
                        exp: exp + sh as i64 + 1,
                        prec,
                    }
                } else {
                    Real {
                        mant: m,
                        exp: exp + sh as i64,
                        prec,
                    }
                }
            }
            Ordering::Less => {
                let sh = (p - bits) as usize;
                Real {
                    mant: mant << sh,
                    exp: exp - sh as i64,
                    prec,
                }
            }
            Ordering::Equal => Real { mant, exp, prec },
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T, prec: u32) -> Real {
        Real::from_parts(v.into(), 0, prec)
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_rational(q: &BigRational, prec: u32) -> Real {
        let prec = prec.max(2);
        let num = q.numer();
        let den = q.denom();
        if num.is_zero() {
            return Real::zero(prec);
        }
        // quotient with at least prec + 2 bits, plus a sticky bit
        let s = prec as i64 + 2 + den.bits() as i64 - num.bits() as i64;
        let (n, d) = if s >= 0 {
            (num << s as usize, den.clone())
        } else {
            (num.clone(), den << (-s) as usize)
        };
        let (quo, rem) = n.div_rem(&d);
        let (mant, exp) = if rem.is_zero() {
            (quo, -s)
        } else {
            let sticky = if quo.is_negative() { -1 } else { 1 };
            ((quo << 1usize) + sticky, -s - 1)
        };
        Real::from_parts(mant, exp, prec)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64, prec: u32) -> Real {
        assert!(v.is_finite(), "non-finite f64");
        if v == 0.0 {
            return Real::zero(prec);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Real::from_parts(BigInt::from(m) * sign, e, prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    /// Zero reports `i64::MIN`.
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn with_prec(&self, prec: u32) -> Real {
        Real::from_parts(self.mant.clone(), self.exp, prec)
    }

    pub fn abs(&self) -> Real {
        Real {
            mant: self.mant.abs(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    /// Multiplication by `2^k`, exact.
    pub fn mul_2exp(&self, k: i64) -> Real {
        if self.is_zero() {
            return self.clone();
        }
        Real {
            mant: self.mant.clone(),
            exp: self.exp + k,
            prec: self.prec,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Nearest integer of `x * 2^w`.
    pub fn to_fixed(&self, w: u32) -> BigInt {
        let sh = self.exp + w as i64;
        if sh >= 0 {
            &self.mant << sh as usize
        } else {
            round_shift(&self.mant, (-sh) as u64)
        }
    }

    pub fn from_fixed(v: BigInt, w: u32, prec: u32) -> Real {
        Real::from_parts(v, -(w as i64), prec)
    }

    /// Exact integer value, if `self` is an integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.exp >= 0 {
            return Some(&self.mant << self.exp as usize);
        }
        let sh = (-self.exp) as u64;
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        match self.mant.magnitude().trailing_zeros() {
            Some(tz) if tz >= sh => Some(&self.mant >> sh as usize),
            _ => None,
        }
    }

    /// Largest integer not above `self`.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else {
            self.mant.clone() >> (-self.exp) as usize
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let sh = (bits - 60).max(0);
        let m = (&self.mant >> sh as usize).to_f64().unwrap_or(0.0);
        let e = self.exp + sh;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        m * 2f64.powi(e as i32)
    }

    /// Base-2 logarithm of `|x|` as an `f64` estimate; for sizing decisions only.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits() as i64;
        let sh = (bits - 60).max(0);
        let m = (self.mant.magnitude() >> sh as usize).to_f64().unwrap_or(1.0);
        m.log2() + (self.exp + sh) as f64
    }

    fn add_impl(&self, other: &Real, negate_other: bool) -> Real {
        let prec = self.prec.max(other.prec);
        let om = if negate_other { -&other.mant } else { other.mant.clone() };
        if other.is_zero() {
            return self.with_prec(prec);
        }
        if self.is_zero() {
            return Real::from_parts(om, other.exp, prec);
        }
        // Bits far below the larger operand's precision window only affect
        // the last place, so alignment is capped there.
        let top = self.top().max(other.top());
        let floor_exp = top - prec as i64 - 64;
        let target = self.exp.min(other.exp).max(floor_exp);
        let align = |m: &BigInt, e: i64| -> BigInt {
            if e >= target {
                m << (e - target) as usize
            } else {
                m >> (target - e) as usize
            }
        };
        let sum = align(&self.mant, self.exp) + align(&om, other.exp);
        Real::from_parts(sum, target, prec)
    }

    pub fn sqrt(&self) -> Real {
        assert!(!self.is_negative(), "sqrt of a negative Real");
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec as i64;
        let bits = self.mant.bits() as i64;
        let mut s = (2 * prec + 4 - bits).max(0);
        if (self.exp - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let m = &self.mant << s as usize;
        let r = m.sqrt();
        let (mant, exp) = if &r * &r == m {
            (r, (self.exp - s) / 2)
        } else {
            ((r << 1usize) + 1, (self.exp - s) / 2 - 1)
        };
        Real::from_parts(mant, exp, self.prec)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: i64) -> Real {
        let prec = self.prec;
        if n == 0 {
            return Real::one(prec);
        }
        let work = prec + 16 + 2 * (64 - n.unsigned_abs().leading_zeros());
        let mut base = self.with_prec(work);
        let mut acc = Real::one(work);
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        if n < 0 {
            acc = &Real::one(work) / &acc;
        }
        acc.with_prec(prec)
    }

    pub fn recip(&self) -> Real {
        &Real::one(self.prec) / self
    }

    pub fn min_prec(a: &Real, b: &Real) -> u32 {
        a.prec.min(b.prec)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Real) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Real {}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Real) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let mag = match self.top().cmp(&other.top()) {
            Ordering::Equal => {
                let e = self.exp.min(other.exp);
                let a = self.mant.magnitude() << (self.exp - e) as usize;
                let b = other.mant.magnitude() << (other.exp - e) as usize;
                a.cmp(&b)
            }
            o => o,
        };
        if sa < 0 {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl<'a> Add<&'a Real> for &'a Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        self.add_impl(rhs, false)
    }
}

impl<'a> Sub<&'a Real> for &'a Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        self.add_impl(rhs, true)
    }
}

impl<'a> Mul<&'a Real> for &'a Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        let prec = self.prec.max(rhs.prec);
        Real::from_parts(&self.mant * &rhs.mant, self.exp + rhs.exp, prec)
    }
}

impl<'a> Div<&'a Real> for &'a Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        assert!(!rhs.is_zero(), "division by zero Real");
        let prec = self.prec.max(rhs.prec);
        if self.is_zero() {
            return Real::zero(prec);
        }
        let s = (prec as i64 + 2 + rhs.mant.bits() as i64 - self.mant.bits() as i64).max(0);
        let n = &self.mant << s as usize;
        let (quo, rem) = n.div_rem(&rhs.mant);
        let exp = self.exp - rhs.exp - s;
        let (mant, exp) = if rem.is_zero() {
            (quo, exp)
        } else {
            let sticky = if quo.is_negative() { -1 } else { 1 };
            ((quo << 1usize) + sticky, exp - 1)
        };
        Real::from_parts(mant, exp, prec)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            mant: -&self.mant,
            exp: self.exp,
            prec: self.prec,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({}, {} bits)", self.to_decimal(20), self.prec)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or_else(|| super::digits_for_bits(self.prec).max(1) as usize);
        f.write_str(&self.to_decimal(digits as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rounding_is_to_nearest_even() {
        // 0b1011 -> 3 bits: 0b110 (ties go to even)
        let r = Real::from_parts(BigInt::from(11), 0, 3);
        assert_eq!(r.to_rational(), q(12, 1));
        let r = Real::from_parts(BigInt::from(9), 0, 3);
        assert_eq!(r.to_rational(), q(8, 1));
        let r = Real::from_parts(BigInt::from(13), 0, 3);
        assert_eq!(r.to_rational(), q(12, 1));
        let r = Real::from_parts(BigInt::from(-13), 0, 3);
        assert_eq!(r.to_rational(), q(-12, 1));
        // carry into a new bit
        let r = Real::from_parts(BigInt::from(15), 0, 3);
        assert_eq!(r.to_rational(), q(16, 1));
        assert_eq!(r.mantissa().bits(), 3);
    }

    #[test]
    fn rational_conversion_is_correctly_rounded() {
        let third = Real::from_rational(&q(1, 3), 64);
        let exact = q(1, 3);
        let err = (third.to_rational() - &exact).abs();
        // half an ulp at 64 bits for a value in [1/4, 1/2)
        assert!(err <= BigRational::new(1.into(), BigInt::one() << 66usize));
        assert_eq!(Real::from_rational(&q(27, 25), 64).to_f64(), 1.08);
        assert_eq!(Real::from_rational(&q(1, 1), 64).to_f64(), 1.0);
    }

    #[test]
    fn arithmetic_basics() {
        let p = 128;
        let a = Real::from_rational(&q(1, 3), p);
        let b = Real::from_rational(&q(2, 3), p);
        let s = &a + &b;
        assert!((s.to_f64() - 1.0).abs() < 1e-30);
        let d = &a - &a;
        assert!(d.is_zero());
        let m = &a * &Real::from_int(3, p);
        assert!((m.to_f64() - 1.0).abs() < 1e-30);
        let two = Real::from_int(2, p);
        let r = two.sqrt();
        assert!((r.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!((&r * &r).with_prec(100), two.with_prec(100));
        assert_eq!(Real::from_int(3, p).powi(-2).to_f64(), 1.0 / 9.0);
    }

    #[test]
    fn ordering_and_equality() {
        let a = Real::from_f64(1.5, 64);
        let b = Real::from_f64(1.5, 200);
        assert_eq!(a, b);
        assert!(Real::from_f64(-2.0, 64) < Real::from_f64(-1.0, 64));
        assert!(Real::from_f64(0.25, 64) < Real::from_f64(0.5, 53));
        assert!(Real::zero(64) > Real::from_f64(-1e-300, 64));
    }

    #[test]
    fn far_apart_addition_keeps_the_larger_operand() {
        let big = Real::from_int(1, 64);
        let tiny = Real::from_parts(BigInt::one(), -10_000, 64);
        assert_eq!(&big + &tiny, big);
        assert_eq!(&tiny + &big, big);
    }
}
