//! Fixed-point series kernels and the elementary functions built on them.
//!
//! Fixed-point values are `BigInt`s scaled by `2^w`. Every kernel returns a
//! value within a few units of `2^-w` of the true result; callers add guard
//! bits before rounding back to a `Real`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::real::Real;

type FixedCache = OnceLock<Mutex<HashMap<u32, BigInt>>>;

static LN2_CACHE: FixedCache = OnceLock::new();
static PI_CACHE: FixedCache = OnceLock::new();

fn cached(cache: &FixedCache, w: u32, compute: impl FnOnce(u32) -> BigInt) -> BigInt {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("fixed cache poisoned").get(&w) {
        return v.clone();
    }
    let v = compute(w);
    map.lock()
        .expect("fixed cache poisoned")
        .entry(w)
        .or_insert(v)
        .clone()
}

/// `atanh(1/n) * 2^w`.
fn atanh_recip_fixed(n: u64, w: u32) -> BigInt {
    let g = 16;
    let n2 = BigInt::from(n) * n;
    let mut term: BigInt = (BigInt::one() << (w + g) as usize) / n;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        term /= &n2;
        if term.is_zero() {
            break;
        }
        sum += &term / (2 * k + 1);
        k += 1;
    }
    sum >> g as usize
}

/// `atan(1/n) * 2^w`.
fn atan_recip_fixed(n: u64, w: u32) -> BigInt {
    let g = 16;
    let n2 = BigInt::from(n) * n;
    let mut term: BigInt = (BigInt::one() << (w + g) as usize) / n;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        term /= &n2;
        if term.is_zero() {
            break;
        }
        let t = &term / (2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    sum >> g as usize
}

/// `ln 2 * 2^w`, from 18·atanh(1/26) − 2·atanh(1/4801) + 8·atanh(1/8749).
pub(crate) fn ln2_fixed(w: u32) -> BigInt {
    cached(&LN2_CACHE, w, |w| {
        let ww = w + 8;
        let v = atanh_recip_fixed(26, ww) * 18 - atanh_recip_fixed(4801, ww) * 2
            + atanh_recip_fixed(8749, ww) * 8;
        super::real::round_shift(&v, 8)
    })
}

/// `π * 2^w` by Machin's formula.
pub(crate) fn pi_fixed(w: u32) -> BigInt {
    cached(&PI_CACHE, w, |w| {
        let ww = w + 8;
        let v = atan_recip_fixed(5, ww) * 16 - atan_recip_fixed(239, ww) * 4;
        super::real::round_shift(&v, 8)
    })
}

/// `atanh(t) * 2^w` for a fixed-point `t` with `|t| <= 1/5`.
fn atanh_fixed(t: &BigInt, w: u32) -> BigInt {
    if t.is_negative() {
        return -atanh_fixed(&-t, w);
    }
    let t2 = (t * t) >> w as usize;
    let mut term = t.clone();
    let mut sum = t.clone();
    let mut k: u64 = 1;
    loop {
        term = (&term * &t2) >> w as usize;
        if term.is_zero() {
            break;
        }
        sum += &term / (2 * k + 1);
        k += 1;
    }
    sum
}

/// `ln(num/den) * 2^w` for positive integers. Absolute error is a few units
/// of `2^-w`; relative accuracy for arguments near one is the caller's job.
pub(crate) fn ln_ratio_fixed(num: &BigInt, den: &BigInt, w: u32) -> BigInt {
    debug_assert!(num.is_positive() && den.is_positive());
    let g = 24;
    let ww = w + g;
    let mut a = num.clone();
    let mut b = den.clone();
    // reduce num/den into [2/3, 4/3] by a power of two
    let mut e = a.bits() as i64 - b.bits() as i64;
    if e > 0 {
        b <<= e as usize;
    } else if e < 0 {
        a <<= (-e) as usize;
    }
    while &a * 3 > &b * 4 {
        b <<= 1usize;
        e += 1;
    }
    while &a * 3 < &b * 2 {
        a <<= 1usize;
        e -= 1;
    }
    let mut acc = BigInt::zero();
    if a != b {
        let t = ((&a - &b) << ww as usize) / (&a + &b);
        acc = atanh_fixed(&t, ww) * 2;
    }
    if e != 0 {
        acc += ln2_fixed(ww) * e;
    }
    super::real::round_shift(&acc, g as u64)
}

/// `exp(r) * 2^w` for a fixed-point `|r| <= 1`.
fn exp_fixed_small(r: &BigInt, w: u32) -> BigInt {
    // halve the argument `s` times, sum the Taylor series, square back
    let s = ((w as f64).sqrt() / 2.0).ceil() as u32;
    let ww = w + s + 16;
    let x = if ww >= w {
        (r << (ww - w) as usize) >> s as usize
    } else {
        unreachable!()
    };
    let one = BigInt::one() << ww as usize;
    let mut sum = one.clone();
    let mut term = one;
    let mut i: u64 = 1;
    loop {
        term = ((&term * &x) >> ww as usize) / i;
        if term.is_zero() {
            break;
        }
        sum += &term;
        i += 1;
    }
    for _ in 0..s {
        sum = (&sum * &sum) >> ww as usize;
    }
    super::real::round_shift(&sum, (ww - w) as u64)
}

/// `sin(r) * 2^w` for a fixed-point `|r| <= 4`.
fn sin_fixed_small(r: &BigInt, w: u32) -> BigInt {
    // triple-angle reduction: sin 3y = 3 sin y − 4 sin³ y
    let s = ((w as f64).sqrt() / 3.0).ceil() as u32;
    let ww = w + 2 * s + 16;
    let three_s = BigInt::from(3u32).pow(s);
    let y = (r << (ww - w) as usize) / &three_s;
    let y2 = (&y * &y) >> ww as usize;
    let mut sum = y.clone();
    let mut term = y;
    let mut i: u64 = 1;
    loop {
        term = ((&term * &y2) >> ww as usize) / ((2 * i) * (2 * i + 1));
        if term.is_zero() {
            break;
        }
        if i % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        i += 1;
    }
    for _ in 0..s {
        let cube = (((&sum * &sum) >> ww as usize) * &sum) >> ww as usize;
        sum = &sum * 3 - cube * 4;
    }
    super::real::round_shift(&sum, (ww - w) as u64)
}

/// `ln(q)` for an exact positive rational, with relative error below `2^-prec`
/// up to the guard allowance.
pub fn ln_rational(q: &BigRational, prec: u32) -> Real {
    assert!(q.is_positive(), "ln of a non-positive rational");
    let (num, den) = (q.numer(), q.denom());
    if num == den {
        return Real::zero(prec);
    }
    // near one, ln q ≈ (num − den)/den: add the bits that cancellation removes
    let diff_bits = (num - den).bits() as i64;
    let scale_bits = num.bits().max(den.bits()) as i64;
    let extra = (scale_bits - diff_bits).max(0) as u32;
    let w = prec + 16 + extra;
    Real::from_fixed(ln_ratio_fixed(num, den, w), w, prec)
}

impl Real {
    pub fn pi(prec: u32) -> Real {
        let w = prec + 16;
        Real::from_fixed(pi_fixed(w), w, prec)
    }

    pub fn ln2(prec: u32) -> Real {
        let w = prec + 16;
        Real::from_fixed(ln2_fixed(w), w, prec)
    }

    /// `e^x`. Panics if `|x|` exceeds `2^62`.
    pub fn exp(&self) -> Real {
        let prec = self.prec();
        if self.is_zero() {
            return Real::one(prec);
        }
        if self.top() < -(prec as i64) - 8 {
            return &Real::one(prec + 8) + self;
        }
        assert!(self.top() < 62, "exp argument out of range");
        let w = prec + 24;
        // k = round(x / ln 2); the reduction needs bits(k) extra bits of ln 2
        let kguess = (self.to_f64() / std::f64::consts::LN_2).round() as i64;
        let kbits = 64 - kguess.unsigned_abs().leading_zeros();
        let wr = w + kbits + 8;
        let x = self.to_fixed(wr);
        let mut k = BigInt::from(kguess);
        let l2 = ln2_fixed(wr);
        let mut r = &x - &k * &l2;
        // fix up k if the f64 guess was off
        let half = &l2 >> 1usize;
        while r > half {
            r -= &l2;
            k += 1;
        }
        while r < -&half {
            r += &l2;
            k -= 1;
        }
        let r = super::real::round_shift(&r, (wr - w) as u64);
        let y = exp_fixed_small(&r, w);
        let k: i64 = k.try_into().expect("exp exponent overflow");
        Real::from_parts(y, k - w as i64, prec)
    }

    /// Natural logarithm. Panics on non-positive input.
    pub fn ln(&self) -> Real {
        assert!(self.is_positive(), "ln of a non-positive Real");
        ln_rational(&self.to_rational(), self.prec())
    }

    /// `self^y = exp(y ln self)` for positive `self`.
    pub fn pow(&self, y: &Real) -> Real {
        let prec = self.prec().max(y.prec());
        if let Some(n) = y.to_integer() {
            if let Ok(n) = i64::try_from(n) {
                return self.with_prec(prec).powi(n);
            }
        }
        assert!(self.is_positive(), "non-integer power of a non-positive Real");
        // |y ln x| magnitude costs absolute accuracy in exp
        let lx = self.with_prec(prec + 16).ln();
        let t = &lx * &y.with_prec(prec + 16);
        let extra = t.top().max(0) as u32;
        let lx = self.with_prec(prec + 16 + extra).ln();
        (&lx * &y.with_prec(prec + 16 + extra)).exp().with_prec(prec)
    }

    pub fn sin(&self) -> Real {
        let prec = self.prec();
        if self.is_zero() {
            return self.clone();
        }
        if self.top() < -(prec as i64) / 2 - 4 {
            // sin x = x − x³/6 + …; the cubic term is below half an ulp
            let x3 = &(self * self) * self;
            return (self - &(&x3 / &Real::from_int(6, prec + 8))).with_prec(prec);
        }
        // relative accuracy near zeros of sin needs the cancellation bits
        let extra = (self.top().max(0) as u32) + 32;
        let w = prec + extra + 16;
        let x = self.to_fixed(w);
        let two_pi = pi_fixed(w) << 1usize;
        let n = (&x + (&two_pi >> 1usize)).div_floor(&two_pi);
        let r = &x - n * &two_pi;
        Real::from_fixed(sin_fixed_small(&r, w), w, prec)
    }

    pub fn cos(&self) -> Real {
        let prec = self.prec();
        let half_pi = Real::pi(prec + 32 + self.top().max(0) as u32).mul_2exp(-1);
        (&self.with_prec(half_pi.prec()) + &half_pi).sin().with_prec(prec)
    }
}
