//! Truncated decimal rendering and exact decimal parsing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::real::Real;

fn pow10(n: u32) -> BigInt {
    BigInt::from(10u32).pow(n)
}

/// `floor(log10(v))` for a positive rational.
pub(crate) fn floor_log10(v: &BigRational) -> i64 {
    debug_assert!(v.is_positive());
    let bits = v.numer().bits() as f64 - v.denom().bits() as f64;
    let mut d = (bits * std::f64::consts::LOG10_2).floor() as i64;
    let ten = BigRational::from_integer(10.into());
    let p = |d: i64| -> BigRational {
        if d >= 0 {
            BigRational::from_integer(pow10(d as u32))
        } else {
            BigRational::new(BigInt::one(), pow10((-d) as u32))
        }
    };
    let mut lo = p(d);
    while &lo > v {
        d -= 1;
        lo = p(d);
    }
    while &(&lo * &ten) <= v {
        d += 1;
        lo = &lo * &ten;
    }
    d
}

impl Real {
    /// Decimal text with exactly `digits` significant digits, truncated toward
    /// zero (the last digit is never rounded up). Positional notation is used
    /// for moderate exponents, `d.ddde±N` otherwise.
    pub fn to_decimal(&self, digits: u32) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        let v = self.to_rational().abs();
        let d = floor_log10(&v);
        let shift = digits as i64 - 1 - d;
        let scaled = if shift >= 0 {
            v * BigRational::from_integer(pow10(shift as u32))
        } else {
            v / BigRational::from_integer(pow10((-shift) as u32))
        };
        let n = scaled.to_integer();
        let mut s = n.to_string();
        debug_assert_eq!(s.len(), digits as usize);
        let sign = if self.is_negative() { "-" } else { "" };
        if d >= 0 && d < digits as i64 {
            let int_len = (d + 1) as usize;
            if int_len < s.len() {
                s.insert(int_len, '.');
            }
            format!("{sign}{s}")
        } else if d < 0 && d >= -6 {
            format!("{sign}0.{}{s}", "0".repeat((-d - 1) as usize))
        } else {
            let (head, tail) = s.split_at(1);
            if tail.is_empty() {
                format!("{sign}{head}e{d}")
            } else {
                format!("{sign}{head}.{tail}e{d}")
            }
        }
    }

    /// Parses decimal text (`-12`, `0.25`, `1.5e-3`) exactly, then rounds.
    pub fn from_decimal_str(text: &str, prec: u32) -> Option<Real> {
        parse_decimal(text).map(|q| Real::from_rational(&q, prec))
    }
}

/// Exact rational value of a decimal literal.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let e = exp - frac_part.len() as i64;
    let mut q = if e >= 0 {
        BigRational::from_integer(n * pow10(e as u32))
    } else {
        BigRational::new(n, pow10((-e) as u32))
    };
    if neg {
        q = -q;
    }
    Some(q)
}
