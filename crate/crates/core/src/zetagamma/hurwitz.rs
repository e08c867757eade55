//! Hurwitz zeta and its s-derivative by Euler–Maclaurin summation.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::bernoulli::even_bernoulli;
use crate::error::{Error, Result};
use crate::numkernel::Real;

#[derive(Clone, Debug)]
pub struct HurwitzQuery {
    pub s: Real,
    pub a: Real,
}

impl HurwitzQuery {
    pub fn new(s: Real, a: Real) -> Result<HurwitzQuery> {
        let q = HurwitzQuery { s, a };
        q.check()?;
        Ok(q)
    }

    fn check(&self) -> Result<()> {
        if !self.a.is_positive() {
            return Err(Error::Domain(format!("Hurwitz zeta needs a > 0, got a = {}", self.a)));
        }
        if self.s == Real::one(2) {
            return Err(Error::Pole("Hurwitz zeta at s = 1".into()));
        }
        Ok(())
    }
}

fn small_int(x: &Real) -> Option<i64> {
    x.to_integer()
        .and_then(|i| i64::try_from(i).ok())
        .filter(|i| i.abs() < 1 << 20)
}

/// Result of one Euler–Maclaurin attempt; `None` means the Bernoulli tail
/// started growing before it fell below `2^-w` and N must increase.
fn em_attempt(s: &Real, a: &Real, n: u64, w: u32, deriv: bool) -> Option<(Real, Real)> {
    let s = s.with_prec(w);
    let a = a.with_prec(w);
    let s_int = small_int(&s);
    let mut z = Real::zero(w);
    let mut dz = Real::zero(w);
    let power = |x: &Real, lx: Option<&Real>| -> Real {
        match s_int {
            Some(k) => x.powi(-k),
            None => (-(&s * lx.expect("log needed"))).exp(),
        }
    };
    for i in 0..n {
        let x = &a + &Real::from_int(i, w);
        let lx = if deriv || s_int.is_none() { Some(x.ln()) } else { None };
        let xs = power(&x, lx.as_ref());
        if deriv {
            dz = &dz - &(&xs * lx.as_ref().unwrap());
        }
        z = &z + &xs;
    }
    let x = &a + &Real::from_int(n, w);
    let lx = x.ln();
    let xs = power(&x, Some(&lx));
    let sm1 = &s - &Real::one(w);
    let x_xs = &x * &xs;
    z = &z + &(&(&x_xs / &sm1) + &xs.mul_2exp(-1));
    if deriv {
        let t1 = &(&x_xs * &lx) / &sm1;
        let t2 = &x_xs / &(&sm1 * &sm1);
        let t3 = (&xs * &lx).mul_2exp(-1);
        dz = &dz - &(&(&t1 + &t2) + &t3);
    }
    // sum_k B_2k/(2k)! (s)_{2k-1} x^{-s-2k+1}
    let inv_x2 = (&x * &x).recip();
    let mut y = &xs / &x;
    let mut poch = s.clone();
    let mut dpoch = Real::one(w);
    let mut fact = BigInt::from(2);
    let mut prev = f64::INFINITY;
    let mut k = 1usize;
    loop {
        let bern = even_bernoulli(k);
        let c = Real::from_rational(
            &(bern[k].clone() / num_rational::BigRational::from_integer(fact.clone())),
            w,
        );
        let t = &(&c * &poch) * &y;
        let dt = if deriv {
            &(&c * &(&dpoch - &(&poch * &lx))) * &y
        } else {
            Real::zero(w)
        };
        z = &z + &t;
        dz = &dz + &dt;
        let mag = t.log2_abs().max(dt.log2_abs());
        if mag < -(w as f64) {
            break;
        }
        if k > 2 && mag > prev {
            return None;
        }
        prev = mag;
        for m in [2 * k - 1, 2 * k] {
            let sm = &s + &Real::from_int(m as u64, w);
            dpoch = &(&dpoch * &sm) + &poch;
            poch = &poch * &sm;
        }
        y = &y * &inv_x2;
        fact *= BigInt::from((2 * k + 1) * (2 * k + 2));
        k += 1;
        if k > 8 * w as usize {
            return None;
        }
    }
    Some((z, dz))
}

/// `(ζ(s,a), ∂ζ(s,a)/∂s)`; the derivative is only computed when asked for.
pub(crate) fn hurwitz_pair(q: &HurwitzQuery, p: u32, deriv: bool) -> Result<(Real, Option<Real>)> {
    q.check()?;
    let sf = q.s.to_f64();
    let af = q.a.to_f64();
    let mut n = (10.0f64).max(0.35 * p as f64).max(sf.abs() + 10.0).ceil() as u64;
    loop {
        let lx = (n as f64 + af).log2();
        let mag = (-sf * lx).max(sf * (-af.log2())).max(0.0) + (n as f64).log2() + lx.log2().max(0.0);
        let w = p + 32 + mag.ceil() as u32;
        if let Some((z, dz)) = em_attempt(&q.s, &q.a, n, w, deriv) {
            return Ok((z.with_prec(p), deriv.then(|| dz.with_prec(p))));
        }
        n *= 2;
        if n > 1 << 22 {
            return Err(Error::Range(format!("Hurwitz zeta at s = {} out of range", q.s)));
        }
    }
}

/// `ζ(s,a) = Σ_{n≥0} (n+a)^{-s}`, continued to all real `s ≠ 1`.
pub fn hurwitz_zeta(q: &HurwitzQuery, p: u32) -> Result<Real> {
    Ok(hurwitz_pair(q, p, false)?.0)
}

/// `∂ζ(s,a)/∂s`.
pub fn hurwitz_zeta_sderiv(q: &HurwitzQuery, p: u32) -> Result<Real> {
    Ok(hurwitz_pair(q, p, true)?.1.expect("derivative requested"))
}

pub fn zeta(s: &Real, p: u32) -> Result<Real> {
    hurwitz_zeta(&HurwitzQuery::new(s.clone(), Real::one(p))?, p)
}

pub fn zeta_deriv(s: &Real, p: u32) -> Result<Real> {
    hurwitz_zeta_sderiv(&HurwitzQuery::new(s.clone(), Real::one(p))?, p)
}

/// `ζ(2), ..., ζ(k_max)` as fixed-point integers scaled by `2^w`, summed in
/// one pass. Index `j` of the result holds `ζ(j)`; entries 0 and 1 are unused.
pub(crate) fn zeta_ints_fixed(k_max: usize, w: u32) -> Vec<BigInt> {
    let ww = w + 24;
    let n = (16.0f64).max(0.35 * ww as f64).ceil() as u64;
    let one = BigInt::one() << ww as usize;
    let mut sums = vec![BigInt::from(0); k_max + 1];
    // v_j(m) = 2^ww / m^j by repeated division
    for m in 1..n {
        let mut v = one.clone();
        for (j, sum) in sums.iter_mut().enumerate().skip(1) {
            v /= m;
            if v.is_positive() {
                if j >= 2 {
                    *sum += &v;
                }
            } else {
                break;
            }
        }
    }
    let bern = even_bernoulli(64);
    let big_n = BigInt::from(n);
    let mut v = one.clone();
    for (j, sum) in sums.iter_mut().enumerate().skip(1) {
        v /= n;
        if j < 2 {
            continue;
        }
        if !v.is_positive() {
            continue;
        }
        // N^{1-j}/(j-1) + N^{-j}/2
        *sum += &v * n / (j - 1) + (&v >> 1usize);
        let mut poch = BigInt::from(j);
        let mut fact = BigInt::from(2);
        let mut npow = big_n.clone();
        let mut k = 1usize;
        let mut bern = bern.clone();
        loop {
            if k >= bern.len() {
                bern = even_bernoulli(2 * k);
            }
            let b = &bern[k];
            let t = (b.numer() * &poch * &v) / (b.denom() * &fact * &npow);
            if t.bits() == 0 {
                break;
            }
            *sum += t;
            poch = poch * (j + 2 * k - 1) * (j + 2 * k);
            fact *= BigInt::from((2 * k + 1) * (2 * k + 2));
            npow = npow * &big_n * &big_n;
            k += 1;
        }
    }
    sums.into_iter()
        .map(|s| crate::numkernel::round_shift(&s, 24))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{agreement_digits, rational, to_real};

    fn r(n: i64, d: i64, p: u32) -> Real {
        to_real(&rational(n, d), p)
    }

    #[test]
    fn riemann_values() {
        let p = 200;
        let pi = Real::pi(p);
        let z2 = zeta(&r(2, 1, p), p).unwrap();
        let want = &(&pi * &pi) / &Real::from_int(6, p);
        assert!(agreement_digits(&z2, &want).at_least(55));
        let zm1 = zeta(&r(-1, 1, p), p).unwrap();
        assert!(agreement_digits(&zm1, &r(-1, 12, p)).at_least(55));
        let zm2 = zeta(&r(-2, 1, p), p).unwrap();
        assert!(zm2.is_zero() || zm2.log2_abs() < -190.0);
    }

    #[test]
    fn derivative_values() {
        let p = 200;
        let d0 = zeta_deriv(&Real::zero(p), p).unwrap();
        let want = (Real::pi(p).mul_2exp(1)).ln().mul_2exp(-1);
        assert!(agreement_digits(&d0, &-want).at_least(55));
        let dm2 = zeta_deriv(&r(-2, 1, p), p).unwrap();
        assert_eq!(
            dm2.to_decimal(40),
            "-0.03044845705839327078025153047115477664700"
        );
        let dm1 = zeta_deriv(&r(-1, 1, p), p).unwrap();
        let ln_a = Real::from_decimal_str("0.24875447703378426254725299357611397609736971366853", p)
            .unwrap();
        assert!(agreement_digits(&dm1, &(&r(1, 12, p) - &ln_a)).at_least(48));
    }

    #[test]
    fn hurwitz_at_half() {
        // ζ(s, 1/2) = (2^s − 1) ζ(s)
        let p = 160;
        let s = r(3, 1, p);
        let h = hurwitz_zeta(&HurwitzQuery::new(s.clone(), r(1, 2, p)).unwrap(), p).unwrap();
        let z3 = zeta(&s, p).unwrap();
        assert!(agreement_digits(&h, &(&z3 * &Real::from_int(7, p))).at_least(45));
        // non-integer s
        let s = r(5, 2, p);
        let h = hurwitz_zeta(&HurwitzQuery::new(s.clone(), r(1, 2, p)).unwrap(), p).unwrap();
        let z = zeta(&s, p).unwrap();
        let f = &Real::from_int(2, p).pow(&s) - &Real::one(p);
        assert!(agreement_digits(&h, &(&z * &f)).at_least(45));
    }

    #[test]
    fn errors() {
        let p = 64;
        assert!(matches!(HurwitzQuery::new(Real::one(p), Real::one(p)), Err(Error::Pole(_))));
        assert!(matches!(HurwitzQuery::new(r(2, 1, p), Real::zero(p)), Err(Error::Domain(_))));
    }

    #[test]
    fn batched_integer_values_match() {
        let w = 256;
        let v = zeta_ints_fixed(40, w);
        for j in [2usize, 3, 7, 40] {
            let batch = Real::from_fixed(v[j].clone(), w, 240);
            let single = zeta(&Real::from_int(j as u64, 240), 240).unwrap();
            assert!(agreement_digits(&batch, &single).at_least(68), "j = {j}");
        }
    }
}
