//! The Borwein–Dykshoorn function D, Adamchik's E, the parameterized Euler
//! constants γ_α(z) and γ_{a,b}(z), and s-derivatives of the alternating
//! Lerch series, each with more than one evaluation route.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::accel::{estimate_limit, LimitEstimate, LimitOptions, Method, SeqKind, SequenceGen};
use crate::error::{Error, Result};
use crate::numkernel::{ln_rational, Real};
use crate::products::{builtin_with, limit_with};
use crate::zetagamma::{hurwitz_pair, ln_barnes_g, ln_gamma, HurwitzQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DRoute {
    Product,
    GammaSeries,
    BarnesClosed,
}

impl DRoute {
    pub const ALL: [DRoute; 3] = [DRoute::Product, DRoute::GammaSeries, DRoute::BarnesClosed];

    pub fn as_str(&self) -> &'static str {
        match self {
            DRoute::Product => "PRODUCT",
            DRoute::GammaSeries => "GAMMA_SERIES",
            DRoute::BarnesClosed => "BARNES_CLOSED",
        }
    }
}

impl fmt::Display for DRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<DRoute> {
        DRoute::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn euler_options(p: u32) -> LimitOptions {
    let mut o = LimitOptions::new(Method::Euler);
    o.max_terms_cap = o.max_terms_cap.max(2 * p as usize + 64);
    o
}

/// `Σ_{k≥n0} (−1)^{k+1} b_k` by the Euler transform, to `target_digits`.
fn euler_sum(
    n0: u64,
    p: u32,
    target_digits: u32,
    b: impl Fn(u64, u32) -> Result<Real> + Send + Sync,
) -> Result<LimitEstimate> {
    let seq = SequenceGen::new(n0, SeqKind::AlternatingTerms, b);
    estimate_limit(&seq, &euler_options(p), target_digits, p)
}

/// `(1 + t) − ln` style terms lose about `2 log2 n` bits to cancellation.
fn term_bits(n: u64) -> u32 {
    2 * (64 - n.leading_zeros()) + 8
}

/// `α/n − ln(1 + α/n)`.
fn t_param(alpha: &BigRational, n: u64, w: u32) -> Real {
    let ww = w + term_bits(n);
    let y = alpha / q(n as i64);
    let l = ln_rational(&(BigRational::one() + &y), ww);
    (&Real::from_rational(&y, ww) - &l).with_prec(w)
}

/// `1/c − ln((c+1)/c)` with `c = a n + b`.
fn u_ab(a: &BigRational, b: &BigRational, n: u64, w: u32) -> Real {
    let c = a * q(n as i64) + b;
    let ww = w + term_bits(n) + 2 * (c.numer().bits() as u32 / 2);
    let y = c.recip();
    let l = ln_rational(&(BigRational::one() + &y), ww);
    (&Real::from_rational(&y, ww) - &l).with_prec(w)
}

fn check_z(z: &Real) -> Result<()> {
    let one = Real::one(z.prec());
    if z < &-one.clone() || z >= &one {
        return Err(Error::Domain(format!("z = {} lies outside [-1, 1)", z.to_decimal(10))));
    }
    Ok(())
}

fn check_alpha(alpha: &Real) -> Result<()> {
    if alpha <= &-Real::one(alpha.prec()) {
        return Err(Error::Domain(format!("alpha = {} must exceed -1", alpha.to_decimal(10))));
    }
    Ok(())
}

// direct sums give up beyond this many terms
const DIRECT_CAP: u64 = 2_000_000;

/// `Σ_{n≥n0} c_n z^{n−n0}` for |z| < 1 with `|tail after N| ≤ 2^{tail_log2(N)}`.
fn direct_power_sum(
    z: &Real,
    n0: u64,
    p: u32,
    coeff: impl Fn(u64, u32) -> Real,
    tail_log2: impl Fn(u64) -> f64,
) -> Result<Real> {
    let w = p + 24;
    let zw = z.with_prec(w);
    let mut zpow = Real::one(w);
    let mut sum = Real::zero(w);
    let mut n = n0;
    loop {
        sum = &sum + &(&coeff(n, w) * &zpow);
        if tail_log2(n) < -(w as f64) {
            return Ok(sum.with_prec(p));
        }
        if zpow.is_zero() && n > n0 {
            return Ok(sum.with_prec(p));
        }
        if n - n0 > DIRECT_CAP {
            return Err(Error::NonConvergence {
                best: Box::new(LimitEstimate {
                    value: sum.with_prec(p),
                    error_estimate: Real::from_f64(tail_log2(n).exp2(), 53),
                    terms_used: n - n0 + 1,
                    method: Method::Raw,
                }),
            });
        }
        zpow = &zpow * &zw;
        n += 1;
    }
}

fn log2_or_neg_inf(x: &Real) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        x.log2_abs()
    }
}

/// `γ_α(z) = Σ_{n≥1} z^{n−1} (α/n − ln(1 + α/n))`.
pub fn gamma_param(alpha: &Real, z: &Real, p: u32, target_digits: u32) -> Result<Real> {
    check_alpha(alpha)?;
    check_z(z)?;
    if alpha.is_zero() {
        return Ok(Real::zero(p));
    }
    let a = alpha.to_rational();
    if z == &-Real::one(z.prec()) {
        let est = euler_sum(1, p + 16, target_digits, move |n, w| Ok(t_param(&a, n, w)))?;
        return Ok(est.value.with_prec(p));
    }
    let (la, lz) = (alpha.log2_abs(), log2_or_neg_inf(z));
    let l1z = (1.0 - z.abs().to_f64()).log2();
    let af = alpha.to_f64();
    direct_power_sum(z, 1, p, |n, w| t_param(&a, n, w), |n| {
        let m = (n + 1) as f64;
        if m < af.abs() + 2.0 {
            return f64::INFINITY;
        }
        2.0 * la - (m * (m + af)).log2() + n as f64 * lz - l1z
    })
}

/// `∂γ_α/∂z = Σ_{n≥2} (n−1) z^{n−2} (α/n − ln(1 + α/n))`.
pub fn gamma_param_deriv(alpha: &Real, z: &Real, p: u32, target_digits: u32) -> Result<Real> {
    check_alpha(alpha)?;
    check_z(z)?;
    if alpha.is_zero() {
        return Ok(Real::zero(p));
    }
    let a = alpha.to_rational();
    if z == &-Real::one(z.prec()) {
        // (n−1)(−1)^n t_n = (−1)^{n+1} · (−(n−1) t_n)
        let est = euler_sum(2, p + 16, target_digits, move |n, w| {
            let t = t_param(&a, n, w + 16);
            Ok(-(&t * &Real::from_int(n - 1, w + 16)).with_prec(w))
        })?;
        return Ok(est.value.with_prec(p));
    }
    let (la, lz) = (alpha.log2_abs(), log2_or_neg_inf(z));
    let l1z = (1.0 - z.abs().to_f64()).log2();
    let af = alpha.to_f64();
    direct_power_sum(
        z,
        2,
        p,
        |n, w| &t_param(&a, n, w + 16) * &Real::from_int(n - 1, w + 16),
        |n| {
            let m = (n + 1) as f64;
            if m < af.abs() + 2.0 {
                return f64::INFINITY;
            }
            2.0 * la - (m + af).log2() + (n - 1) as f64 * lz - l1z
        },
    )
}

/// `γ_{a,b}(z) = Σ_{n≥0} (1/(an+b) − ln((an+b+1)/(an+b))) z^n`.
pub fn gamma_ab(a: &Real, b: &Real, z: &Real, p: u32, target_digits: u32) -> Result<Real> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::Domain("gamma_ab needs a > 0 and b > 0".into()));
    }
    check_z(z)?;
    let (aq, bq) = (a.to_rational(), b.to_rational());
    if z == &-Real::one(z.prec()) {
        // Σ (−1)^n u_n = Σ (−1)^{n+1} (−u_n)
        let est = euler_sum(0, p + 16, target_digits, move |n, w| Ok(-u_ab(&aq, &bq, n, w)))?;
        return Ok(est.value.with_prec(p));
    }
    let (af, bf) = (a.to_f64(), b.to_f64());
    let lz = log2_or_neg_inf(z);
    let l1z = (1.0 - z.abs().to_f64()).log2();
    direct_power_sum(z, 0, p, |n, w| u_ab(&aq, &bq, n, w), |n| {
        let c = af * (n + 1) as f64 + bf;
        -1.0 - 2.0 * c.log2() + (n + 1) as f64 * lz - l1z
    })
}

/// Borwein–Dykshoorn `D(x)`, `x > −1`, by one route.
///
/// GAMMA_SERIES is `exp(x + γ'_x(−1) − γ_x(−1))`. BARNES_CLOSED is
/// `e^{x/2} Γ((x+1)/2)/Γ(1/2) · (G((x+1)/2) / (G(x/2+1) G(1/2)))²`, a derived
/// composition trusted only through agreement with the other routes.
pub fn d_function(x: &Real, route: DRoute, p: u32, target_digits: u32) -> Result<Real> {
    if x <= &-Real::one(x.prec()) {
        return Err(Error::Domain(format!("D(x) needs x > -1, got {}", x.to_decimal(10))));
    }
    let w = p + 24;
    match route {
        DRoute::Product => {
            let spec = builtin_with("BD_D", Some(&x.to_rational()))?;
            let est = limit_with(&spec, &LimitOptions::new(Method::Euler), p + 8, target_digits)?;
            Ok(est.value.with_prec(p))
        }
        DRoute::GammaSeries => {
            let minus_one = Real::from_int(-1, w);
            let g = gamma_param(x, &minus_one, w, target_digits + 2)?;
            let gd = gamma_param_deriv(x, &minus_one, w, target_digits + 2)?;
            Ok((&(&x.with_prec(w) + &gd) - &g).exp().with_prec(p))
        }
        DRoute::BarnesClosed => {
            let xw = x.with_prec(w);
            let half = Real::one(w).mul_2exp(-1);
            let y = (&xw + &Real::one(w)).mul_2exp(-1);
            let y1 = &xw.mul_2exp(-1) + &Real::one(w);
            let gpart = &ln_gamma(&y, w)? - &ln_gamma(&half, w)?;
            let bpart = &(&ln_barnes_g(&y, w)? - &ln_barnes_g(&y1, w)?) - &ln_barnes_g(&half, w)?;
            let total = &(&xw.mul_2exp(-1) + &gpart) + &bpart.mul_2exp(1);
            Ok(total.exp().with_prec(p))
        }
    }
}

/// Adamchik's `E(x) = lim Π_{k≤2n} (1 − 4x²/k²)^{−k²(−1)^k}`, with the product
/// starting at k = 2 when |2x| ≥ 1.
pub fn e_function(x: &Real, p: u32, target_digits: u32) -> Result<Real> {
    let spec = builtin_with("ADAMCHIK_E", Some(&x.to_rational()))?;
    let est = limit_with(&spec, &LimitOptions::new(Method::Euler), p + 8, target_digits)?;
    Ok(est.value.with_prec(p))
}

/// `∂Φ/∂s (−1, s, u)` for the alternating Lerch series `Σ (−1)^n (n+u)^{−s}`.
#[derive(Clone, Debug)]
pub struct LerchDerivQuery {
    pub s: Real,
    pub u: Real,
}

impl LerchDerivQuery {
    pub fn new(s: Real, u: Real) -> Result<LerchDerivQuery> {
        if !u.is_positive() {
            return Err(Error::Domain(format!("Lerch parameter u = {} must be positive", u.to_decimal(10))));
        }
        if s == Real::one(s.prec()) {
            return Err(Error::Pole("the Hurwitz split has a pole at s = 1".into()));
        }
        Ok(LerchDerivQuery { s, u })
    }
}

/// Hurwitz split `Φ(−1,s,u) = 2^{−s}(ζ(s,u/2) − ζ(s,(u+1)/2))`, differentiated in s.
pub fn phi_sderiv(q: &LerchDerivQuery, p: u32) -> Result<Real> {
    let w = p + 24 + q.s.top().max(0) as u32;
    let s = q.s.with_prec(w);
    let u = q.u.with_prec(w);
    let a1 = u.mul_2exp(-1);
    let a2 = (&u + &Real::one(w)).mul_2exp(-1);
    let (z1, d1) = hurwitz_pair(&HurwitzQuery::new(s.clone(), a1)?, w, true)?;
    let (z2, d2) = hurwitz_pair(&HurwitzQuery::new(s.clone(), a2)?, w, true)?;
    let (d1, d2) = (d1.expect("derivative requested"), d2.expect("derivative requested"));
    let two_ms = Real::from_int(2, w).pow(&-s.clone());
    let diff = &z1 - &z2;
    let ddiff = &d1 - &d2;
    let v = &(&ddiff - &(&Real::ln2(w) * &diff)) * &two_ms;
    Ok(v.with_prec(p))
}

/// Check route: Euler (Abel) sum of `−Σ_{n≥0} (−1)^n (n+u)^{−s} ln(n+u)` for an
/// integer `s`.
pub fn phi_sderiv_series(q: &LerchDerivQuery, p: u32, target_digits: u32) -> Result<LimitEstimate> {
    let s = q
        .s
        .to_integer()
        .and_then(|v| i64::try_from(v).ok())
        .ok_or_else(|| Error::Domain("the series route needs an integer s".into()))?;
    let u = q.u.to_rational();
    // −(−1)^n b = (−1)^{n+1} b with b = (n+u)^{−s} ln(n+u)
    euler_sum(0, p, target_digits, move |n, w| {
        let c = q_add(&u, n);
        let grow = if s < 0 { (-s) as u32 * (64 - n.leading_zeros() + 1) } else { 0 };
        let ww = w + 16 + grow;
        let l = ln_rational(&c, ww);
        let pw = pow_q(&c, -s);
        Ok((&l * &Real::from_rational(&pw, ww)).with_prec(w))
    })
}

fn q_add(u: &BigRational, n: u64) -> BigRational {
    u + q(n as i64)
}

fn pow_q(c: &BigRational, e: i64) -> BigRational {
    let m = e.unsigned_abs() as u32;
    let r = BigRational::new(c.numer().pow(m), c.denom().pow(m));
    if e < 0 {
        r.recip()
    } else {
        r
    }
}
