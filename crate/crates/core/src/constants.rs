//! Named constants, each computed by two independent routes that must agree
//! before a value is handed out. Values are memoized per (id, precision).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::accel::{euler_transform_sum, SeqKind, SequenceGen};
use crate::error::{Error, Result};
use crate::numkernel::{agreement_digits, bits_for_digits, digits_for_bits, ln_rational, Real};
use crate::zetagamma::{even_bernoulli, zeta_deriv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstantId {
    Pi,
    E,
    EulerGamma,
    Catalan,
    Zeta3,
    LnGlaisher,
}

impl ConstantId {
    pub const ALL: [ConstantId; 6] = [
        ConstantId::Pi,
        ConstantId::E,
        ConstantId::EulerGamma,
        ConstantId::Catalan,
        ConstantId::Zeta3,
        ConstantId::LnGlaisher,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConstantId::Pi => "PI",
            ConstantId::E => "E",
            ConstantId::EulerGamma => "EULER_GAMMA",
            ConstantId::Catalan => "CATALAN",
            ConstantId::Zeta3 => "ZETA3",
            ConstantId::LnGlaisher => "LN_GLAISHER",
        }
    }

    /// `(primary, check)` route labels.
    pub fn routes(&self) -> (&'static str, &'static str) {
        match self {
            ConstantId::Pi => ("machin-arctan", "gauss-legendre-agm"),
            ConstantId::E => ("factorial-series", "exp-kernel"),
            ConstantId::EulerGamma => ("harmonic-euler-maclaurin-n1", "harmonic-euler-maclaurin-n2"),
            ConstantId::Catalan => ("ramanujan-series", "euler-transformed-defining-series"),
            ConstantId::Zeta3 => ("central-binomial-series", "euler-transformed-eta3"),
            ConstantId::LnGlaisher => ("zeta-prime-minus-one", "euler-transformed-log-d1"),
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantId {
    type Err = Error;
    fn from_str(s: &str) -> Result<ConstantId> {
        ConstantId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

fn pi_agm(w: u32) -> Real {
    let ww = w + 16;
    let one = Real::one(ww);
    let mut a = one.clone();
    let mut b = one.mul_2exp(-1).sqrt();
    let mut t = one.mul_2exp(-2);
    let mut k = 0i64;
    while (&a - &b).log2_abs() > -(ww as f64) / 2.0 + 1.0 && !(&a - &b).is_zero() {
        let an = (&a + &b).mul_2exp(-1);
        b = (&a * &b).sqrt();
        let d = &a - &an;
        t = &t - &(&d * &d).mul_2exp(k);
        a = an;
        k += 1;
    }
    let s = &a + &b;
    (&(&s * &s) / &t.mul_2exp(2)).with_prec(w)
}

fn e_series(w: u32) -> Real {
    let ww = w + 16;
    let mut term = BigInt::one() << ww as usize;
    let mut sum = term.clone();
    let mut k = 1u64;
    while !term.is_zero() {
        term /= k;
        sum += &term;
        k += 1;
    }
    Real::from_fixed(sum, ww, w)
}

/// γ = H_N − ln N − 1/(2N) + Σ B_2k / (2k N^{2k}).
fn euler_gamma_em(n: u64, w: u32) -> Real {
    let ww = w + 16;
    let mut h = BigRational::zero();
    for k in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(k));
    }
    let nn = BigInt::from(n);
    let mut acc = h - BigRational::new(BigInt::one(), BigInt::from(2 * n));
    let n2 = &nn * &nn;
    let mut npow = n2.clone();
    let mut k = 1usize;
    loop {
        let bern = even_bernoulli(k);
        let t = &bern[k] / BigRational::from_integer(BigInt::from(2 * k) * &npow);
        acc += &t;
        if (t.numer().bits() as i64 - t.denom().bits() as i64) < -(ww as i64) {
            break;
        }
        npow *= &n2;
        k += 1;
    }
    let ln_n = ln_rational(&BigRational::from_integer(nn), ww);
    (&Real::from_rational(&acc, ww) - &ln_n).with_prec(w)
}

fn euler_cut(w: u32) -> u64 {
    (0.2 * w as f64).ceil() as u64 + 10
}

/// G = (π/8) ln(2+√3) + (3/8) Σ (n!)² / ((2n)! (2n+1)²).
fn catalan_ramanujan(w: u32) -> Real {
    let ww = w + 24;
    let mut t = BigInt::one() << ww as usize;
    let mut sum = BigInt::zero();
    let mut n = 0u64;
    while !t.is_zero() {
        let d = 2 * n + 1;
        sum += &t / (d * d);
        t = t * (n + 1) / (2 * (2 * n + 1));
        n += 1;
    }
    let series = Real::from_fixed(sum * 3, ww, ww).mul_2exp(-3);
    let root3 = Real::from_int(3, ww).sqrt();
    let l = (&root3 + &Real::from_int(2, ww)).ln();
    let head = (&Real::pi(ww) * &l).mul_2exp(-3);
    (&head + &series).with_prec(w)
}

fn alternating_sum(w: u32, term: impl Fn(u64, u32) -> Result<Real> + Send + Sync) -> Result<Real> {
    let seq = SequenceGen::new(1, SeqKind::AlternatingTerms, term);
    Ok(euler_transform_sum(&seq, w + 8, w as usize + 64)?.value.with_prec(w))
}

fn catalan_euler(w: u32) -> Result<Real> {
    alternating_sum(w, |k, p| {
        let d = 2 * k as i64 - 1;
        Ok(Real::from_rational(&BigRational::new(BigInt::one(), BigInt::from(d * d)), p))
    })
}

/// ζ(3) = (5/2) Σ_{n≥1} (−1)^{n+1} / (n³ C(2n,n)).
fn zeta3_binomial(w: u32) -> Real {
    let ww = w + 24;
    let one = BigInt::one() << ww as usize;
    let mut c = BigInt::from(2);
    let mut sum = BigInt::zero();
    let mut n = 1u64;
    loop {
        let t = &one / (&c * (n * n * n));
        if t.is_zero() {
            break;
        }
        if n % 2 == 1 {
            sum += t;
        } else {
            sum -= t;
        }
        // C(2n+2, n+1) = C(2n, n) (2n+1)(2n+2) / (n+1)²
        c = c * ((2 * n + 1) * (2 * n + 2)) / ((n + 1) * (n + 1));
        n += 1;
    }
    Real::from_fixed(sum * 5, ww, w).mul_2exp(-1)
}

fn zeta3_eta(w: u32) -> Result<Real> {
    let eta = alternating_sum(w + 4, |k, p| {
        Ok(Real::from_rational(&BigRational::new(BigInt::one(), BigInt::from(k).pow(3)), p))
    })?;
    Ok((&eta * &Real::from_int(4, w + 4) / Real::from_int(3, w + 4)).with_prec(w))
}

fn ln_glaisher_zeta(w: u32) -> Result<Real> {
    let ww = w + 8;
    let d = zeta_deriv(&Real::from_int(-1, ww), ww)?;
    let twelfth = Real::from_rational(&BigRational::new(BigInt::one(), BigInt::from(12)), ww);
    Ok((&twelfth - &d).with_prec(w))
}

/// `ln D(1) = 1 + Σ_{k≥1} (−1)^{k+1} (k ln(1+1/k) − 1)`, then
/// `ln A = (ln D(1) + ln 2/6 + ln π/2) / 6`.
pub(crate) fn ln_d_one_series(w: u32) -> Result<Real> {
    let s = alternating_sum(w + 8, |k, p| {
        let kk = BigInt::from(k);
        let bits = 64 - k.leading_zeros();
        let l = ln_rational(&BigRational::new(&kk + 1, kk.clone()), p + bits + 8);
        Ok((&(&l * &Real::from_int(k, p + bits + 8)) - &Real::one(p)).with_prec(p))
    })?;
    Ok((&s + &Real::one(w + 8)).with_prec(w))
}

fn ln_glaisher_d1(w: u32) -> Result<Real> {
    let ww = w + 8;
    let ld = ln_d_one_series(ww)?;
    let l2 = Real::ln2(ww);
    let lpi = Real::pi(ww).ln();
    let s = &(&ld + &(&l2 / &Real::from_int(6, ww))) + &lpi.mul_2exp(-1);
    Ok((&s / &Real::from_int(6, ww)).with_prec(w))
}

/// Both routes for `id` at `p` bits, uncached.
pub fn dual_routes(id: ConstantId, p: u32) -> Result<(Real, Real)> {
    Ok(match id {
        ConstantId::Pi => (Real::pi(p), pi_agm(p)),
        ConstantId::E => (e_series(p), Real::one(p + 8).exp().with_prec(p)),
        ConstantId::EulerGamma => {
            let n1 = euler_cut(p);
            (euler_gamma_em(n1, p), euler_gamma_em(n1 + 13, p))
        }
        ConstantId::Catalan => (catalan_ramanujan(p), catalan_euler(p)?),
        ConstantId::Zeta3 => (zeta3_binomial(p), zeta3_eta(p)?),
        ConstantId::LnGlaisher => (ln_glaisher_zeta(p)?, ln_glaisher_d1(p)?),
    })
}

type Memo = RwLock<HashMap<(ConstantId, u32), Real>>;

static MEMO: OnceLock<Memo> = OnceLock::new();

/// The constant at `p` bits, released only after both routes agree.
pub fn constant(id: ConstantId, p: u32) -> Result<Real> {
    if p < 16 {
        return Err(Error::Range(format!("constant precision {p} is below 16 bits")));
    }
    let memo = MEMO.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = memo.read().expect("constant memo poisoned").get(&(id, p)) {
        return Ok(v.clone());
    }
    let w = p + 16;
    let (a, b) = dual_routes(id, w)?;
    let need = digits_for_bits(p) as i64 - 2;
    let agree = agreement_digits(&a, &b);
    if !agree.at_least(need) {
        return Err(Error::RouteMismatch {
            what: id.name().to_string(),
            digits: agree.as_i64(),
        });
    }
    let v = a.with_prec(p);
    let mut guard = memo.write().expect("constant memo poisoned");
    Ok(guard.entry((id, p)).or_insert(v).clone())
}

/// Truncated decimal text with exactly `digits` significant digits.
pub fn decimal_digits(id: ConstantId, digits: u32) -> Result<String> {
    let digits = digits.max(1);
    let p = bits_for_digits(digits) + 64;
    Ok(constant(id, p)?.to_decimal(digits))
}
