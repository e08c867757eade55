//! Partial products as exact rationals (the oracle) and in log space, and
//! their limits.

pub mod kexpr;
mod spec;

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use spec::{
    builtin, builtin_with, parse_builtin_call, parse_rational_arg, Bridge, BridgeFactor, BridgedProductSpec,
    UpperIndex, BUILTIN_NAMES,
};

use crate::accel::{estimate_limit, LimitEstimate, LimitOptions, Method, SeqKind, SequenceGen};
use crate::error::{Error, Result};
use crate::numkernel::{ln_ratio_fixed, round_shift, Real};
use kexpr::{euler_polys, log_expansion, Poly};

/// `rational_part · e^{e_power}`, exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPartial {
    pub rational_part: BigRational,
    pub e_power: BigRational,
}

impl ExactPartial {
    pub fn one() -> ExactPartial {
        ExactPartial {
            rational_part: BigRational::one(),
            e_power: BigRational::zero(),
        }
    }

    pub fn mul(&self, o: &ExactPartial) -> ExactPartial {
        ExactPartial {
            rational_part: &self.rational_part * &o.rational_part,
            e_power: &self.e_power + &o.e_power,
        }
    }

    pub fn powi(&self, n: i64) -> ExactPartial {
        ExactPartial {
            rational_part: pow_q(&self.rational_part, n),
            e_power: &self.e_power * BigRational::from_integer(n.into()),
        }
    }

    /// `ln` of the value.
    pub fn ln(&self, p: u32) -> Real {
        let w = p + 16;
        let lr = crate::numkernel::ln_rational(&self.rational_part, w);
        (&lr + &Real::from_rational(&self.e_power, w)).with_prec(p)
    }

    pub fn to_real(&self, p: u32) -> Real {
        self.ln(p + 16 + 32).exp().with_prec(p)
    }
}

fn pow_q(q: &BigRational, n: i64) -> BigRational {
    let m = n.unsigned_abs() as u32;
    let r = BigRational::new(q.numer().pow(m), q.denom().pow(m));
    if n < 0 {
        r.recip()
    } else {
        r
    }
}

// oracle products above this many estimated bits are refused
const ORACLE_BITS: u64 = 1 << 24;

fn positive_factor(spec: &BridgedProductSpec, k: i64) -> Result<BigRational> {
    let f = spec.factor.eval(k)?;
    if !f.is_positive() {
        return Err(Error::Domain(format!(
            "{}: factor at k={k} is {f}, not positive",
            spec.name
        )));
    }
    Ok(f)
}

fn exponent_int(spec: &BridgedProductSpec, k: i64) -> Result<i64> {
    spec.exponent
        .eval_int(k)?
        .to_i64()
        .ok_or_else(|| Error::OracleRange(format!("{}: exponent at k={k} overflows", spec.name)))
}

/// Exact core product `Π_{k=k_start}^{upper} factor(k)^{exponent(k)} e^{e_exponent(k)}`.
pub fn partial_exact_upto(spec: &BridgedProductSpec, upper: i64) -> Result<ExactPartial> {
    // size the result before building it
    let mut budget: u64 = 0;
    let mut items = Vec::new();
    for k in spec.k_start..=upper {
        let f = positive_factor(spec, k)?;
        let e = exponent_int(spec, k)?;
        budget = budget.saturating_add(e.unsigned_abs().saturating_mul(f.numer().bits() + f.denom().bits()));
        if budget > ORACLE_BITS {
            return Err(Error::OracleRange(format!(
                "{}: exact product up to k={upper} needs more than 2^24 bits",
                spec.name
            )));
        }
        items.push((k, f, e));
    }
    let mut out = ExactPartial::one();
    for (k, f, e) in items {
        out.rational_part *= pow_q(&f, e);
        out.e_power += spec.e_exponent.eval(k)?;
    }
    Ok(out)
}

fn bridge_exact(spec: &BridgedProductSpec, n: i64) -> Result<ExactPartial> {
    let Some(b) = &spec.bridge else {
        return Ok(ExactPartial::one());
    };
    let mut out = ExactPartial {
        rational_part: BigRational::one(),
        e_power: b.e_power.eval(n)?,
    };
    for f in &b.factors {
        let base = f.base.eval(n)?;
        if !base.is_positive() {
            return Err(Error::Domain(format!("{}: bridge base at n={n} is {base}", spec.name)));
        }
        let e = f.power.eval_int(n)?.to_i64().filter(|e| e.unsigned_abs() < ORACLE_BITS);
        let e = e.ok_or_else(|| Error::OracleRange(format!("{}: bridge power at n={n}", spec.name)))?;
        out.rational_part *= pow_q(&base, e);
    }
    Ok(out)
}

/// The `n`-th term of the sequence in exact arithmetic: core product to
/// `upper(n)`, raised to `power`, times the bridge.
pub fn partial_exact(spec: &BridgedProductSpec, n: i64) -> Result<ExactPartial> {
    let core = partial_exact_upto(spec, spec.upper.at(n))?;
    Ok(core.powi(spec.power).mul(&bridge_exact(spec, n)?))
}

fn rational_fixed(q: &BigRational, w: u32) -> BigInt {
    let num = q.numer() << (w as usize + 1);
    // round half up on the extra bit
    (num.div_floor(q.denom()) + 1) >> 1usize
}

fn ln_fixed(q: &BigRational, w: u32) -> BigInt {
    ln_ratio_fixed(q.numer(), q.denom(), w)
}

/// Fixed-point width for precision `p`, fixed across `n` so that batches and
/// single terms round identically. The margin covers up to 2^64 of
/// accumulated `exponent · ulp` error.
fn working_width(p: u32) -> u32 {
    p + 128
}

/// Log-space evaluator with a cumulative-sum cache per fixed-point width.
pub struct LogSession<'a> {
    spec: &'a BridgedProductSpec,
    cache: Mutex<HashMap<u32, Vec<BigInt>>>,
}

impl<'a> LogSession<'a> {
    pub fn new(spec: &'a BridgedProductSpec) -> LogSession<'a> {
        LogSession {
            spec,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn term_fixed(&self, k: i64, w: u32) -> Result<BigInt> {
        let s = self.spec;
        let f = positive_factor(s, k)?;
        let e = s.exponent.eval_int(k)?;
        let mut t = rational_fixed(&s.e_exponent.eval(k)?, w);
        if !e.is_zero() {
            let guard = e.bits() as u32 + 8;
            t += round_shift(&(e * ln_fixed(&f, w + guard)), guard as u64);
        }
        Ok(t)
    }

    /// `Σ_{k=k_start}^{upper}` of the core log terms at width `w`.
    fn core_fixed(&self, upper: i64, w: u32) -> Result<BigInt> {
        if upper < self.spec.k_start {
            return Ok(BigInt::zero());
        }
        let idx = (upper - self.spec.k_start) as usize;
        let mut cache = self.cache.lock().expect("log cache poisoned");
        let cum = cache.entry(w).or_default();
        while cum.len() <= idx {
            let k = self.spec.k_start + cum.len() as i64;
            let t = self.term_fixed(k, w)?;
            let next = match cum.last() {
                Some(last) => last + t,
                None => t,
            };
            cum.push(next);
        }
        Ok(cum[idx].clone())
    }

    fn bridge_fixed(&self, n: i64, w: u32) -> Result<BigInt> {
        let Some(b) = &self.spec.bridge else {
            return Ok(BigInt::zero());
        };
        let mut acc = rational_fixed(&b.e_power.eval(n)?, w);
        for f in &b.factors {
            let base = f.base.eval(n)?;
            if !base.is_positive() {
                return Err(Error::Domain(format!("{}: bridge base at n={n} is {base}", self.spec.name)));
            }
            let e = f.power.eval_int(n)?;
            let guard = e.bits() as u32 + 8;
            acc += round_shift(&(e * ln_fixed(&base, w + guard)), guard as u64);
        }
        Ok(acc)
    }

    /// Log of the `n`-th sequence term at precision `p`.
    pub fn log_partial(&self, n: i64, p: u32) -> Result<Real> {
        let w = working_width(p);
        let core = self.core_fixed(self.spec.upper.at(n), w)?;
        let total = core * self.spec.power + self.bridge_fixed(n, w)?;
        Ok(Real::from_fixed(total, w, p))
    }

    /// The sequence `n ↦ log_partial(n)` from `n0`.
    pub fn sequence(&self) -> SequenceGen<'_> {
        let n0 = self.spec.n0() as u64;
        SequenceGen::new(n0, SeqKind::PartialSums, move |n, p| self.log_partial(n as i64, p))
    }
}

/// Log of the `n`-th partial product at precision `p`.
pub fn log_partial(spec: &BridgedProductSpec, n: i64, p: u32) -> Result<Real> {
    LogSession::new(spec).log_partial(n, p)
}

/// Whether the alternating-sum route applies: no bridge, unit power, constant
/// per-factor e-power, exponent `(−1)^k P(k)` for a polynomial P, a factor
/// tending to one like a rational function of equal degrees, and an even or
/// odd upper index.
pub fn euler_route_eligible(spec: &BridgedProductSpec) -> bool {
    euler_route_parts(spec).is_ok()
}

struct EulerParts {
    c: BigRational,
    p: Poly,
    a: Vec<BigRational>,
}

fn euler_route_parts(spec: &BridgedProductSpec) -> Result<EulerParts> {
    let no = |why: &str| Err(Error::Spec(format!("{}: alternating-sum route needs {why}", spec.name)));
    if spec.bridge.is_some() || spec.power != 1 {
        return no("no bridge and power 1");
    }
    if !matches!(spec.upper, UpperIndex::TwoN | UpperIndex::TwoNPlusOne) {
        return no("upper index 2n or 2n+1");
    }
    let Some(c) = spec.e_exponent.f.as_constant() else {
        return no("a constant e_exponent");
    };
    if !spec.exponent.f.plain.is_zero() {
        return no("a purely alternating exponent");
    }
    let Some(p) = spec.exponent.f.alternating.as_poly() else {
        return no("a polynomial exponent");
    };
    if !spec.factor.f.alternating.is_zero() {
        return no("a non-alternating factor");
    }
    let count = p.degree().max(0) as usize + 1;
    let Some(a) = log_expansion(&spec.factor.f.plain, count) else {
        return no("a factor N(k)/D(k) with equal degree and leading coefficient");
    };
    Ok(EulerParts { c, p, a })
}

/// `R(K) = c(K − k_start + 1) + (−1)^K ½ Σ_r q_r E_r(K+1)`: the part of the
/// log partial product that the Abel sum of `Σ (−1)^k P(k) ln f(k)` misses.
fn euler_correction(parts: &EulerParts, k_start: i64, big_k: i64) -> BigRational {
    let d = parts.p.degree().max(0) as usize;
    let e = euler_polys(d);
    let x = BigRational::from_integer((big_k + 1).into());
    let mut poly_part = BigRational::zero();
    for (r, er) in e.iter().enumerate().take(d) {
        // q_r = Σ_{m≥1} p_{r+m} a_m
        let mut q = BigRational::zero();
        for m in 1..=d - r {
            if let Some(pc) = parts.p.coeffs.get(r + m) {
                q += pc * &parts.a[m - 1];
            }
        }
        poly_part += q * er.eval(&x);
    }
    poly_part /= BigRational::from_integer(2.into());
    if big_k.is_odd() {
        poly_part = -poly_part;
    }
    &parts.c * BigRational::from_integer((big_k - k_start + 1).into()) + poly_part
}

/// Limit of the log partial products via the Euler transform of the
/// alternating series `Σ (−1)^k P(k) ln f(k)`, plus the exact correction.
fn euler_route(spec: &BridgedProductSpec, p: u32, target_digits: u32, cap: usize) -> Result<LimitEstimate> {
    let parts = euler_route_parts(spec)?;
    let r0 = euler_correction(&parts, spec.k_start, spec.upper.at(1));
    let deg = parts.p.degree().max(0) as i64;
    for n in 2..=deg + 3 {
        if euler_correction(&parts, spec.k_start, spec.upper.at(n)) != r0 {
            return Err(Error::Spec(format!(
                "{}: the log partial products do not converge (correction drifts with n)",
                spec.name
            )));
        }
    }
    let pp = parts.p.clone();
    // b_k = −P(k) ln f(k), so that Σ (−1)^{k+1} b_k = Σ (−1)^k P(k) ln f(k)
    let terms = SequenceGen::new(spec.k_start as u64, SeqKind::AlternatingTerms, move |k, w| {
        let k = k as i64;
        let f = positive_factor(spec, k)?;
        let pk = pp.eval(&BigRational::from_integer(k.into()));
        if pk.is_zero() {
            return Ok(Real::zero(w));
        }
        let guard = (pk.numer().bits() as u32) + 16;
        let l = Real::from_fixed(ln_fixed(&f, w + guard), w + guard, w + guard);
        Ok(-(&l * &Real::from_rational(&pk, w + guard)).with_prec(w))
    });
    let mut opts = LimitOptions::new(Method::Euler);
    opts.max_terms_cap = cap;
    let mut est = estimate_limit(&terms, &opts, target_digits, p + 16).map_err(|e| match e {
        Error::NonConvergence { mut best } => {
            best.value = (&best.value + &Real::from_rational(&r0, p + 16)).with_prec(p);
            Error::NonConvergence { best }
        }
        other => other,
    })?;
    est.value = (&est.value + &Real::from_rational(&r0, p + 16)).with_prec(p);
    est.error_estimate = est.error_estimate.with_prec(p);
    Ok(est)
}

/// Limit of the log partial products. EULER uses the alternating-sum route
/// when the spec admits it and otherwise sums the sequence differences.
pub fn log_limit(
    spec: &BridgedProductSpec,
    opts: &LimitOptions,
    p: u32,
    target_digits: u32,
) -> Result<LimitEstimate> {
    if opts.method == Method::Euler && euler_route_eligible(spec) {
        return euler_route(spec, p, target_digits, opts.max_terms_cap);
    }
    let session = LogSession::new(spec);
    let seq = session.sequence();
    estimate_limit(&seq, opts, target_digits, p)
}

/// Method used when none is requested.
pub fn default_method(spec: &BridgedProductSpec) -> Method {
    if euler_route_eligible(spec) {
        Method::Euler
    } else {
        Method::Wynn
    }
}

/// The product's limit. `value` is exponentiated; `error_estimate` stays in
/// log space, where it is the relative error of the value.
pub fn limit(spec: &BridgedProductSpec, p: u32, target_digits: u32) -> Result<LimitEstimate> {
    limit_with(spec, &LimitOptions::new(default_method(spec)), p, target_digits)
}

pub fn limit_with(
    spec: &BridgedProductSpec,
    opts: &LimitOptions,
    p: u32,
    target_digits: u32,
) -> Result<LimitEstimate> {
    let exp_of = |mut e: LimitEstimate| {
        e.value = e.value.with_prec(p + 16).exp().with_prec(p);
        e
    };
    match log_limit(spec, opts, p + 16, target_digits) {
        Ok(e) => Ok(exp_of(e)),
        Err(Error::NonConvergence { best }) => Err(Error::NonConvergence {
            best: Box::new(exp_of(*best)),
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{agreement_digits, rational};

    #[test]
    fn exact_examples() {
        let kt3 = builtin("KT3").unwrap();
        let e = partial_exact(&kt3, 1).unwrap();
        assert_eq!(e.rational_part, rational(27, 25));
        assert!(e.e_power.is_zero());
        assert_eq!(partial_exact_upto(&builtin("KT1").unwrap(), 0).unwrap(), ExactPartial::one());
        let kt2 = partial_exact(&builtin("KT2").unwrap(), 1).unwrap();
        assert_eq!(kt2.e_power, rational(1, 2));
        // (1/2)^{-1} (2/3)^{3}
        assert_eq!(kt2.rational_part, rational(16, 27));
        let mz = partial_exact(&builtin("MELZAK").unwrap(), 1).unwrap();
        assert_eq!(mz.rational_part, rational(125, 36));
    }

    #[test]
    fn log_examples() {
        let p = 128;
        let l = log_partial(&builtin("KT3").unwrap(), 1, p).unwrap();
        assert!(agreement_digits(&l, &crate::numkernel::ln_rational(&rational(27, 25), p)).at_least(36));
        assert!((l.to_f64() - 0.076961).abs() < 1e-6);
        let h = log_partial(&builtin("HOLCOMBE").unwrap(), 2, p).unwrap();
        let want = &Real::from_rational(&rational(5, 2), p)
            + &(&crate::numkernel::ln_rational(&rational(3, 4), p) * &Real::from_int(4, p));
        assert!(agreement_digits(&h, &want).at_least(36));
    }

    #[test]
    fn oracle_matches_log_space() {
        let p = 160;
        for name in [
            "KT1", "KT2", "KT3", "KT4", "MELZAK", "BD_D(1/2)", "ADAMCHIK_E(1/2)", "ADAMCHIK_P5(1/4)", "GS53R",
            "GS55R", "HOLCOMBE",
        ] {
            let spec = builtin(name).unwrap();
            let session = LogSession::new(&spec);
            for n in spec.n0()..=8 {
                let exact = partial_exact(&spec, n).unwrap().ln(p + 32);
                let fast = session.log_partial(n, p).unwrap();
                let fresh = log_partial(&spec, n, p).unwrap();
                assert_eq!(fast, fresh, "{name} n={n}");
                let diff = (&exact - &fast).abs();
                assert!(diff.is_zero() || diff.log2_abs() < -(p as f64) + 12.0 + exact.log2_abs().max(0.0), "{name} n={n}");
            }
        }
    }

    #[test]
    fn domain_error_names_k() {
        let spec = BridgedProductSpec::new("bad", "1 - 3/k", "1", UpperIndex::NPlus(0)).unwrap();
        match log_partial(&spec, 5, 64) {
            Err(Error::Domain(m)) => assert!(m.contains("k=1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oracle_guard() {
        let spec = builtin("GS53R").unwrap();
        assert!(matches!(partial_exact(&spec, 400), Err(Error::OracleRange(_))));
    }

    #[test]
    fn euler_route_kt3() {
        let spec = builtin("KT3").unwrap();
        assert!(euler_route_eligible(&spec));
        let est = limit(&spec, 160, 40).unwrap();
        let want = Real::from_decimal_str("1.0866741661607739521357067208209652332959833088703", 200).unwrap();
        assert!(agreement_digits(&est.value, &want).at_least(45), "{}", est.value);
        assert_eq!(est.method, Method::Euler);
    }

    #[test]
    fn euler_and_wynn_agree_on_kt2() {
        let spec = builtin("KT2").unwrap();
        let want = Real::from_decimal_str("0.9638102878340799974921614340112213340463113718208", 200).unwrap();
        let e = limit_with(&spec, &LimitOptions::new(Method::Euler), 128, 30).unwrap();
        let w = limit_with(&spec, &LimitOptions::new(Method::Wynn), 128, 30).unwrap();
        assert!(agreement_digits(&e.value, &want).at_least(30), "{}", e.value);
        assert!(agreement_digits(&w.value, &want).at_least(30), "{}", w.value);
    }

    #[test]
    fn not_eligible() {
        for name in ["GS53R", "HOLCOMBE"] {
            assert!(!euler_route_eligible(&builtin(name).unwrap()));
        }
    }
}
