//! Sequence-limit machinery: Euler transform, Wynn's epsilon and rho tables,
//! and polynomial extrapolation in 1/n.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{to_real, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Raw,
    Euler,
    Wynn,
    Richardson,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Euler => "euler",
            Method::Wynn => "wynn",
            Method::Richardson => "richardson",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Method::Raw),
            "euler" => Ok(Method::Euler),
            "wynn" => Ok(Method::Wynn),
            "richardson" => Ok(Method::Richardson),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqKind {
    /// `term_at(n)` is the n-th partial sum (or log partial product).
    PartialSums,
    /// `term_at(k)` is `b_k` of the series `Σ_{k≥n0} (−1)^{k+1} b_k`.
    AlternatingTerms,
}

type TermFn<'a> = dyn Fn(u64, u32) -> Result<Real> + Send + Sync + 'a;
type BatchFn<'a> = dyn Fn(u64, usize, u32) -> Result<Vec<Real>> + Send + Sync + 'a;

/// A deterministic sequence indexed from `n0`.
pub struct SequenceGen<'a> {
    pub n0: u64,
    pub kind: SeqKind,
    term: Box<TermFn<'a>>,
    batch: Option<Box<BatchFn<'a>>>,
}

impl<'a> SequenceGen<'a> {
    pub fn new(
        n0: u64,
        kind: SeqKind,
        term: impl Fn(u64, u32) -> Result<Real> + Send + Sync + 'a,
    ) -> SequenceGen<'a> {
        SequenceGen {
            n0,
            kind,
            term: Box::new(term),
            batch: None,
        }
    }

    /// Supplies a faster way to produce `count` consecutive terms from `n0`,
    /// which must match `term_at` value for value.
    pub fn with_batch(
        mut self,
        batch: impl Fn(u64, usize, u32) -> Result<Vec<Real>> + Send + Sync + 'a,
    ) -> SequenceGen<'a> {
        self.batch = Some(Box::new(batch));
        self
    }

    pub fn term_at(&self, n: u64, p: u32) -> Result<Real> {
        (self.term)(n, p)
    }

    /// Terms `n0, n0+1, ..., n0+count−1`.
    pub fn terms(&self, count: usize, p: u32) -> Result<Vec<Real>> {
        match &self.batch {
            Some(b) => b(self.n0, count, p),
            None => (0..count as u64)
                .map(|i| self.term_at(self.n0 + i, p))
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LimitEstimate {
    pub value: Real,
    pub error_estimate: Real,
    pub terms_used: u64,
    pub method: Method,
}

impl LimitEstimate {
    /// `error_estimate < 10^-digits`.
    pub fn meets(&self, digits: u32) -> bool {
        self.error_estimate.is_zero()
            || self.error_estimate.log2_abs() < -(digits as f64) * std::f64::consts::LOG2_10
    }
}

fn non_convergence(best: LimitEstimate) -> Error {
    Error::NonConvergence { best: Box::new(best) }
}

fn small_enough(diff: &Real, scale: &Real, p: u32) -> bool {
    if diff.is_zero() {
        return true;
    }
    let s = if scale.is_zero() { 0.0 } else { scale.log2_abs().max(0.0) };
    diff.log2_abs() < s - p as f64
}

/// Euler transform `Σ_j (−1)^j Δ^j c_0 / 2^{j+1}` of `Σ_{k≥n0} (−1)^{k+1} b_k`,
/// with `c_j = b_{n0+j}`. Stops when two successive partial transforms agree
/// to `p` bits twice running.
pub fn euler_transform_sum(terms: &SequenceGen, p: u32, max_terms: usize) -> Result<LimitEstimate> {
    let w = p + 32 + max_terms as u32;
    let sign_neg = terms.n0 % 2 == 0;
    let mut diag: Vec<Real> = Vec::with_capacity(max_terms);
    let mut sum = Real::zero(w);
    let mut last_step = Real::zero(w);
    let mut calm = 0;
    let chunk = 16usize;
    let mut produced = 0usize;
    let mut pending: Vec<Real> = Vec::new();
    for j in 0..max_terms {
        if pending.is_empty() {
            let count = chunk.min(max_terms - produced);
            pending = (0..count as u64)
                .map(|i| terms.term_at(terms.n0 + (produced as u64) + i, w))
                .collect::<Result<Vec<_>>>()?;
            pending.reverse();
            produced += count;
        }
        let b = pending.pop().expect("chunk non-empty");
        // diag[i] = Δ^i c_{j−i}; fold in c_j
        let mut cur = b.with_prec(w);
        for d in diag.iter_mut() {
            let next = &cur - &*d;
            *d = cur;
            cur = next;
        }
        diag.push(cur.clone());
        let step = cur.mul_2exp(-(j as i64) - 1);
        let step = if j % 2 == 1 { -step } else { step };
        sum = &sum + &step;
        last_step = step.abs();
        if small_enough(&last_step, &sum, p + 4) {
            calm += 1;
            if calm >= 2 {
                let value = if sign_neg { -&sum } else { sum };
                return Ok(LimitEstimate {
                    value: value.with_prec(p),
                    error_estimate: last_step.with_prec(p),
                    terms_used: j as u64 + 1,
                    method: Method::Euler,
                });
            }
        } else {
            calm = 0;
        }
    }
    let value = if sign_neg { -&sum } else { sum };
    Err(non_convergence(LimitEstimate {
        value: value.with_prec(p),
        error_estimate: last_step.with_prec(p),
        terms_used: max_terms as u64,
        method: Method::Euler,
    }))
}

struct Candidate {
    value: Real,
    step: Real,
    score: Real,
}

fn column_candidate(col: &[Option<Real>]) -> Option<Candidate> {
    let tail: Vec<&Real> = col.iter().rev().take(3).map_while(|e| e.as_ref()).collect();
    if tail.len() < 3 {
        return None;
    }
    let step = (tail[0] - tail[1]).abs();
    let before = (tail[1] - tail[2]).abs();
    let score = if step > before { step.clone() } else { before };
    Some(Candidate {
        value: tail[0].clone(),
        step,
        score,
    })
}

/// Even-column candidates of the epsilon (`x = None`) or rho table.
fn wynn_table(s: &[Real], x: Option<&[Real]>, w: u32) -> Vec<Candidate> {
    let n = s.len();
    let mut out = Vec::new();
    let mut prev: Vec<Option<Real>> = vec![Some(Real::zero(w)); n + 1];
    let mut cur: Vec<Option<Real>> = s.iter().map(|v| Some(v.with_prec(w))).collect();
    out.extend(column_candidate(&cur));
    for k in 0..n.saturating_sub(1) {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let e = match (&cur[i], &cur[i + 1], &prev[i + 1]) {
                (Some(a), Some(b), Some(c)) => {
                    let d = b - a;
                    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
                    if d.is_zero() || (!scale.is_zero() && d.log2_abs() < scale.log2_abs() - (w as f64) + 8.0) {
                        None
                    } else {
                        let num = match x {
                            None => Real::one(w),
                            Some(x) => &x[i + k + 1] - &x[i],
                        };
                        Some(c + &(&num / &d))
                    }
                }
                _ => None,
            };
            next.push(e);
        }
        if k % 2 == 1 {
            out.extend(column_candidate(&next));
        }
        prev = cur;
        cur = next;
    }
    out
}

fn best_of(cands: Vec<Candidate>) -> Option<Candidate> {
    cands.into_iter().min_by(|a, b| a.score.cmp(&b.score))
}

/// Wynn acceleration on a convergent sequence: runs both the epsilon table
/// and the rho table (interpolation points `x_n = n`) and keeps the even-column
/// estimate whose recent steps are smallest.
pub fn wynn_epsilon_limit(seq: &SequenceGen, p: u32, max_terms: usize) -> Result<LimitEstimate> {
    let w = p + 64 + max_terms as u32;
    let s = seq.terms(max_terms, w)?;
    if s.len() < 3 {
        return Err(Error::Range("Wynn acceleration needs at least 3 terms".into()));
    }
    let x: Vec<Real> = (0..s.len() as u64)
        .map(|i| Real::from_int(seq.n0 + i, w))
        .collect();
    let mut cands = wynn_table(&s, None, w);
    cands.extend(wynn_table(&s, Some(&x), w));
    let best = best_of(cands).ok_or_else(|| {
        non_convergence(LimitEstimate {
            value: s[s.len() - 1].with_prec(p),
            error_estimate: (&s[s.len() - 1] - &s[s.len() - 2]).abs().with_prec(p),
            terms_used: s.len() as u64,
            method: Method::Wynn,
        })
    })?;
    Ok(LimitEstimate {
        value: best.value.with_prec(p),
        error_estimate: best.step.with_prec(p),
        terms_used: s.len() as u64,
        method: Method::Wynn,
    })
}

/// Extrapolation to `1/n → 0` of the polynomial through the points ending at
/// `end` (inclusive), `order + 1` of them.
fn neville_at_zero(s: &[Real], x: &[i64], end: usize, order: usize, w: u32) -> Real {
    let start = end - order;
    // Σ w_i = 1, so Σ w_i s_i = s_end + Σ w_i (s_i − s_end)
    let base = &s[end];
    let mut acc = base.with_prec(w);
    for i in start..=end {
        // weight Π_{j≠i} x_i / (x_i − x_j), exact
        let mut wgt = BigRational::from_integer(BigInt::from(1));
        for j in start..=end {
            if j != i {
                wgt *= BigRational::new(BigInt::from(x[i]), BigInt::from(x[i] - x[j]));
            }
        }
        if i != end {
            acc = &acc + &(&to_real(&wgt, w) * &(&s[i] - base));
        }
    }
    acc
}

/// Polynomial-in-1/n extrapolation of order `order` on consecutive indices.
pub fn richardson_limit(
    seq: &SequenceGen,
    p: u32,
    max_terms: usize,
    order: usize,
) -> Result<LimitEstimate> {
    if order < 1 {
        return Err(Error::Range("Richardson order must be at least 1".into()));
    }
    if max_terms < order + 3 {
        return Err(Error::Range(format!(
            "Richardson order {order} needs at least {} terms",
            order + 3
        )));
    }
    let amp = (order as f64) * ((seq.n0 as f64 + max_terms as f64).log2() + 1.0);
    let w = p + 64 + amp.ceil() as u32;
    let s = seq.terms(max_terms, w)?;
    let x: Vec<i64> = (0..max_terms as i64).map(|i| seq.n0 as i64 + i).collect();
    if x[0] == 0 {
        return Err(Error::Domain("Richardson extrapolation needs indices n ≥ 1".into()));
    }
    let n = s.len();
    let r0 = neville_at_zero(&s, &x, n - 1, order, w);
    let r1 = neville_at_zero(&s, &x, n - 2, order, w);
    Ok(LimitEstimate {
        value: r0.with_prec(p),
        error_estimate: (&r0 - &r1).abs().with_prec(p),
        terms_used: n as u64,
        method: Method::Richardson,
    })
}

/// Richardson with the order chosen by the smallest recent steps.
fn richardson_auto(seq: &SequenceGen, p: u32, max_terms: usize) -> Result<LimitEstimate> {
    let max_order = (max_terms.saturating_sub(3)).min(48);
    if max_order < 1 {
        return richardson_limit(seq, p, max_terms, 1);
    }
    let amp = (max_order as f64) * ((seq.n0 as f64 + max_terms as f64).log2() + 1.0);
    let w = p + 64 + amp.ceil() as u32;
    let s = seq.terms(max_terms, w)?;
    let x: Vec<i64> = (0..max_terms as i64).map(|i| seq.n0 as i64 + i).collect();
    if x[0] == 0 {
        return Err(Error::Domain("Richardson extrapolation needs indices n ≥ 1".into()));
    }
    let n = s.len();
    let mut best: Option<Candidate> = None;
    for order in 1..=max_order {
        let r0 = neville_at_zero(&s, &x, n - 1, order, w);
        let r1 = neville_at_zero(&s, &x, n - 2, order, w);
        let r2 = neville_at_zero(&s, &x, n - 3, order, w);
        let step = (&r0 - &r1).abs();
        let before = (&r1 - &r2).abs();
        let score = if step > before { step.clone() } else { before };
        if best.as_ref().map_or(true, |b| score < b.score) {
            best = Some(Candidate { value: r0, step, score });
        }
    }
    let best = best.expect("at least one order");
    Ok(LimitEstimate {
        value: best.value.with_prec(p),
        error_estimate: best.step.with_prec(p),
        terms_used: n as u64,
        method: Method::Richardson,
    })
}

fn raw_limit(seq: &SequenceGen, p: u32, terms: usize) -> Result<LimitEstimate> {
    let terms = terms.max(2) as u64;
    let last = seq.term_at(seq.n0 + terms - 1, p)?;
    let before = seq.term_at(seq.n0 + terms - 2, p)?;
    Ok(LimitEstimate {
        error_estimate: (&last - &before).abs(),
        value: last,
        terms_used: terms,
        method: Method::Raw,
    })
}

/// Limit options: the method, an optional Richardson order (automatic when
/// `None`) and the cap on terms for the doubling escalation.
#[derive(Clone, Copy, Debug)]
pub struct LimitOptions {
    pub method: Method,
    pub richardson_order: Option<usize>,
    pub max_terms_cap: usize,
}

impl LimitOptions {
    pub fn new(method: Method) -> LimitOptions {
        LimitOptions {
            method,
            richardson_order: None,
            max_terms_cap: 512,
        }
    }
}

/// Runs `method` with term counts 64, 128, ... up to the cap until the error
/// estimate drops below `10^-target_digits`. RAW evaluates once at the cap.
pub fn estimate_limit(
    seq: &SequenceGen,
    opts: &LimitOptions,
    target_digits: u32,
    p: u32,
) -> Result<LimitEstimate> {
    let cap = opts.max_terms_cap.max(3);
    if opts.method == Method::Raw {
        let est = raw_limit(seq, p, cap)?;
        return if est.meets(target_digits) {
            Ok(est)
        } else {
            Err(non_convergence(est))
        };
    }
    let mut n = 64.min(cap);
    loop {
        let est = match (opts.method, seq.kind) {
            (Method::Euler, SeqKind::AlternatingTerms) => euler_transform_sum(seq, p, n),
            (Method::Euler, SeqKind::PartialSums) => {
                // sum of differences d_k = s_k − s_{k−1}, fed with the sign that
                // cancels the (−1)^{k+1} of the transform
                let diffs = SequenceGen::new(seq.n0 + 1, SeqKind::AlternatingTerms, |k, w| {
                    let d = &seq.term_at(k, w)? - &seq.term_at(k - 1, w)?;
                    Ok(if k % 2 == 0 { -d } else { d })
                });
                let first = seq.term_at(seq.n0, p + 32)?;
                let shift = |mut e: LimitEstimate| {
                    e.value = (&e.value.with_prec(p + 32) + &first).with_prec(p);
                    e.terms_used += 1;
                    e
                };
                match euler_transform_sum(&diffs, p, n) {
                    Ok(e) => Ok(shift(e)),
                    Err(e) => Err(e),
                }
            }
            (Method::Wynn, _) => wynn_epsilon_limit(seq, p, n),
            (Method::Richardson, _) => match opts.richardson_order {
                Some(order) => richardson_limit(seq, p, n, order),
                None => richardson_auto(seq, p, n),
            },
            (Method::Raw, _) => unreachable!(),
        };
        let est = match est {
            Ok(e) => e,
            Err(Error::NonConvergence { .. }) if n < cap => {
                n = (2 * n).min(cap);
                continue;
            }
            Err(e) => return Err(e),
        };
        if est.meets(target_digits) {
            return Ok(est);
        }
        if n >= cap {
            return Err(non_convergence(est));
        }
        n = (2 * n).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{agreement_digits, rational};

    fn geometric() -> SequenceGen<'static> {
        SequenceGen::new(0, SeqKind::PartialSums, |n, p| {
            Ok(&Real::one(p) - &Real::one(p).mul_2exp(-(n as i64)))
        })
    }

    fn log2_partials() -> SequenceGen<'static> {
        SequenceGen::new(1, SeqKind::PartialSums, |n, p| {
            let mut s = BigRational::from_integer(0.into());
            for k in 1..=n as i64 {
                let t = rational(1, k);
                s = if k % 2 == 1 { s + t } else { s - t };
            }
            Ok(to_real(&s, p))
        })
    }

    #[test]
    fn euler_on_alternating_harmonic() {
        let seq = SequenceGen::new(1, SeqKind::AlternatingTerms, |k, p| {
            Ok(to_real(&rational(1, k as i64), p))
        });
        let est = euler_transform_sum(&seq, 104, 120).unwrap();
        assert!(agreement_digits(&est.value, &Real::ln2(128)).at_least(30));
        assert!(est.terms_used <= 120);
        let zeros = SequenceGen::new(1, SeqKind::AlternatingTerms, |_, p| Ok(Real::zero(p)));
        let est = euler_transform_sum(&zeros, 128, 120).unwrap();
        assert!(est.value.is_zero());
        assert!(est.error_estimate.is_zero());
    }

    #[test]
    fn euler_reports_non_convergence() {
        let seq = SequenceGen::new(1, SeqKind::AlternatingTerms, |k, p| {
            Ok(to_real(&rational(1, k as i64), p))
        });
        assert!(matches!(
            euler_transform_sum(&seq, 128, 10),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn wynn_examples() {
        let est = wynn_epsilon_limit(&geometric(), 128, 20).unwrap();
        assert!(agreement_digits(&est.value, &Real::one(128)).at_least(35));
        let est = wynn_epsilon_limit(&log2_partials(), 160, 40).unwrap();
        assert!(agreement_digits(&est.value, &Real::ln2(160)).at_least(30));
    }

    #[test]
    fn constant_sequences_are_fixed_points() {
        let c = Real::from_int(7, 128);
        let cc = c.clone();
        let seq = SequenceGen::new(1, SeqKind::PartialSums, move |_, p| Ok(cc.with_prec(p)));
        for m in [Method::Wynn, Method::Richardson, Method::Euler, Method::Raw] {
            let est = estimate_limit(&seq, &LimitOptions::new(m), 30, 128).unwrap();
            assert_eq!(est.value, c, "{m}");
            assert!(est.error_estimate.is_zero(), "{m}");
        }
    }

    #[test]
    fn richardson_examples() {
        let seq = SequenceGen::new(1, SeqKind::PartialSums, |n, p| {
            Ok(to_real(&(rational(1, 1) + rational(1, n as i64)), p))
        });
        let est = richardson_limit(&seq, 128, 10, 1).unwrap();
        assert!(agreement_digits(&est.value, &Real::one(128)).at_least(35));
        // 2n ln(4n/(4n+1)) → −1/2
        let seq = SequenceGen::new(1, SeqKind::PartialSums, |n, p| {
            let n = n as i64;
            let l = crate::numkernel::ln_rational(&rational(4 * n, 4 * n + 1), p + 16);
            Ok((&l * &Real::from_int(2 * n, p + 16)).with_prec(p))
        });
        let est = estimate_limit(&seq, &LimitOptions::new(Method::Richardson), 30, 160).unwrap();
        assert!(agreement_digits(&est.value, &to_real(&rational(-1, 2), 160)).at_least(30));
        // −(2n+1) ln(1 − 2/(4n+3)) → 1
        let seq = SequenceGen::new(1, SeqKind::PartialSums, |n, p| {
            let n = n as i64;
            let l = crate::numkernel::ln_rational(&rational(4 * n + 1, 4 * n + 3), p + 16);
            Ok((&l * &Real::from_int(-(2 * n + 1), p + 16)).with_prec(p))
        });
        let est = estimate_limit(&seq, &LimitOptions::new(Method::Richardson), 30, 160).unwrap();
        assert!(agreement_digits(&est.value, &Real::one(160)).at_least(30));
    }

    #[test]
    fn dispatcher_geometric() {
        let est = estimate_limit(&geometric(), &LimitOptions::new(Method::Wynn), 30, 160).unwrap();
        let err = (&est.value - &Real::one(160)).abs();
        assert!(err.is_zero() || err.log2_abs() < -99.0);
    }

    #[test]
    fn raw_is_slow() {
        let opts = LimitOptions {
            max_terms_cap: 100,
            ..LimitOptions::new(Method::Raw)
        };
        match estimate_limit(&log2_partials(), &opts, 30, 128) {
            Err(Error::NonConvergence { best }) => assert_eq!(best.terms_used, 100),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn method_names() {
        for m in [Method::Raw, Method::Euler, Method::Wynn, Method::Richardson] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("levin".parse::<Method>().is_err());
    }
}
