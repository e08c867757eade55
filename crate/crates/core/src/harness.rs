//! Identity registry, verification and convergence tables.

use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::accel::{LimitEstimate, LimitOptions, Method};
use crate::error::{Error, Result};
use crate::eulerfuncs::{d_function, e_function, phi_sderiv, DRoute, LerchDerivQuery};
use crate::exprlang::{self, ConstExpr};
use crate::numkernel::{agreement_digits, digits_for_bits, to_real, PrecisionPolicy, Real};
use crate::products::{self, builtin, parse_rational_arg, BridgedProductSpec, LogSession};

const EMBEDDED: &str = include_str!("../data/registry.txt");

#[derive(Clone, Debug)]
pub enum Lhs {
    Product(BridgedProductSpec),
    D { route: DRoute, x: BigRational },
    E { x: BigRational },
    Lerch { s: BigRational, u: BigRational },
    Expr(ConstExpr),
}

#[derive(Clone, Debug)]
pub struct IdentityRecord {
    pub id: String,
    pub description: String,
    pub anchor: String,
    pub lhs_text: String,
    pub lhs: Lhs,
    pub method: Method,
    pub richardson_order: Option<usize>,
    pub rhs_text: String,
    pub rhs: ConstExpr,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Overrides every record's own method.
    pub method: Option<Method>,
    pub max_terms: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub id: String,
    #[serde(rename = "lhs")]
    pub lhs_value: String,
    #[serde(rename = "rhs")]
    pub rhs_value: String,
    pub agreement_digits: i64,
    pub target_digits: u32,
    pub terms_used: u64,
    pub method: String,
    pub elapsed_ms: u64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: u64,
    pub partial: String,
    pub digits: i64,
}

fn parse_lhs(text: &str, inline: Option<BridgedProductSpec>) -> Result<Lhs> {
    let mut words = text.split_whitespace();
    let kind = words.next().unwrap_or("");
    let rest: Vec<&str> = words.collect();
    let arg = |i: usize| -> Result<BigRational> {
        let t = rest.get(i).ok_or_else(|| Error::Spec(format!("lhs `{text}` is missing an argument")))?;
        parse_rational_arg(t).ok_or_else(|| Error::Spec(format!("bad number `{t}` in lhs `{text}`")))
    };
    Ok(match kind.to_ascii_lowercase().as_str() {
        "product" => match (rest.first(), inline) {
            (Some(name), None) => Lhs::Product(builtin(name)?),
            (None, Some(spec)) => Lhs::Product(spec),
            (None, None) => return Err(Error::Spec("`lhs = product` needs a name or inline spec keys".into())),
            (Some(_), Some(_)) => return Err(Error::Spec("builtin name and inline spec keys both given".into())),
        },
        "d" => Lhs::D {
            route: rest.first().ok_or_else(|| Error::Spec("D needs a route".into()))?.parse()?,
            x: arg(1)?,
        },
        "e" => Lhs::E { x: arg(0)? },
        "lerch" => Lhs::Lerch { s: arg(0)?, u: arg(1)? },
        "expr" => {
            let body = text.trim_start()[kind.len()..].trim();
            Lhs::Expr(exprlang::parse(body).map_err(Error::Parse)?)
        }
        _ => return Err(Error::Spec(format!("unknown lhs kind `{kind}`"))),
    })
}

const SPEC_KEYS: [&str; 7] = ["name", "factor", "exponent", "e_exponent", "k_start", "upper", "power"];

fn build_record(id: &str, pairs: &[(String, String)]) -> Result<IdentityRecord> {
    let get = |k: &str| pairs.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.clone());
    let mut spec_text = String::new();
    for (k, v) in pairs {
        if SPEC_KEYS.contains(&k.as_str()) || k == "bridge" {
            spec_text.push_str(&format!("{k} = {v}\n"));
        } else if !["description", "anchor", "lhs", "method", "order", "rhs"].contains(&k.as_str()) {
            return Err(Error::Spec(format!("record {id}: unknown key `{k}`")));
        }
    }
    let inline = if spec_text.is_empty() {
        None
    } else {
        Some(BridgedProductSpec::from_text(&spec_text)?)
    };
    let lhs_text = get("lhs").ok_or_else(|| Error::Spec(format!("record {id}: missing lhs")))?;
    let lhs = parse_lhs(&lhs_text, inline)?;
    let rhs_text = get("rhs").ok_or_else(|| Error::Spec(format!("record {id}: missing rhs")))?;
    let rhs = exprlang::parse(&rhs_text).map_err(Error::Parse)?;
    let method = match get("method") {
        Some(m) => m.parse()?,
        None => Method::Wynn,
    };
    let richardson_order = match get("order") {
        Some(o) => Some(o.parse().map_err(|_| Error::Spec(format!("record {id}: bad order `{o}`")))?),
        None => None,
    };
    Ok(IdentityRecord {
        id: id.to_string(),
        description: get("description").unwrap_or_default(),
        anchor: get("anchor").unwrap_or_default(),
        lhs_text,
        lhs,
        method,
        richardson_order,
        rhs_text,
        rhs,
    })
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    pub records: Vec<IdentityRecord>,
}

impl Registry {
    pub fn from_text(text: &str) -> Result<Registry> {
        let mut records = Vec::new();
        let mut current: Option<(String, Vec<(String, String)>)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Spec(format!("registry line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "id" {
                if let Some((id, pairs)) = current.take() {
                    records.push(build_record(&id, &pairs)?);
                }
                current = Some((v, Vec::new()));
            } else {
                let (_, pairs) = current
                    .as_mut()
                    .ok_or_else(|| Error::Spec(format!("registry line {}: key before the first id", i + 1)))?;
                pairs.push((k, v));
            }
        }
        if let Some((id, pairs)) = current {
            records.push(build_record(&id, &pairs)?);
        }
        for (i, r) in records.iter().enumerate() {
            if records[..i].iter().any(|o| o.id.eq_ignore_ascii_case(&r.id)) {
                return Err(Error::Spec(format!("duplicate registry id {}", r.id)));
            }
        }
        Ok(Registry { records })
    }

    /// The registry compiled into the library.
    pub fn embedded() -> Registry {
        Registry::from_text(EMBEDDED).expect("embedded registry is well-formed")
    }

    /// A registry file, falling back to the embedded copy when `path` is None.
    pub fn load(path: Option<&Path>) -> Result<Registry> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Spec(format!("cannot read {}: {e}", p.display())))?;
                Registry::from_text(&text)
            }
            None => Ok(Registry::embedded()),
        }
    }

    pub fn get(&self, id: &str) -> Result<&IdentityRecord> {
        self.records
            .iter()
            .find(|r| r.id.eq_ignore_ascii_case(id))
            .ok_or_else(|| Error::UnknownName(id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }
}

struct LhsValue {
    value: Real,
    terms_used: u64,
    method: String,
}

fn limit_options(rec: &IdentityRecord, opts: &VerifyOptions) -> LimitOptions {
    let mut lo = LimitOptions::new(opts.method.unwrap_or(rec.method));
    if lo.method == Method::Richardson && opts.method.is_none() {
        lo.richardson_order = rec.richardson_order;
    }
    if let Some(m) = opts.max_terms {
        lo.max_terms_cap = m;
    }
    lo
}

fn eval_lhs(rec: &IdentityRecord, opts: &VerifyOptions, p: u32, digits: u32) -> Result<LhsValue> {
    let q = |x: &BigRational| to_real(x, p + 16);
    Ok(match &rec.lhs {
        Lhs::Product(spec) => {
            let lo = limit_options(rec, opts);
            let est: LimitEstimate = products::limit_with(spec, &lo, p, digits)?;
            LhsValue {
                value: est.value,
                terms_used: est.terms_used,
                method: est.method.as_str().to_string(),
            }
        }
        Lhs::D { route, x } => LhsValue {
            value: d_function(&q(x), *route, p, digits)?,
            terms_used: 0,
            method: route.as_str().to_ascii_lowercase(),
        },
        Lhs::E { x } => LhsValue {
            value: e_function(&q(x), p, digits)?,
            terms_used: 0,
            method: "euler".into(),
        },
        Lhs::Lerch { s, u } => LhsValue {
            value: phi_sderiv(&LerchDerivQuery::new(q(s), q(u))?, p)?,
            terms_used: 0,
            method: "hurwitz".into(),
        },
        Lhs::Expr(e) => LhsValue {
            value: exprlang::eval(e, p)?,
            terms_used: 0,
            method: "expr".into(),
        },
    })
}

/// Agreement in digits, with exact agreement reported as the working digits.
fn agree(a: &Real, b: &Real, p: u32) -> i64 {
    agreement_digits(a, b).as_i64().min(digits_for_bits(p) as i64)
}

/// Verifies one record: LHS against RHS at the policy precision, then both
/// again with 64 more bits.
pub fn verify(rec: &IdentityRecord, target_digits: u32, opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let policy = PrecisionPolicy::for_digits(target_digits);
    let p = policy.working_bits;
    let p2 = policy.recheck().working_bits;
    let mut report = VerificationReport {
        id: rec.id.clone(),
        lhs_value: String::new(),
        rhs_value: String::new(),
        agreement_digits: 0,
        target_digits,
        terms_used: 0,
        method: limit_options(rec, opts).method.as_str().to_string(),
        elapsed_ms: 0,
        pass: false,
        reason: None,
    };
    let shown = target_digits.max(1);
    let rhs = exprlang::eval(&rec.rhs, p);
    let lhs = eval_lhs(rec, opts, p, target_digits);
    match (&lhs, &rhs) {
        (Ok(l), Ok(r)) => {
            report.lhs_value = l.value.to_decimal(shown);
            report.rhs_value = r.to_decimal(shown);
            report.agreement_digits = agree(&l.value, r, p);
            report.terms_used = l.terms_used;
            report.method = l.method.clone();
            if report.agreement_digits < target_digits as i64 {
                report.reason = Some(format!("only {} digits agree", report.agreement_digits));
            } else {
                let l2 = eval_lhs(rec, opts, p2, target_digits);
                let r2 = exprlang::eval(&rec.rhs, p2);
                match (l2, r2) {
                    (Ok(l2), Ok(r2)) => {
                        let again = agree(&l2.value, &r2, p2);
                        let stable = agree(&l2.value, &l.value, p);
                        if again < target_digits as i64 || stable < target_digits as i64 {
                            report.reason = Some(format!(
                                "re-check at {p2} bits: {again} digits agree, {stable} digits stable"
                            ));
                        } else {
                            report.pass = true;
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => report.reason = Some(format!("re-check at {p2} bits: {e}")),
                }
            }
        }
        (Err(Error::NonConvergence { best }), Ok(r)) => {
            report.lhs_value = best.value.to_decimal(shown);
            report.rhs_value = r.to_decimal(shown);
            report.agreement_digits = agree(&best.value, r, p);
            report.terms_used = best.terms_used;
            report.method = best.method.as_str().to_string();
            report.reason = Some(lhs.as_ref().err().expect("error arm").to_string());
        }
        (Err(e), _) => report.reason = Some(format!("lhs: {e}")),
        (_, Err(e)) => report.reason = Some(format!("rhs: {e}")),
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    report
}

/// Looks `id` up and verifies it.
pub fn verify_id(reg: &Registry, id: &str, target_digits: u32, opts: &VerifyOptions) -> Result<VerificationReport> {
    Ok(verify(reg.get(id)?, target_digits, opts))
}

/// Every record, in registry order; records run in parallel.
pub fn verify_all(reg: &Registry, target_digits: u32, opts: &VerifyOptions) -> Vec<VerificationReport> {
    reg.records
        .par_iter()
        .map(|r| verify(r, target_digits, opts))
        .collect()
}

/// Partial products at the given `n` with their digits of agreement against
/// the accelerated limit.
pub fn convergence_table(rec: &IdentityRecord, n_values: &[u64], p: u32) -> Result<Vec<TableRow>> {
    let Lhs::Product(spec) = &rec.lhs else {
        return Err(Error::Spec(format!("{} has no product left-hand side", rec.id)));
    };
    let digits = digits_for_bits(p).saturating_sub(8).max(1);
    let limit = products::limit_with(spec, &limit_options(rec, &VerifyOptions::default()), p, digits)
        .or_else(|e| match e {
            Error::NonConvergence { best } => Ok(*best),
            other => Err(other),
        })?;
    let session = LogSession::new(spec);
    let shown = digits_for_bits(p).min(30);
    n_values
        .iter()
        .map(|&n| {
            if (n as i64) < spec.n0() {
                return Err(Error::Domain(format!("{}: n must be at least {}", rec.id, spec.n0())));
            }
            let v = session.log_partial(n as i64, p + 16)?.exp().with_prec(p);
            Ok(TableRow {
                n,
                partial: v.to_decimal(shown),
                digits: agree(&v, &limit.value, p),
            })
        })
        .collect()
}
