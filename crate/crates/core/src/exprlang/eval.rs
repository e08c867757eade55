use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{parse, BinOp, ConstExpr, ConstName, ExprKind, Func};
use crate::constants::{constant, ConstantId};
use crate::error::{Error, Result};
use crate::numkernel::{to_real, Real};
use crate::zetagamma::{barnes_g, gamma, hurwitz_zeta, ln_gamma, zeta, HurwitzQuery};

const GUARD: u32 = 48;
// exact folding of q^n stays cheap below this many result bits
const FOLD_POW_BITS: u64 = 1 << 16;

fn at(e: &ConstExpr, inner: Error) -> Error {
    match inner {
        Error::AtSpan { .. } => inner,
        other => Error::AtSpan {
            start: e.span.0,
            end: e.span.1,
            inner: Box::new(other),
        },
    }
}

/// Exact rational value of a subtree built only from literals and
/// arithmetic; `None` once a constant or function appears.
fn fold(e: &ConstExpr) -> Result<Option<BigRational>> {
    Ok(match &e.kind {
        ExprKind::Num(q) => Some(q.clone()),
        ExprKind::Neg(a) => fold(a)?.map(|q| -q),
        ExprKind::Binary(op, a, b) => {
            let (Some(x), Some(y)) = (fold(a)?, fold(b)?) else {
                return Ok(None);
            };
            match op {
                BinOp::Add => Some(x + y),
                BinOp::Sub => Some(x - y),
                BinOp::Mul => Some(x * y),
                BinOp::Div => {
                    if y.is_zero() {
                        return Err(at(e, Error::Pole("division by zero".into())));
                    }
                    Some(x / y)
                }
                BinOp::Pow => {
                    if !y.is_integer() {
                        return Ok(None);
                    }
                    let Some(n) = y.to_integer().to_i64() else {
                        return Ok(None);
                    };
                    let size = x.numer().bits().max(x.denom().bits());
                    if size.saturating_mul(n.unsigned_abs()) > FOLD_POW_BITS {
                        return Ok(None);
                    }
                    if x.is_zero() && n < 0 {
                        return Err(at(e, Error::Pole("zero to a negative power".into())));
                    }
                    let mag = n.unsigned_abs() as u32;
                    let r = BigRational::new(x.numer().pow(mag), x.denom().pow(mag));
                    Some(if n < 0 { r.recip() } else { r })
                }
            }
        }
        _ => None,
    })
}

fn const_value(c: ConstName, w: u32) -> Result<Real> {
    Ok(match c {
        ConstName::Pi => constant(ConstantId::Pi, w)?,
        ConstName::E => constant(ConstantId::E, w)?,
        ConstName::Catalan => constant(ConstantId::Catalan, w)?,
        ConstName::Zeta3 => constant(ConstantId::Zeta3, w)?,
        ConstName::EulerGamma => constant(ConstantId::EulerGamma, w)?,
        ConstName::Glaisher => constant(ConstantId::LnGlaisher, w + 8)?.exp().with_prec(w),
    })
}

fn magnitude_bits(x: &Real) -> u32 {
    if x.is_zero() {
        0
    } else {
        x.top().clamp(0, 4096) as u32
    }
}

fn value(e: &ConstExpr, w: u32) -> Result<Real> {
    if let Some(q) = fold(e)? {
        return Ok(to_real(&q, w));
    }
    let r = match &e.kind {
        ExprKind::Num(_) => unreachable!("literals always fold"),
        ExprKind::Const(c) => const_value(*c, w),
        ExprKind::Neg(a) => Ok(-value(a, w)?),
        ExprKind::Binary(op, a, b) => binary(e, *op, a, b, w),
        ExprKind::Call(f, args) => call(*f, args, w),
    };
    r.map_err(|err| at(e, err))
}

fn binary(e: &ConstExpr, op: BinOp, a: &ConstExpr, b: &ConstExpr, w: u32) -> Result<Real> {
    match op {
        BinOp::Add => Ok(&value(a, w)? + &value(b, w)?),
        BinOp::Sub => Ok(&value(a, w)? - &value(b, w)?),
        BinOp::Mul => Ok(&value(a, w)? * &value(b, w)?),
        BinOp::Div => {
            let d = value(b, w)?;
            if d.is_zero() {
                return Err(at(e, Error::Pole("division by zero".into())));
            }
            Ok(&value(a, w)? / &d)
        }
        BinOp::Pow => {
            if let Some(q) = fold(b)? {
                if q.is_integer() {
                    if let Some(n) = q.to_integer().to_i64() {
                        let x = value(a, w + 16)?;
                        if x.is_zero() && n < 0 {
                            return Err(Error::Pole("zero to a negative power".into()));
                        }
                        return Ok(x.powi(n).with_prec(w));
                    }
                }
            }
            let x = value(a, w)?;
            if !x.is_positive() {
                return Err(Error::Domain(format!(
                    "non-integer power of non-positive base {}",
                    x.to_decimal(10)
                )));
            }
            let y = value(b, w)?;
            // absolute error in y·ln x becomes relative error in the power
            let t = &y * &x.ln();
            let extra = magnitude_bits(&t);
            if extra == 0 {
                return Ok(x.pow(&y));
            }
            let we = w + extra;
            Ok(value(a, we)?.pow(&value(b, we)?).with_prec(w))
        }
    }
}

fn call(f: Func, args: &[ConstExpr], w: u32) -> Result<Real> {
    let x = value(&args[0], w)?;
    match f {
        Func::Exp => {
            let extra = magnitude_bits(&x);
            if extra > 64 {
                return Err(Error::Range(format!("exp of {} overflows", x.to_decimal(6))));
            }
            if extra == 0 {
                return Ok(x.exp());
            }
            Ok(value(&args[0], w + extra)?.exp().with_prec(w))
        }
        Func::Ln => {
            if !x.is_positive() {
                return Err(Error::Domain(format!("ln of {}", x.to_decimal(10))));
            }
            Ok(x.ln())
        }
        Func::Sqrt => {
            if x.is_negative() {
                return Err(Error::Domain(format!("sqrt of {}", x.to_decimal(10))));
            }
            Ok(x.sqrt())
        }
        Func::Gamma => gamma(&x, w),
        Func::LnGamma => ln_gamma(&x, w),
        Func::BarnesG => barnes_g(&x, w),
        Func::Zeta => zeta(&x, w),
        Func::HZeta => {
            let a = value(&args[1], w)?;
            hurwitz_zeta(&HurwitzQuery::new(x, a)?, w)
        }
    }
}

/// Evaluates `expr` to `p` bits. Subexpressions run with guard bits; errors
/// carry the byte span of the innermost failing node.
pub fn eval(expr: &ConstExpr, p: u32) -> Result<Real> {
    Ok(value(expr, p + GUARD)?.with_prec(p))
}

/// Parses and evaluates in one step.
pub fn eval_text(text: &str, p: u32) -> Result<Real> {
    let e = parse(text).map_err(Error::Parse)?;
    eval(&e, p)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn close(text: &str, want: &str, p: u32) {
        let got = eval_text(text, p).unwrap();
        let w = Real::from_decimal_str(want, p + 32).unwrap();
        let diff = (&got - &w).abs();
        if w.is_zero() {
            assert!(diff.is_zero() || diff.log2_abs() < -(p as f64) + 4.0, "{text}: {got}");
            return;
        }
        let rel = diff.log2_abs() - w.log2_abs();
        let digits = want.trim_start_matches('-').len() as f64 * 3.32 - 10.0;
        assert!(diff.is_zero() || rel < -digits.min(p as f64 - 4.0), "{text}: {got}");
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval_text("1+2^3", 64).unwrap().to_integer(), Some(9.into()));
        assert_eq!(eval_text("2^3^2", 64).unwrap().to_integer(), Some(512.into()));
        assert_eq!(eval_text("-2^2", 64).unwrap().to_integer(), Some((-4).into()));
        assert_eq!(eval_text("(1/3)*3", 64).unwrap().to_integer(), Some(1.into()));
        assert_eq!(eval_text("2^-2", 64).unwrap().to_f64(), 0.25);
    }

    #[test]
    fn special_values() {
        close("gamma(1/4)*gamma(3/4)", "4.442882938158366247015880990060693698614621689375690223085395606956434793", 200);
        close("pi*sqrt(2)", "4.442882938158366247015880990060693698614621689375690223085395606956434793", 200);
        close("pi*e/2", "4.2698671113367835327317754347732872475174442678825", 150);
        close("exp(2*catalan/pi - 1/2)", "1.0866741661607739521357067208209652332959833088703", 150);
        close("exp(7*zeta3/(4*pi^2) + 1/4)", "1.5890545224716606334818123588616614080792358449324", 150);
        close("2^(1/2)", "1.4142135623730950488016887242096980785696718753769", 150);
        close("glaisher", "1.2824271291006226368753425688697917277676889273250", 150);
        close("hzeta(2, 1/2) - pi^2/2", "0", 150);
        close("barnesG(5)", "12", 100);
        close("lngamma(1/2)*2 - ln(pi)", "0", 150);
        close("exp(eulergamma)", "1.7810724179901979852365041031071795491696452143034", 150);
    }

    #[test]
    fn cancels_to_zero() {
        let v = eval_text("zeta(2) - pi^2/6", 200).unwrap();
        assert!(v.is_zero() || v.log2_abs() < -190.0);
    }

    #[test]
    fn errors_carry_spans() {
        match eval_text("1 + ln(1 - 1)", 64) {
            Err(Error::AtSpan { start, end, inner }) => {
                assert_eq!((start, end), (4, 13));
                assert!(matches!(*inner, Error::Domain(_)));
            }
            other => panic!("{other:?}"),
        }
        match eval_text("2*(1/(3-3))", 64) {
            Err(Error::AtSpan { start, inner, .. }) => {
                assert_eq!(start, 3);
                assert!(matches!(*inner, Error::Pole(_)));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(eval_text("barnesG(10^9)", 64), Err(Error::AtSpan { .. })));
        assert!(matches!(eval_text("(-2)^(1/2)", 64), Err(Error::AtSpan { .. })));
        assert!(matches!(eval_text("1+", 64), Err(Error::Parse(_))));
    }
}
