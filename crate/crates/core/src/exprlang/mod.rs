//! Constant-expression language for identity right-hand sides.
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | pow
//! pow   := atom ('^' unary)?
//! atom  := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

mod eval;
pub(crate) mod lexer;
mod parser;

use std::fmt;

use num_rational::BigRational;

pub use eval::{eval, eval_text};
pub use parser::parse;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub byte_offset: usize,
    pub expected: String,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn new(byte_offset: usize, expected: &str, message: &str) -> ParseDiagnostic {
        ParseDiagnostic {
            byte_offset,
            expected: expected.to_string(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {} (expected {})", self.message, self.byte_offset, self.expected)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstName {
    Pi,
    E,
    Catalan,
    Glaisher,
    Zeta3,
    EulerGamma,
}

impl ConstName {
    pub fn lookup(name: &str) -> Option<ConstName> {
        Some(match name.to_ascii_lowercase().as_str() {
            "pi" => ConstName::Pi,
            "e" => ConstName::E,
            "catalan" => ConstName::Catalan,
            "glaisher" => ConstName::Glaisher,
            "zeta3" => ConstName::Zeta3,
            "eulergamma" => ConstName::EulerGamma,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstName::Pi => "pi",
            ConstName::E => "e",
            ConstName::Catalan => "catalan",
            ConstName::Glaisher => "glaisher",
            ConstName::Zeta3 => "zeta3",
            ConstName::EulerGamma => "eulergamma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Gamma,
    LnGamma,
    BarnesG,
    Zeta,
    HZeta,
}

impl Func {
    pub fn lookup(name: &str) -> Option<Func> {
        Some(match name.to_ascii_lowercase().as_str() {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "gamma" => Func::Gamma,
            "lngamma" => Func::LnGamma,
            "barnesg" => Func::BarnesG,
            "zeta" => Func::Zeta,
            "hzeta" => Func::HZeta,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Gamma => "gamma",
            Func::LnGamma => "lngamma",
            Func::BarnesG => "barnesG",
            Func::Zeta => "zeta",
            Func::HZeta => "hzeta",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Func::HZeta => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(BigRational),
    Const(ConstName),
    Neg(Box<ConstExpr>),
    Binary(BinOp, Box<ConstExpr>, Box<ConstExpr>),
    Call(Func, Vec<ConstExpr>),
}

/// Expression node with its byte span in the source. Spans do not take part
/// in equality.
#[derive(Clone, Debug)]
pub struct ConstExpr {
    pub kind: ExprKind,
    pub span: (usize, usize),
}

impl PartialEq for ConstExpr {
    fn eq(&self, other: &ConstExpr) -> bool {
        self.kind == other.kind
    }
}

/// Exact decimal text of a rational with a terminating expansion, else `n/d`.
fn rational_text(q: &BigRational) -> String {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{Signed, Zero};
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut d = q.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d.is_even() {
        d /= 2;
        twos += 1;
    }
    while (&d % 5u32).is_zero() {
        d /= 5;
        fives += 1;
    }
    if d != BigInt::from(1) {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    let scaled = (q.abs() * BigRational::from_integer(BigInt::from(10).pow(places))).to_integer();
    let mut s = scaled.to_string();
    while s.len() <= places as usize {
        s.insert(0, '0');
    }
    s.insert(s.len() - places as usize, '.');
    if q.is_negative() {
        s.insert(0, '-');
    }
    s
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(q) => {
                let t = rational_text(q);
                if t.contains('/') {
                    write!(f, "({t})")
                } else {
                    f.write_str(&t)
                }
            }
            ExprKind::Const(c) => f.write_str(c.as_str()),
            ExprKind::Neg(a) => write!(f, "(-{a})"),
            ExprKind::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.as_str())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_text() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(rational_text(&q(1, 4)), "0.25");
        assert_eq!(rational_text(&q(-3, 1)), "-3");
        assert_eq!(rational_text(&q(1, 20)), "0.05");
        assert_eq!(rational_text(&q(1, 3)), "1/3");
    }
}
