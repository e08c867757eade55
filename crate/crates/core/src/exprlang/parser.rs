use num_rational::BigRational;

use super::lexer::{tokenize, Tok, Token};
use super::{BinOp, ConstExpr, ConstName, ExprKind, Func, ParseDiagnostic};
use crate::numkernel::parse_decimal;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn node(kind: ExprKind, start: usize, end: usize) -> ConstExpr {
    ConstExpr { kind, span: (start, end) }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseDiagnostic> {
        let t = self.peek();
        Err(ParseDiagnostic::new(
            t.start,
            expected,
            &format!("unexpected {}", t.tok.describe()),
        ))
    }

    fn expr(&mut self) -> Result<ConstExpr, ParseDiagnostic> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = node(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span.0, span.1);
        }
    }

    fn term(&mut self) -> Result<ConstExpr, ParseDiagnostic> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = node(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span.0, span.1);
        }
    }

    fn unary(&mut self) -> Result<ConstExpr, ParseDiagnostic> {
        if self.peek().tok == Tok::Minus {
            let start = self.bump().start;
            let inner = self.unary()?;
            let end = inner.span.1;
            return Ok(node(ExprKind::Neg(Box::new(inner)), start, end));
        }
        self.pow()
    }

    fn pow(&mut self) -> Result<ConstExpr, ParseDiagnostic> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            let span = (base.span.0, exp.span.1);
            return Ok(node(
                ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)),
                span.0,
                span.1,
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ConstExpr, ParseDiagnostic> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(text) => {
                self.bump();
                let q: BigRational = parse_decimal(text)
                    .ok_or_else(|| ParseDiagnostic::new(t.start, "a number", "malformed number"))?;
                Ok(node(ExprKind::Num(q), t.start, t.end))
            }
            Tok::Name(name) => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    let func = Func::lookup(name).ok_or_else(|| {
                        ParseDiagnostic::new(
                            t.start,
                            "one of exp, ln, sqrt, gamma, lngamma, barnesG, zeta, hzeta",
                            &format!("unknown function `{name}`"),
                        )
                    })?;
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while self.peek().tok == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if self.peek().tok != Tok::RParen {
                        return self.fail("`,` or `)`");
                    }
                    let end = self.bump().end;
                    if args.len() != func.arity() {
                        return Err(ParseDiagnostic::new(
                            t.start,
                            &format!("{} argument(s)", func.arity()),
                            &format!(
                                "`{}` takes {} argument(s), got {}",
                                func.as_str(),
                                func.arity(),
                                args.len()
                            ),
                        ));
                    }
                    return Ok(node(ExprKind::Call(func, args), t.start, end));
                }
                match ConstName::lookup(name) {
                    Some(c) => Ok(node(ExprKind::Const(c), t.start, t.end)),
                    None if Func::lookup(name).is_some() => Err(ParseDiagnostic::new(
                        t.end,
                        "`(`",
                        &format!("function `{name}` needs arguments"),
                    )),
                    None => Err(ParseDiagnostic::new(
                        t.start,
                        "one of pi, e, catalan, glaisher, zeta3, eulergamma",
                        &format!("unknown name `{name}`"),
                    )),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return self.fail("`)`");
                }
                self.bump();
                Ok(inner)
            }
            _ => self.fail("a number, name or `(`"),
        }
    }
}

/// Parses an expression; diagnostics carry byte offsets into `text`.
pub fn parse(text: &str) -> Result<ConstExpr, ParseDiagnostic> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_shapes() {
        assert_eq!(parse("1+2*3").unwrap().to_string(), "(1+(2*3))");
        assert_eq!(parse("2^3^2").unwrap().to_string(), "(2^(3^2))");
        assert_eq!(parse("-2^2").unwrap().to_string(), "(-(2^2))");
        assert_eq!(parse("2^-1").unwrap().to_string(), "(2^(-1))");
        assert_eq!(parse("1/12").unwrap().to_string(), "(1/12)");
        assert_eq!(parse("PI*E").unwrap().to_string(), "(pi*e)");
        assert_eq!(
            parse("exp(2*catalan/pi - 1/2)").unwrap().to_string(),
            "exp((((2*catalan)/pi)-(1/2)))"
        );
    }

    #[test]
    fn print_parse_idempotent() {
        for t in ["exp(7*zeta3/(4*pi^2) + 1/4)", "hzeta(-1, 0.25)", "-(-3)", "2^(1/6)*sqrt(pi)"] {
            let a = parse(t).unwrap();
            let b = parse(&a.to_string()).unwrap();
            assert_eq!(a, b, "{t}");
        }
    }

    #[test]
    fn diagnostics() {
        let e = parse("1 + foo").unwrap_err();
        assert_eq!(e.byte_offset, 4);
        assert!(e.message.contains("unknown name"));
        let e = parse("hzeta(1)").unwrap_err();
        assert!(e.message.contains("takes 2"));
        let e = parse("2pi").unwrap_err();
        assert_eq!(e.byte_offset, 1);
        let e = parse("(1+2").unwrap_err();
        assert_eq!(e.byte_offset, 4);
        assert!(parse("exp").is_err());
        assert!(parse("").is_err());
        assert!(parse("wibble(2)").unwrap_err().message.contains("unknown function"));
    }

    #[test]
    fn spans() {
        let e = parse("1 + ln(0)").unwrap();
        match &e.kind {
            super::ExprKind::Binary(_, _, rhs) => assert_eq!(rhs.span, (4, 9)),
            _ => panic!(),
        }
    }
}
