//! Rational functions of one integer variable with an optional `(−1)^k`
//! channel, evaluated in exact arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exprlang::lexer::{tokenize, Tok, Token};

fn q0() -> BigRational {
    BigRational::zero()
}

/// Dense polynomial, `coeffs[i]` multiplies `x^i`. Trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Poly {
        Poly { coeffs: vec![c] }.trimmed()
    }

    pub fn var() -> Poly {
        Poly {
            coeffs: vec![q0(), BigRational::one()],
        }
    }

    fn trimmed(mut self) -> Poly {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial at −1.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(q0)
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(q0()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n)
            .map(|i| {
                self.coeffs.get(i).cloned().unwrap_or_else(q0) + o.coeffs.get(i).cloned().unwrap_or_else(q0)
            })
            .collect();
        Poly { coeffs: c }.trimmed()
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![q0(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly { coeffs: c }.trimmed()
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
        .trimmed()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = q0();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `p(x) ↦ p(a·x + b)`.
    pub fn compose_affine(&self, a: &BigRational, b: &BigRational) -> Poly {
        let lin = Poly {
            coeffs: vec![b.clone(), a.clone()],
        }
        .trimmed();
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
        }
        acc
    }
}

/// `num / den` with `den` not identically zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn poly(p: Poly) -> RatFunc {
        RatFunc {
            num: p,
            den: Poly::constant(BigRational::one()),
        }
    }

    pub fn constant(c: BigRational) -> RatFunc {
        RatFunc::poly(Poly::constant(c))
    }

    pub fn zero() -> RatFunc {
        RatFunc::poly(Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    /// The polynomial this function equals when the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly> {
        let d = self.den.as_constant()?;
        Some(self.num.scale(&d.recip()))
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            };
        }
        RatFunc {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        if o.is_zero() {
            return Err(Error::Spec("division by an identically zero expression".into()));
        }
        Ok(RatFunc {
            num: self.num.mul(&o.den),
            den: self.den.mul(&o.num),
        })
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::Domain(format!("denominator vanishes at {x}")));
        }
        Ok(self.num.eval(x) / d)
    }
}

/// `plain(x) + (−1)^x · alternating(x)`, closed under the field operations
/// because `((−1)^x)² = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedRatFunc {
    pub plain: RatFunc,
    pub alternating: RatFunc,
}

impl SignedRatFunc {
    pub fn plain(r: RatFunc) -> SignedRatFunc {
        SignedRatFunc {
            plain: r,
            alternating: RatFunc::zero(),
        }
    }

    pub fn constant(c: BigRational) -> SignedRatFunc {
        SignedRatFunc::plain(RatFunc::constant(c))
    }

    pub fn sign() -> SignedRatFunc {
        SignedRatFunc {
            plain: RatFunc::zero(),
            alternating: RatFunc::constant(BigRational::one()),
        }
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if !self.alternating.is_zero() {
            return None;
        }
        self.plain.as_constant()
    }

    fn add(&self, o: &SignedRatFunc) -> SignedRatFunc {
        SignedRatFunc {
            plain: self.plain.add(&o.plain),
            alternating: self.alternating.add(&o.alternating),
        }
    }

    fn neg(&self) -> SignedRatFunc {
        SignedRatFunc {
            plain: self.plain.neg(),
            alternating: self.alternating.neg(),
        }
    }

    fn mul(&self, o: &SignedRatFunc) -> SignedRatFunc {
        let (a, b, c, d) = (&self.plain, &self.alternating, &o.plain, &o.alternating);
        SignedRatFunc {
            plain: a.mul(c).add(&b.mul(d)),
            alternating: a.mul(d).add(&b.mul(c)),
        }
    }

    fn div(&self, o: &SignedRatFunc) -> Result<SignedRatFunc> {
        // multiply through by the conjugate c − s·d
        let (c, d) = (&o.plain, &o.alternating);
        let norm = c.mul(c).add(&d.mul(d).neg());
        let conj = SignedRatFunc {
            plain: c.clone(),
            alternating: d.neg(),
        };
        let top = self.mul(&conj);
        Ok(SignedRatFunc {
            plain: top.plain.div(&norm)?,
            alternating: top.alternating.div(&norm)?,
        })
    }

    fn powi(&self, n: i64) -> Result<SignedRatFunc> {
        let mut acc = SignedRatFunc::constant(BigRational::one());
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(self);
        }
        if n < 0 {
            acc = SignedRatFunc::constant(BigRational::one()).div(&acc)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &BigInt) -> Result<BigRational> {
        let xq = BigRational::from_integer(x.clone());
        let a = self.plain.eval(&xq)?;
        if self.alternating.is_zero() {
            return Ok(a);
        }
        let b = self.alternating.eval(&xq)?;
        Ok(if x.is_odd() { a - b } else { a + b })
    }

    pub fn eval_i64(&self, x: i64) -> Result<BigRational> {
        self.eval(&BigInt::from(x))
    }
}

/// A parsed function of one variable, keeping its source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KFunc {
    pub text: String,
    pub var: char,
    pub f: SignedRatFunc,
}

impl KFunc {
    pub fn parse(text: &str, var: char) -> Result<KFunc> {
        let f = parse_signed(text, var)?;
        Ok(KFunc {
            text: text.trim().to_string(),
            var,
            f,
        })
    }

    pub fn constant(c: BigRational, var: char) -> KFunc {
        KFunc {
            text: c.to_string(),
            var,
            f: SignedRatFunc::constant(c),
        }
    }

    pub fn eval(&self, x: i64) -> Result<BigRational> {
        self.f.eval_i64(x)
    }

    /// Exact integer value; anything else is a spec error.
    pub fn eval_int(&self, x: i64) -> Result<BigInt> {
        let v = self.eval(x)?;
        if !v.is_integer() {
            return Err(Error::Spec(format!(
                "`{}` is not an integer at {}={x} (value {v})",
                self.text, self.var
            )));
        }
        Ok(v.to_integer())
    }
}

impl fmt::Display for KFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

struct KParser<'a> {
    toks: Vec<Token>,
    pos: usize,
    var: char,
    src: &'a str,
}

fn spec_err(src: &str, at: usize, msg: &str) -> Error {
    Error::Spec(format!("{msg} at byte {at} of `{src}`"))
}

impl KParser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> usize {
        self.toks[self.pos].start
    }

    fn bump(&mut self) {
        if *self.peek() != Tok::End {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<SignedRatFunc> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SignedRatFunc> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc.div(&self.unary()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<SignedRatFunc> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.pow()
    }

    fn pow(&mut self) -> Result<SignedRatFunc> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.here();
        let exp = self.unary()?;
        if let Some(n) = exp.as_constant() {
            let n = n
                .is_integer()
                .then(|| n.to_integer().to_i64())
                .flatten()
                .filter(|n| n.abs() <= 64)
                .ok_or_else(|| spec_err(self.src, at, "exponent must be a small integer"))?;
            return base.powi(n);
        }
        // (−1)^(a·x + c) with integer a, c
        if base.as_constant() == Some(-BigRational::one()) && exp.alternating.is_zero() {
            if let Some(p) = exp.plain.as_poly() {
                if p.degree() <= 1 && p.coeffs.iter().all(|c| c.is_integer()) {
                    let c = p.coeffs.first().cloned().unwrap_or_else(q0).to_integer();
                    let a = p.coeffs.get(1).cloned().unwrap_or_else(q0).to_integer();
                    let mut r = if a.is_odd() {
                        SignedRatFunc::sign()
                    } else {
                        SignedRatFunc::constant(BigRational::one())
                    };
                    if c.is_odd() {
                        r = r.neg();
                    }
                    return Ok(r);
                }
            }
        }
        Err(spec_err(
            self.src,
            at,
            "only (-1)^(a*k+c) may have a variable exponent",
        ))
    }

    fn atom(&mut self) -> Result<SignedRatFunc> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Number(t) => {
                self.bump();
                let q = crate::numkernel::parse_decimal(&t)
                    .ok_or_else(|| spec_err(self.src, at, "malformed number"))?;
                Ok(SignedRatFunc::constant(q))
            }
            Tok::Name(n) if n.len() == 1 && n.starts_with(self.var) => {
                self.bump();
                Ok(SignedRatFunc::plain(RatFunc::poly(Poly::var())))
            }
            Tok::Name(n) => Err(spec_err(
                self.src,
                at,
                &format!("unknown name `{n}` (the variable is `{}`)", self.var),
            )),
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(spec_err(self.src, self.here(), "expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            other => Err(spec_err(
                self.src,
                at,
                &format!("unexpected {}", other.describe()),
            )),
        }
    }
}

/// Parses a rational function of `var` with `(−1)^var` terms.
pub fn parse_signed(text: &str, var: char) -> Result<SignedRatFunc> {
    let toks = tokenize(text).map_err(Error::Parse)?;
    let mut p = KParser {
        toks,
        pos: 0,
        var,
        src: text,
    };
    let f = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(spec_err(text, p.here(), "trailing input"));
    }
    Ok(f)
}

/// Euler polynomials `E_0..=E_r`, from `E_r(x) = x^r − ½ Σ_{j<r} C(r,j) E_j(x)`.
pub fn euler_polys(r: usize) -> Vec<Poly> {
    let half = BigRational::new(1.into(), 2.into());
    let mut out: Vec<Poly> = Vec::with_capacity(r + 1);
    for m in 0..=r {
        let mut coeffs = vec![q0(); m + 1];
        coeffs[m] = BigRational::one();
        let mut e = Poly { coeffs };
        let mut binom = BigInt::one();
        for (j, ej) in out.iter().enumerate() {
            e = e.sub(&ej.scale(&(BigRational::from_integer(binom.clone()) * &half)));
            binom = binom * (m - j) / (j + 1);
        }
        out.push(e);
    }
    out
}

/// `a_m`, `m = 1..=count`, in `ln(N(x)/D(x)) = Σ a_m x^{−m}` for large x, when
/// N and D share degree and leading coefficient.
pub fn log_expansion(f: &RatFunc, count: usize) -> Option<Vec<BigRational>> {
    let (n, d) = (&f.num, &f.den);
    if n.degree() != d.degree() || n.leading() != d.leading() || n.degree() < 0 {
        return None;
    }
    // in y = 1/x: N/D = Ñ(y)/D̃(y) with Ñ(0) = D̃(0); ln = ln Ñ − ln D̃
    let rev = |p: &Poly| -> Vec<BigRational> {
        let lc = p.leading();
        p.coeffs.iter().rev().map(|c| c / &lc).collect()
    };
    let ln_series = |c: Vec<BigRational>| -> Vec<BigRational> {
        // c[0] = 1; ln(1 + u) via L' = C'/C
        let get = |i: usize| c.get(i).cloned().unwrap_or_else(q0);
        let mut l = vec![q0(); count + 1];
        for m in 1..=count {
            // m·l_m = m·c_m − Σ_{j=1}^{m−1} j·l_j·c_{m−j}
            let mut s = BigRational::from_integer(BigInt::from(m)) * get(m);
            for j in 1..m {
                s -= BigRational::from_integer(BigInt::from(j)) * &l[j] * get(m - j);
            }
            l[m] = s / BigRational::from_integer(BigInt::from(m));
        }
        l
    };
    let ln = ln_series(rev(n));
    let ld = ln_series(rev(d));
    Some((1..=count).map(|m| &ln[m] - &ld[m]).collect())
}
