use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::kexpr::KFunc;
use crate::error::{Error, Result};
use crate::numkernel::parse_decimal;

/// Last `k` of the product as a function of the sequence index `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpperIndex {
    TwoN,
    TwoNPlusOne,
    NPlus(i64),
}

impl UpperIndex {
    pub fn at(&self, n: i64) -> i64 {
        match self {
            UpperIndex::TwoN => 2 * n,
            UpperIndex::TwoNPlusOne => 2 * n + 1,
            UpperIndex::NPlus(c) => n + c,
        }
    }

    pub fn parse(text: &str) -> Result<UpperIndex> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "2n" | "2*n" => return Ok(UpperIndex::TwoN),
            "2n+1" | "2*n+1" => return Ok(UpperIndex::TwoNPlusOne),
            "n" => return Ok(UpperIndex::NPlus(0)),
            _ => {}
        }
        let bad = || Error::Spec(format!("upper must be 2n, 2n+1, n or n±c; got `{text}`"));
        let rest = t.strip_prefix('n').ok_or_else(bad)?;
        let c: i64 = rest.strip_prefix('+').unwrap_or(rest).parse().map_err(|_| bad())?;
        Ok(UpperIndex::NPlus(c))
    }
}

impl fmt::Display for UpperIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperIndex::TwoN => f.write_str("2n"),
            UpperIndex::TwoNPlusOne => f.write_str("2n+1"),
            UpperIndex::NPlus(0) => f.write_str("n"),
            UpperIndex::NPlus(c) if *c > 0 => write!(f, "n+{c}"),
            UpperIndex::NPlus(c) => write!(f, "n{c}"),
        }
    }
}

/// `base(n)^power(n)`, both in `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgeFactor {
    pub base: KFunc,
    pub power: KFunc,
}

/// Extra factor `Π base_i(n)^{power_i(n)} · e^{e_power(n)}` applied after the
/// core product is raised to `power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge {
    pub factors: Vec<BridgeFactor>,
    pub e_power: KFunc,
}

impl Bridge {
    pub fn parse(text: &str) -> Result<Bridge> {
        let mut factors = Vec::new();
        let mut e_texts: Vec<String> = Vec::new();
        for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(rest) = item.strip_prefix("e^") {
                e_texts.push(rest.trim().to_string());
                continue;
            }
            let (base, power) = match top_level_caret(item) {
                Some(i) => (&item[..i], &item[i + 1..]),
                None => (item, "1"),
            };
            factors.push(BridgeFactor {
                base: KFunc::parse(base, 'n')?,
                power: KFunc::parse(power, 'n')?,
            });
        }
        let e_power = match e_texts.len() {
            0 => KFunc::constant(BigRational::zero(), 'n'),
            1 => KFunc::parse(&e_texts[0], 'n')?,
            _ => {
                let joined: Vec<String> = e_texts.iter().map(|t| format!("({t})")).collect();
                KFunc::parse(&joined.join(" + "), 'n')?
            }
        };
        Ok(Bridge { factors, e_power })
    }
}

fn top_level_caret(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '^' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

impl fmt::Display for Bridge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self
            .factors
            .iter()
            .map(|b| format!("({})^({})", b.base, b.power))
            .collect();
        if self.e_power.f.as_constant().map_or(true, |c| !c.is_zero()) {
            items.push(format!("e^({})", self.e_power));
        }
        f.write_str(&items.join("; "))
    }
}

/// `power · Σ_{k=k_start}^{upper(n)} [e_exponent(k) + exponent(k)·ln factor(k)]`
/// plus the bridge, in log space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgedProductSpec {
    pub name: String,
    pub factor: KFunc,
    pub exponent: KFunc,
    pub e_exponent: KFunc,
    pub k_start: i64,
    pub upper: UpperIndex,
    pub power: i64,
    pub bridge: Option<Bridge>,
}

impl BridgedProductSpec {
    pub fn new(name: &str, factor: &str, exponent: &str, upper: UpperIndex) -> Result<BridgedProductSpec> {
        Ok(BridgedProductSpec {
            name: name.to_string(),
            factor: KFunc::parse(factor, 'k')?,
            exponent: KFunc::parse(exponent, 'k')?,
            e_exponent: KFunc::constant(BigRational::zero(), 'k'),
            k_start: 1,
            upper,
            power: 1,
            bridge: None,
        })
    }

    pub fn with_e_exponent(mut self, text: &str) -> Result<BridgedProductSpec> {
        self.e_exponent = KFunc::parse(text, 'k')?;
        Ok(self)
    }

    /// First sequence index whose product is non-empty, at least 1.
    pub fn n0(&self) -> i64 {
        let mut n = 1;
        while self.upper.at(n) < self.k_start {
            n += 1;
        }
        n
    }

    /// Key-value text form, one `key = value` per line; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<BridgedProductSpec> {
        let mut name = "user".to_string();
        let (mut factor, mut exponent) = (None, None);
        let mut e_exponent = "0".to_string();
        let mut k_start = 1i64;
        let mut upper = UpperIndex::TwoN;
        let mut power = 1i64;
        let mut bridge = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Spec(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| {
                v.parse::<i64>()
                    .map_err(|_| Error::Spec(format!("line {}: `{key}` needs an integer", lineno + 1)))
            };
            match key {
                "name" => name = value.to_string(),
                "factor" => factor = Some(value.to_string()),
                "exponent" => exponent = Some(value.to_string()),
                "e_exponent" => e_exponent = value.to_string(),
                "k_start" => k_start = int(value)?,
                "upper" => upper = UpperIndex::parse(value)?,
                "power" => power = int(value)?,
                "bridge" => bridge = Some(Bridge::parse(value)?),
                other => return Err(Error::Spec(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        let factor = factor.ok_or_else(|| Error::Spec("missing `factor`".into()))?;
        let exponent = exponent.ok_or_else(|| Error::Spec("missing `exponent`".into()))?;
        let mut spec = BridgedProductSpec::new(&name, &factor, &exponent, upper)?.with_e_exponent(&e_exponent)?;
        spec.k_start = k_start;
        spec.power = power;
        spec.bridge = bridge;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "name = {}\nfactor = {}\nexponent = {}\ne_exponent = {}\nk_start = {}\nupper = {}\npower = {}\n",
            self.name, self.factor, self.exponent, self.e_exponent, self.k_start, self.upper, self.power
        );
        if let Some(b) = &self.bridge {
            s.push_str(&format!("bridge = {b}\n"));
        }
        s
    }
}

fn q_text(x: &BigRational) -> String {
    format!("({x})")
}

/// Builtin names, for listings.
pub const BUILTIN_NAMES: [&str; 11] = [
    "KT1",
    "KT2",
    "KT3",
    "KT4",
    "MELZAK",
    "BD_D(x)",
    "ADAMCHIK_E(x)",
    "ADAMCHIK_P5(x)",
    "GS53R",
    "GS55R",
    "HOLCOMBE",
];

/// Parses `NAME` or `NAME(x)` with a decimal or `a/b` argument.
pub fn parse_builtin_call(text: &str) -> Result<(String, Option<BigRational>)> {
    let t = text.trim();
    let Some(open) = t.find('(') else {
        return Ok((t.to_ascii_uppercase(), None));
    };
    let inner = t[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::UnknownName(text.to_string()))?;
    let arg = parse_rational_arg(inner).ok_or_else(|| Error::Spec(format!("bad argument `{inner}`")))?;
    Ok((t[..open].trim().to_ascii_uppercase(), Some(arg)))
}

pub fn parse_rational_arg(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r.trim()),
        None => (false, t),
    };
    let q = match t.split_once('/') {
        Some((a, b)) => {
            let d = parse_decimal(b.trim())?;
            if d.is_zero() {
                return None;
            }
            parse_decimal(a.trim())? / d
        }
        None => parse_decimal(t)?,
    };
    Some(if neg { -q } else { q })
}

/// The named products, with `x` for the parameterized ones.
pub fn builtin_with(name: &str, x: Option<&BigRational>) -> Result<BridgedProductSpec> {
    let upper = name.to_ascii_uppercase();
    let need_x = || x.ok_or_else(|| Error::Spec(format!("{upper} needs an argument x")));
    let label = |x: &BigRational| format!("{upper}({x})");
    match upper.as_str() {
        "KT1" => BridgedProductSpec::new("KT1", "1 - 1/(k+1)", "k*(k+1)/2*(-1)^k", UpperIndex::TwoNPlusOne)?
            .with_e_exponent("-1/4"),
        "KT2" => BridgedProductSpec::new("KT2", "1 - 1/(k+1)", "k*(k+1)/2*(-1)^k", UpperIndex::TwoN)?
            .with_e_exponent("1/4"),
        "KT3" => BridgedProductSpec::new("KT3", "1 - 2/(2*k+1)", "k*(-1)^k", UpperIndex::TwoN),
        "KT4" => BridgedProductSpec::new("KT4", "1 - 2/(2*k+1)", "k*(-1)^k", UpperIndex::TwoNPlusOne),
        "MELZAK" => BridgedProductSpec::new("MELZAK", "1 + 2/k", "k*(-1)^(k+1)", UpperIndex::TwoNPlusOne),
        "BD_D" => {
            let x = need_x()?;
            if *x <= -BigRational::one() {
                return Err(Error::Domain(format!("BD_D needs x > -1, got {x}")));
            }
            BridgedProductSpec::new(&label(x), &format!("1 + {}/k", q_text(x)), "k*(-1)^(k+1)", UpperIndex::TwoNPlusOne)
        }
        "ADAMCHIK_E" => {
            let x = need_x()?;
            let two_x = (x * BigRational::from_integer(2.into())).abs();
            let k_start = if two_x >= BigRational::one() { 2 } else { 1 };
            if BigRational::from_integer(k_start.into()) <= two_x {
                return Err(Error::Domain(format!(
                    "ADAMCHIK_E({x}): factor 1 - 4x^2/k^2 is not positive for every k >= {k_start}"
                )));
            }
            let mut s = BridgedProductSpec::new(
                &label(x),
                &format!("1 - 4*{}^2/k^2", q_text(x)),
                "-k^2*(-1)^k",
                UpperIndex::TwoN,
            )?;
            s.k_start = k_start;
            Ok(s)
        }
        "ADAMCHIK_P5" => {
            let x = need_x()?;
            if *x <= BigRational::new((-1).into(), 2.into()) {
                return Err(Error::Domain(format!("ADAMCHIK_P5 needs x > -1/2, got {x}")));
            }
            BridgedProductSpec::new(&label(x), &format!("1 + 2*{}/k", q_text(x)), "-k*(-1)^k", UpperIndex::TwoN)
        }
        "GS53R" => {
            let mut s = BridgedProductSpec::new("GS53R", "k", "k^2*(-1)^k", UpperIndex::TwoN)?;
            s.power = 4;
            s.bridge = Some(Bridge::parse("(2*n+2)^(n*(4*n+5)); (2*n+1)^(-n*(12*n+9))")?);
            Ok(s)
        }
        "GS55R" => {
            let mut s = BridgedProductSpec::new("GS55R", "2*k-1", "(2*k-1)*(-1)^k", UpperIndex::TwoN)?;
            s.power = 2;
            s.bridge = Some(Bridge::parse("(4*n+3)^(2*n+1); (4*n+1)^(-(6*n+1))")?);
            Ok(s)
        }
        "HOLCOMBE" => {
            let mut s = BridgedProductSpec::new("HOLCOMBE", "(k^2-1)/k^2", "k^2", UpperIndex::NPlus(0))?
                .with_e_exponent("1")?;
            s.k_start = 2;
            s.bridge = Some(Bridge::parse("e^(3/2)")?);
            Ok(s)
        }
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// `builtin("KT3")`, `builtin("BD_D(1/2)")`.
pub fn builtin(text: &str) -> Result<BridgedProductSpec> {
    let (name, x) = parse_builtin_call(text)?;
    let takes_x = matches!(name.as_str(), "BD_D" | "ADAMCHIK_E" | "ADAMCHIK_P5");
    if x.is_some() && !takes_x {
        return Err(Error::Spec(format!("{name} takes no argument")));
    }
    builtin_with(&name, x.as_ref())
}
