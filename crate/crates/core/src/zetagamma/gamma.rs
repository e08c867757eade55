//! Log-gamma by argument raising and Stirling's series, and the Gauss
//! product-limit formula built on it.

use num_rational::BigRational;
use num_traits::Signed;

use super::bernoulli::even_bernoulli;
use crate::error::{Error, Result};
use crate::numkernel::{to_real, Real};

/// `ln(2π)/2` at `w` bits.
pub(crate) fn half_ln_two_pi(w: u32) -> Real {
    Real::pi(w + 8).mul_2exp(1).ln().mul_2exp(-1).with_prec(w)
}

/// `lnΓ(x)` for `x > 0`.
pub fn ln_gamma(x: &Real, p: u32) -> Result<Real> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("lnΓ needs x > 0, got {x}")));
    }
    if x.top() > 200 {
        return Err(Error::Range(format!("lnΓ argument {x} too large")));
    }
    let xf = x.to_f64();
    let base = p + 40;
    let threshold = (0.2 * base as f64).ceil() + 8.0;
    let m = if xf < threshold { (threshold - xf).ceil() as u64 } else { 0 };
    let zf = xf + m as f64;
    // |lnΓ| can be far larger than one; carry its bits plus the raising product's
    let w = base + zf.log2().max(1.0).ceil() as u32 * 2 + 64 - m.leading_zeros();
    let xw = x.with_prec(w);
    let mut prod = Real::one(w);
    for i in 0..m {
        prod = &prod * &(&xw + &Real::from_int(i, w));
    }
    let z = &xw + &Real::from_int(m, w);
    let lz = z.ln();
    let half = Real::one(w).mul_2exp(-1);
    let mut acc = &(&(&z - &half) * &lz) - &z;
    acc = &acc + &half_ln_two_pi(w);
    // Σ B_2k / (2k(2k−1) z^{2k−1})
    let inv_z2 = (&z * &z).recip();
    let mut t = z.recip();
    let mut k = 1usize;
    loop {
        let bern = even_bernoulli(k);
        let c = &bern[k] / BigRational::from_integer(((2 * k) * (2 * k - 1)).into());
        let term = &to_real(&c, w) * &t;
        acc = &acc + &term;
        if term.log2_abs() < -(w as f64) {
            break;
        }
        t = &t * &inv_z2;
        k += 1;
    }
    if m > 0 {
        acc = &acc - &prod.ln();
    }
    Ok(acc.with_prec(p))
}

pub fn gamma(x: &Real, p: u32) -> Result<Real> {
    if !x.is_positive() {
        if x.to_integer().is_some() {
            return Err(Error::Pole(format!("Γ has a pole at {x}")));
        }
        // reflection: Γ(x) Γ(1−x) = π / sin(πx)
        let w = p + 16 + x.top().max(0) as u32;
        let xw = x.with_prec(w);
        let s = (&Real::pi(w) * &xw).sin();
        let g = gamma(&(&Real::one(w) - &xw), w)?;
        return Ok((&Real::pi(w) / &(&s * &g)).with_prec(p));
    }
    let lg = ln_gamma(x, p + 16 + x.top().max(0) as u32 * 2)?;
    if lg.top() > 40 {
        return Err(Error::Range(format!("Γ({x}) overflows")));
    }
    Ok(lg.exp().with_prec(p))
}

/// Shift lists of a product `Π_{k<n} Π_i (k+a_i) / Π_j (k+b_j)`.
#[derive(Clone, Debug)]
pub struct GaussProductSpec {
    pub numer_shifts: Vec<BigRational>,
    pub denom_shifts: Vec<BigRational>,
}

/// `Π_j Γ(b_j) / Π_i Γ(a_i)`, the limit of the shifted product.
pub fn gauss_product_limit(spec: &GaussProductSpec, p: u32) -> Result<Real> {
    let sum = |v: &[BigRational]| v.iter().fold(BigRational::from_integer(0.into()), |a, b| a + b);
    if sum(&spec.numer_shifts) != sum(&spec.denom_shifts) {
        return Err(Error::Spec(
            "shift sums differ; the product diverges or tends to zero".into(),
        ));
    }
    if spec.numer_shifts.iter().chain(&spec.denom_shifts).any(|s| !s.is_positive()) {
        return Err(Error::Domain("shifts must be positive".into()));
    }
    let w = p + 24;
    let mut acc = Real::zero(w);
    for b in &spec.denom_shifts {
        acc = &acc + &ln_gamma(&to_real(b, w), w)?;
    }
    for a in &spec.numer_shifts {
        acc = &acc - &ln_gamma(&to_real(a, w), w)?;
    }
    Ok(acc.exp().with_prec(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{agreement_digits, rational};

    fn r(n: i64, d: i64, p: u32) -> Real {
        to_real(&rational(n, d), p)
    }

    #[test]
    fn known_values() {
        let p = 200;
        assert!(ln_gamma(&Real::one(p), p).unwrap().log2_abs() < -190.0);
        assert!(ln_gamma(&r(2, 1, p), p).unwrap().log2_abs() < -190.0);
        let half = ln_gamma(&r(1, 2, p), p).unwrap();
        let want = Real::pi(p).sqrt().ln();
        assert!(agreement_digits(&half, &want).at_least(55));
        assert_eq!(
            ln_gamma(&r(1, 4, p), p).unwrap().to_decimal(45),
            "1.28802252469807745737061044021971729592537756"
        );
        assert_eq!(
            gamma(&r(1, 4, p), p).unwrap().to_decimal(45),
            "3.62560990822190831193068515586767200299516768"
        );
        let g5 = gamma(&r(5, 1, p), p).unwrap();
        assert!(agreement_digits(&g5, &r(24, 1, p)).at_least(55));
    }

    #[test]
    fn large_and_small_arguments() {
        let p = 128;
        // lnΓ(101) = ln(100!)
        let mut f = Real::one(p + 32);
        for i in 1..=100u32 {
            f = &f * &Real::from_int(i, p + 32);
        }
        let lg = ln_gamma(&r(101, 1, p), p).unwrap();
        assert!(agreement_digits(&lg, &f.ln()).at_least(36));
        // Γ(x) ~ 1/x − γ near zero
        let x = Real::one(p).mul_2exp(-80);
        let lg = ln_gamma(&x, p).unwrap();
        assert!(agreement_digits(&lg, &-x.ln()).at_least(20));
    }

    #[test]
    fn gauss_limits() {
        let p = 160;
        let spec = GaussProductSpec {
            numer_shifts: vec![rational(1, 2), rational(3, 4)],
            denom_shifts: vec![rational(1, 4), rational(1, 1)],
        };
        assert_eq!(
            gauss_product_limit(&spec, p).unwrap().to_decimal(45),
            "1.66925368334814637256285946559809361798798602"
        );
        let wallis = GaussProductSpec {
            numer_shifts: vec![rational(1, 2), rational(3, 2)],
            denom_shifts: vec![rational(1, 1), rational(1, 1)],
        };
        let v = gauss_product_limit(&wallis, p).unwrap();
        assert!(agreement_digits(&v, &(&r(2, 1, p) / &Real::pi(p))).at_least(45));
        let same = GaussProductSpec {
            numer_shifts: vec![rational(1, 1)],
            denom_shifts: vec![rational(1, 1)],
        };
        assert_eq!(gauss_product_limit(&same, p).unwrap(), Real::one(p));
        let bad = GaussProductSpec {
            numer_shifts: vec![rational(1, 2)],
            denom_shifts: vec![rational(1, 1)],
        };
        assert!(matches!(gauss_product_limit(&bad, p), Err(Error::Spec(_))));
    }

    #[test]
    fn domain() {
        assert!(matches!(ln_gamma(&Real::zero(64), 64), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(&r(-1, 2, 64), 64), Err(Error::Domain(_))));
        assert!(matches!(gamma(&Real::from_int(-2, 64), 64), Err(Error::Pole(_))));
        // Γ(−1/2) = −2√π
        let g = gamma(&r(-1, 2, 128), 128).unwrap();
        let want = -(Real::pi(128).sqrt().mul_2exp(1));
        assert!((&g - &want).abs().log2_abs() < -120.0);
    }
}
