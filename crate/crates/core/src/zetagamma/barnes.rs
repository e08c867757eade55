//! Barnes G by its Taylor series at 1 and the functional equation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;

use super::gamma::{half_ln_two_pi, ln_gamma};
use super::hurwitz::zeta_ints_fixed;
use crate::constants::{constant, ConstantId};
use crate::error::{Error, Result};
use crate::numkernel::Real;

type ZetaTable = OnceLock<Mutex<HashMap<u32, Arc<Vec<BigInt>>>>>;

static ZETA_INTS: ZetaTable = OnceLock::new();

fn zeta_ints(k_max: usize, w: u32) -> Arc<Vec<BigInt>> {
    let map = ZETA_INTS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("zeta table poisoned").get(&w) {
        if v.len() > k_max {
            return v.clone();
        }
    }
    let v = Arc::new(zeta_ints_fixed(k_max, w));
    map.lock()
        .expect("zeta table poisoned")
        .insert(w, v.clone());
    v
}

/// `ln G(1+z)` for `|z| <= 1/2`:
/// `z(ln 2π − 1)/2 − (1+γ)z²/2 + Σ_{k≥3} (−1)^{k−1} ζ(k−1) z^k / k`.
fn ln_g_taylor(z: &Real, w: u32) -> Result<Real> {
    if z.is_zero() {
        return Ok(Real::zero(w));
    }
    let z = z.with_prec(w);
    let one = Real::one(w);
    let gamma_e = constant(ConstantId::EulerGamma, w)?;
    let mut acc = &(&z * &(&half_ln_two_pi(w) - &one.mul_2exp(-1)))
        - &(&(&one + &gamma_e) * &(&z * &z)).mul_2exp(-1);
    let zb = -z.log2_abs();
    let k_max = ((w as f64 + 8.0) / zb.max(1.0)).ceil() as usize + 4;
    let zetas = zeta_ints(k_max, w);
    let mut zk = &(&z * &z) * &z;
    for k in 3..=k_max {
        let zeta = Real::from_fixed(zetas[k - 1].clone(), w, w);
        let term = &(&zeta * &zk) / &Real::from_int(k as u64, w);
        if k % 2 == 1 {
            acc = &acc + &term;
        } else {
            acc = &acc - &term;
        }
        if term.log2_abs() < -(w as f64) - 4.0 {
            break;
        }
        zk = &zk * &z;
    }
    Ok(acc)
}

/// `ln G(x)` for `x > 0`.
pub fn ln_barnes_g(x: &Real, p: u32) -> Result<Real> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("ln G needs x > 0, got {x}")));
    }
    if x.top() > 24 {
        return Err(Error::Range(format!("ln G argument {x} too large")));
    }
    let xf = x.to_f64();
    let m = (xf - 0.5).floor() as i64;
    let w = p + 32 + 2 * (64 - m.unsigned_abs().leading_zeros()) + xf.log2().max(0.0) as u32 * 2;
    let xw = x.with_prec(w);
    if m < 0 {
        // x ∈ (0, 1/2): G(x) = G(x+1)/Γ(x)
        let y = &xw + &Real::one(w);
        let v = &ln_g_taylor(&(&y - &Real::one(w)), w)? - &ln_gamma(&xw, w)?;
        return Ok(v.with_prec(p));
    }
    // x = y + m with y ∈ [1/2, 3/2):
    // ln G(y+m) = ln G(y) + m lnΓ(y) + ln Π_{i=1}^{m−1} Π_{l<i} (y+l)
    let y = &xw - &Real::from_int(m, w);
    let mut acc = ln_g_taylor(&(&y - &Real::one(w)), w)?;
    if m > 0 {
        acc = &acc + &(&ln_gamma(&y, w)? * &Real::from_int(m, w));
        let mut p_i = Real::one(w);
        let mut q = Real::one(w);
        for i in 1..m {
            p_i = &p_i * &(&y + &Real::from_int(i - 1, w));
            q = &q * &p_i;
        }
        acc = &acc + &q.ln();
    }
    Ok(acc.with_prec(p))
}

/// `G(x)`; a value too large to exponentiate is a range error.
pub fn barnes_g(x: &Real, p: u32) -> Result<Real> {
    let lg = ln_barnes_g(x, p + 16 + x.top().max(0) as u32 * 3)?;
    if lg.top() > 40 {
        return Err(Error::Range(format!("G({x}) overflows")));
    }
    Ok(lg.exp().with_prec(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{agreement_digits, rational, to_real};
    use crate::zetagamma::{hurwitz_zeta_sderiv, zeta_deriv, HurwitzQuery};

    fn r(n: i64, d: i64, p: u32) -> Real {
        to_real(&rational(n, d), p)
    }

    #[test]
    fn integer_points() {
        let p = 160;
        for n in 1..=3 {
            let v = ln_barnes_g(&r(n, 1, p), p).unwrap();
            assert!(v.is_zero() || v.log2_abs() < -150.0, "n = {n}");
        }
        // G(5) = 1!·2!·3! = 12
        let g5 = barnes_g(&r(5, 1, p), p).unwrap();
        assert!(agreement_digits(&g5, &r(12, 1, p)).at_least(45));
    }

    #[test]
    fn choi_srivastava_ratio() {
        let p = 200;
        let v = &(&ln_barnes_g(&r(3, 4, p), p).unwrap() - &ln_barnes_g(&r(1, 4, p), p).unwrap())
            - &ln_gamma(&r(1, 4, p), p).unwrap();
        assert_eq!(
            v.exp().to_decimal(45),
            "0.796884589347369433650621690221798253125022553"
        );
    }

    #[test]
    fn hurwitz_derivative_identity() {
        // ln G(1+z) = z lnΓ(z) + ζ'(−1) − ζ'(−1, z)
        let p = 160;
        for (n, d) in [(1, 3), (7, 10), (5, 4), (9, 4)] {
            let z = r(n, d, p);
            let lhs = ln_barnes_g(&(&z + &Real::one(p)), p).unwrap();
            let dz = hurwitz_zeta_sderiv(&HurwitzQuery::new(r(-1, 1, p), z.clone()).unwrap(), p)
                .unwrap();
            let rhs = &(&(&z * &ln_gamma(&z, p).unwrap()) + &zeta_deriv(&r(-1, 1, p), p).unwrap())
                - &dz;
            assert!(agreement_digits(&lhs, &rhs).at_least(44), "z = {n}/{d}");
        }
    }

    #[test]
    fn domain() {
        assert!(matches!(ln_barnes_g(&Real::zero(64), 64), Err(Error::Domain(_))));
    }
}
