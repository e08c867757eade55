use altprod::accel::{LimitOptions, Method};
use altprod::eulerfuncs::{
    d_function, e_function, gamma_ab, gamma_param, phi_sderiv, phi_sderiv_series, DRoute, LerchDerivQuery,
};
use altprod::numkernel::{agreement_digits, bits_for_digits, rational, to_real};
use altprod::Real;
use proptest::prelude::*;

const DIGITS: u32 = 30;

fn p() -> u32 {
    bits_for_digits(DIGITS) + 64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn xia_and_hh_forms_agree(an in 1i64..40, ad in 1i64..16, z in prop_oneof![Just(None), (-80i64..80).prop_map(Some)]) {
        let p = p();
        let alpha = to_real(&rational(an, ad), p);
        let z = match z {
            None => Real::from_int(-1, p),
            Some(c) => to_real(&rational(c, 100), p),
        };
        let inv = &Real::one(p) / &alpha;
        let hh = gamma_ab(&inv, &inv, &z, p, DIGITS).unwrap();
        let xia = gamma_param(&alpha, &z, p, DIGITS).unwrap();
        prop_assert!(agreement_digits(&hh, &xia).at_least(DIGITS as i64 - 2) || (&hh - &xia).abs().log2_abs() < -(p as f64) + 40.0);
    }
}

#[test]
fn d_routes_agree() {
    let p = p();
    for (a, b) in [(1, 4), (1, 2), (1, 1)] {
        let x = to_real(&rational(a, b), p);
        let v: Vec<Real> = DRoute::ALL.iter().map(|r| d_function(&x, *r, p, DIGITS).unwrap()).collect();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                assert!(agreement_digits(&v[i], &v[j]).at_least(DIGITS as i64), "x = {a}/{b}, routes {i} {j}");
            }
        }
    }
}

#[test]
fn e_is_even() {
    let p = p();
    for (a, b) in [(1, 4), (1, 3), (2, 5)] {
        let x = to_real(&rational(a, b), p);
        assert_eq!(e_function(&x, p, DIGITS).unwrap(), e_function(&-x.clone(), p, DIGITS).unwrap());
    }
}

#[test]
fn lerch_routes_agree() {
    let p = p();
    for (s, u) in [(rational(-2, 1), rational(1, 1)), (rational(-1, 1), rational(1, 2))] {
        let q = LerchDerivQuery::new(to_real(&s, p), to_real(&u, p)).unwrap();
        let split = phi_sderiv(&q, p).unwrap();
        let series = phi_sderiv_series(&q, p, DIGITS).unwrap();
        assert!(agreement_digits(&split, &series.value).at_least(25), "s = {s}, u = {u}");
    }
}

#[test]
fn euler_and_wynn_agree_within_their_estimates() {
    let p = p();
    let spec = altprod::products::builtin("BD_D(1/2)").unwrap();
    let run = |m| altprod::products::limit_with(&spec, &LimitOptions::new(m), p, DIGITS).unwrap();
    let (e, w) = (run(Method::Euler), run(Method::Wynn));
    let digits = |x: &Real| -x.to_f64().log10().floor() as i64;
    let need = digits(&e.error_estimate).min(digits(&w.error_estimate)).min(DIGITS as i64);
    assert!(agreement_digits(&e.value, &w.value).at_least(need - 1), "{} vs {}", e.value, w.value);
}
