use altprod::harness::{Lhs, Registry};
use altprod::numkernel::{agreement_digits, bits_for_digits, rational};
use altprod::products::kexpr::KFunc;
use altprod::products::{
    builtin, limit, log_partial, partial_exact, Bridge, BridgedProductSpec, ExactPartial, LogSession, UpperIndex,
};
use altprod::{BigRational, Real};
use proptest::prelude::*;

fn record_spec(id: &str) -> BridgedProductSpec {
    match &Registry::embedded().get(id).unwrap().lhs {
        Lhs::Product(s) => s.clone(),
        _ => panic!("{id} has no product"),
    }
}

#[test]
fn parity_bridges_are_exact() {
    let (kt1, kt2, kt3, kt4) = (builtin("KT1").unwrap(), builtin("KT2").unwrap(), builtin("KT3").unwrap(), builtin("KT4").unwrap());
    let (bridge_e, alpha) = (record_spec("BRIDGE_E"), record_spec("ALPHA_N"));
    for n in 1..=8 {
        let e = |s: &BridgedProductSpec| partial_exact(s, n).unwrap();
        assert_eq!(e(&kt4), e(&kt3).mul(&e(&bridge_e)), "n = {n}");
        assert_eq!(e(&kt1), e(&kt2).mul(&e(&alpha)), "n = {n}");
    }
}

#[test]
fn kt2_fourth_power_decomposes() {
    let kt2 = builtin("KT2").unwrap();
    let prefactor = record_spec("EN4_PREFACTOR");
    let wallis = record_spec("WALLIS");
    let mut holcombe_core = BridgedProductSpec::new("H", "(k^2-1)/k^2", "-k^2*(-1)^k", UpperIndex::TwoN).unwrap();
    holcombe_core.k_start = 2;
    for n in 1..=6 {
        let lhs = partial_exact(&kt2, n).unwrap().powi(4);
        let rhs = partial_exact(&prefactor, n)
            .unwrap()
            .mul(&partial_exact(&holcombe_core, n).unwrap())
            .mul(&partial_exact(&wallis, n).unwrap());
        // no boundary factors remain
        assert_eq!(lhs, rhs, "n = {n}");
    }
}

#[test]
fn product_form_of_d_matches_bd_d() {
    for x in [rational(1, 1), rational(1, 2), rational(1, 4), rational(3, 7), rational(-2, 5)] {
        let d = altprod::products::builtin_with("BD_D", Some(&x)).unwrap();
        let xt = format!("({}/{})", x.numer(), x.denom());
        let mut form = BridgedProductSpec::new("form", &format!("1 + {xt}/k"), "k*(-1)^(k+1)", UpperIndex::TwoNPlusOne)
            .unwrap()
            .with_e_exponent(&format!("{xt}*(-1)^k"))
            .unwrap();
        form.bridge = Some(Bridge::parse(&format!("e^{xt}")).unwrap());
        for n in 0..=8 {
            assert_eq!(partial_exact(&form, n).unwrap(), partial_exact(&d, n).unwrap(), "x = {x}, n = {n}");
        }
    }
}

#[test]
fn odd_and_even_limits_differ_by_e_powers() {
    let digits = 40;
    let p = bits_for_digits(digits) + 64;
    let lim = |name: &str| limit(&builtin(name).unwrap(), p, digits).unwrap().value;
    let half = Real::from_rational(&rational(1, 2), p).exp();
    let e = Real::one(p).exp();
    assert!(agreement_digits(&lim("KT1"), &(&lim("KT2") * &half)).at_least(digits as i64));
    assert!(agreement_digits(&lim("KT4"), &(&lim("KT3") * &e)).at_least(digits as i64));
}

#[test]
fn first_partials() {
    let kt3 = builtin("KT3").unwrap();
    assert_eq!(
        partial_exact(&kt3, 1).unwrap(),
        ExactPartial {
            rational_part: rational(27, 25),
            e_power: BigRational::from_integer(0.into()),
        }
    );
    let p = 128;
    let lp = log_partial(&kt3, 1, p).unwrap().exp();
    assert!(agreement_digits(&lp, &Real::from_rational(&rational(27, 25), p)).at_least(35));
}

#[test]
fn spec_text_round_trips() {
    for name in ["KT1", "GS53R", "HOLCOMBE", "ADAMCHIK_E(1/2)"] {
        let spec = builtin(name).unwrap();
        let back = BridgedProductSpec::from_text(&spec.to_text()).unwrap();
        for n in 1..=4 {
            assert_eq!(partial_exact(&spec, n).unwrap(), partial_exact(&back, n).unwrap(), "{name}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn incremental_equals_from_scratch(ns in proptest::collection::vec(0i64..80, 1..12), which in 0usize..4) {
        let name = ["KT1", "KT3", "MELZAK", "GS55R"][which];
        let spec = builtin(name).unwrap();
        let session = LogSession::new(&spec);
        let p = 160;
        for n in ns {
            let n = n.max(spec.n0());
            prop_assert_eq!(session.log_partial(n, p).unwrap(), log_partial(&spec, n, p).unwrap());
        }
    }

    #[test]
    fn kfunc_matches_direct_evaluation(a in -20i64..20, b in -20i64..20, c in -20i64..20, alt in proptest::bool::ANY, k in 1i64..200) {
        let text = if alt {
            format!("({a}*k^2 + {b}*k + {c})*(-1)^k")
        } else {
            format!("{a}*k^2 + {b}*k + {c}")
        };
        let f = KFunc::parse(&text, 'k').unwrap();
        let sign = if alt && k % 2 == 1 { -1 } else { 1 };
        prop_assert_eq!(f.eval_int(k).unwrap(), (sign * (a * k * k + b * k + c)).into());
    }
}
