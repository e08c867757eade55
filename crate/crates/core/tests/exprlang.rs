use altprod::exprlang::{eval_text, parse};
use altprod::harness::Registry;
use altprod::numkernel::{agreement_digits, rational, to_real};
use altprod::Error;
use proptest::prelude::*;

#[test]
fn precedence() {
    let p = 64;
    assert_eq!(eval_text("2^3^2", p).unwrap(), to_real(&rational(512, 1), p));
    assert_eq!(eval_text("-2^2", p).unwrap(), to_real(&rational(-4, 1), p));
    assert_eq!(eval_text("2*3+4/8", p).unwrap(), to_real(&rational(13, 2), p));
    assert_eq!(eval_text("(1+2)*-3", p).unwrap(), to_real(&rational(-9, 1), p));
}

#[test]
fn registry_right_hand_sides_round_trip() {
    let reg = Registry::embedded();
    for rec in &reg.records {
        let tree = parse(&rec.rhs_text).unwrap_or_else(|d| panic!("{}: {d}", rec.id));
        let again = parse(&tree.to_string()).unwrap();
        assert_eq!(tree, again, "{}", rec.id);
        assert_eq!(again.to_string(), tree.to_string());
    }
}

#[test]
fn rejected_inputs() {
    for (text, offset) in [("2pi", 1), ("1 + foo", 4), ("(1+2", 4), ("gamma(1, 2)", 0), ("", 0)] {
        match parse(text) {
            Err(d) => assert_eq!(d.byte_offset, offset, "{text}: {d}"),
            Ok(t) => panic!("{text} parsed as {t}"),
        }
    }
    assert!(matches!(eval_text("gamma(0)", 64), Err(Error::AtSpan { .. })));
    assert!(matches!(eval_text("exp(10^30)", 64), Err(Error::AtSpan { .. })));
}

#[test]
fn named_values() {
    let p = 200;
    let v = eval_text("barnesG(3/4)/(barnesG(1/4)*gamma(1/4))", p).unwrap();
    let w = eval_text("2^(-1/8)*pi^(-1/4)*exp(catalan/(2*pi))", p).unwrap();
    assert!(agreement_digits(&v, &w).at_least(55));
    let g = eval_text("ln(glaisher) - (1/12 - zeta'(-1))", p);
    assert!(g.is_err(), "derivative syntax is outside the language");
    let h = eval_text("hzeta(2, 1) - pi^2/6", p).unwrap();
    assert!(h.is_zero() || h.log2_abs() < -190.0);
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..1000).prop_map(|n| n.to_string()),
        (0u32..100, 1u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
        prop::sample::select(vec!["pi", "e", "catalan", "glaisher", "zeta3", "eulergamma"]).prop_map(String::from),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (prop::sample::select(vec!["exp", "ln", "sqrt", "gamma", "lngamma", "barnesG", "zeta"]), inner.clone())
                .prop_map(|(f, a)| format!("{f}({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("hzeta({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_is_idempotent(text in expr()) {
        let tree = parse(&text).unwrap();
        let printed = tree.to_string();
        let again = parse(&printed).unwrap();
        prop_assert_eq!(&tree, &again);
        prop_assert_eq!(printed, again.to_string());
    }
}
