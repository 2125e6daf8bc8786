mod common;

use std::sync::Arc;

use conlab_core::dsl::{differentiate, parse, simplify, Bindings, Expr, Func, PointEnv};
use proptest::prelude::*;

const COORDS: [&str; 2] = ["x", "y"];

fn eval(e: &Expr, p: &[f64]) -> Option<f64> {
    let coords: Vec<String> = COORDS.iter().map(|s| s.to_string()).collect();
    let b = Bindings::new();
    e.eval(&PointEnv { coords: &coords, point: p, bindings: &b }).ok().filter(|v| v.is_finite())
}

/// Raw trees built from the enum directly, bypassing the folding constructors.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4.0f64..4.0).prop_map(|v| Expr::Num((v * 8.0).round() / 8.0)),
        (1e-3f64..1e3).prop_map(Expr::Num),
        prop::sample::select(COORDS.to_vec()).prop_map(Expr::var),
        Just(Expr::Pi),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let a = || inner.clone().prop_map(Arc::new);
        prop_oneof![
            a().prop_map(Expr::Neg),
            (a(), a()).prop_map(|(x, y)| Expr::Add(x, y)),
            (a(), a()).prop_map(|(x, y)| Expr::Sub(x, y)),
            (a(), a()).prop_map(|(x, y)| Expr::Mul(x, y)),
            (a(), a()).prop_map(|(x, y)| Expr::Div(x, y)),
            (a(), 0i32..4).prop_map(|(x, k)| Expr::Pow(x, Arc::new(Expr::Num(k as f64)))),
            (a(), a()).prop_map(|(x, y)| Expr::Pow(x, y)),
            (prop::sample::select(Func::ALL.to_vec()), a()).prop_map(|(f, x)| Expr::Call(f, x)),
        ]
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, ..ProptestConfig::default() })]

    #[test]
    fn parser_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..48)) {
        let s = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse(&s) {
            prop_assert!(e.offset() <= s.len());
        }
    }

    #[test]
    fn parser_never_panics_on_grammar_soup(s in "[-+*/^() .0-9a-z_e]{0,40}") {
        let _ = parse(&s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_round_trip(e in arb_expr(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        if let (Some(a), Some(b)) = (eval(&e, &[x, y]), eval(&back, &[x, y])) {
            prop_assert!(close(a, b, 1e-12), "{printed}: {a} vs {b}");
        }
    }

    #[test]
    fn simplify_preserves_values(e in arb_expr(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        if let (Some(a), Some(b)) = (eval(&e, &[x, y]), eval(&simplify(&e), &[x, y])) {
            prop_assert!(close(a, b, 1e-12), "{e}: {a} vs {b}");
        }
    }

    #[test]
    fn derivative_is_linear(a in arb_expr(), b in arb_expr(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let sum = Expr::Add(Arc::new(a.clone()), Arc::new(b.clone()));
        let lhs = eval(&differentiate(&sum, "x"), &[x, y]);
        let ra = eval(&differentiate(&a, "x"), &[x, y]);
        let rb = eval(&differentiate(&b, "x"), &[x, y]);
        if let (Some(l), Some(ra), Some(rb)) = (lhs, ra, rb) {
            prop_assert!(close(l, ra + rb, 1e-12), "{l} vs {}", ra + rb);
        }
    }
}

#[test]
fn grammar_examples() {
    assert_eq!(parse("0").unwrap(), Expr::Num(0.0));
    match parse("sin(theta)^2").unwrap() {
        Expr::Pow(base, exp) => {
            assert_eq!(*base, Expr::Call(Func::Sin, Arc::new(Expr::var("theta"))));
            assert_eq!(*exp, Expr::Num(2.0));
        }
        other => panic!("{other:?}"),
    }
    let e = parse("-x0*exp(2*K0*x0)").unwrap();
    let coords = vec!["x0".to_string()];
    let b: Bindings = [("K0".to_string(), 0.7)].into();
    assert_eq!(e.eval(&PointEnv { coords: &coords, point: &[0.0], bindings: &b }).unwrap(), 0.0);
    assert_eq!(eval(&parse("1+2*3").unwrap(), &[0.0, 0.0]), Some(7.0));
    assert_eq!(eval(&parse("-x^2").unwrap(), &[3.0, 0.0]), Some(-9.0));
    let e = parse("exp(2*1*0.5)").unwrap();
    assert!((eval(&e, &[0.0, 0.0]).unwrap() - std::f64::consts::E).abs() < 1e-15);
    assert!(parse("foo(x)").is_err());
    assert!(parse("1 +").is_err());
}

#[test]
fn simplify_examples() {
    assert_eq!(simplify(&parse("x*1+0").unwrap()), Expr::var("x"));
    assert_eq!(simplify(&parse("2*3").unwrap()), Expr::Num(6.0));
    let d = simplify(&differentiate(&parse("x^2").unwrap(), "x"));
    assert_eq!(eval(&d, &[3.0, 0.0]), Some(6.0));
}

#[test]
fn second_derivatives_commute_on_catalog_expressions() {
    for set in common::catalog_expressions() {
        let coords = set.chart.coords().to_vec();
        let pts = common::inner_points(&set.chart, 100, 11);
        for e in &set.exprs {
            for i in 0..coords.len() {
                for j in (i + 1)..coords.len() {
                    let dij = differentiate(&differentiate(e, &coords[i]), &coords[j]);
                    let dji = differentiate(&differentiate(e, &coords[j]), &coords[i]);
                    for p in &pts {
                        let (a, b) = (common::eval_at(&set.chart, &dij, p), common::eval_at(&set.chart, &dji, p));
                        assert!(close(a, b, 1e-12), "{}: {e} at {p:?}: {a} vs {b}", set.label);
                    }
                }
            }
        }
    }
}

#[test]
fn derivatives_match_finite_differences_on_catalog_expressions() {
    for set in common::catalog_expressions() {
        let pts = common::inner_points(&set.chart, 25, 3);
        let d = common::fd_disagreement(&set, &pts, 1e-5);
        assert!(d <= 1e-6, "{}: {d:e}", set.label);
    }
}
