//! Folding constructors, symbolic differentiation and identity simplification.

use std::sync::Arc;

use super::expr::{Bindings, Expr, Func};

fn fold(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Num(v))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => (*inner).clone(),
        a => Expr::Neg(Arc::new(a)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
        if let Some(e) = fold(x + y) {
            return e;
        }
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    if let Expr::Neg(inner) = &b {
        return Expr::Sub(Arc::new(a), inner.clone());
    }
    Expr::Add(Arc::new(a), Arc::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
        if let Some(e) = fold(x - y) {
            return e;
        }
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    Expr::Sub(Arc::new(a), Arc::new(b))
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
        if let Some(e) = fold(x * y) {
            return e;
        }
    }
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if matches!(a, Expr::Num(v) if v == -1.0) {
        return neg(b);
    }
    if matches!(b, Expr::Num(v) if v == -1.0) {
        return neg(a);
    }
    Expr::Mul(Arc::new(a), Arc::new(b))
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
        if y != 0.0 {
            if let Some(e) = fold(x / y) {
                return e;
            }
        }
    }
    if b.is_one() {
        return a;
    }
    // 0/b only folds when b is a known nonzero constant; otherwise a zero
    // denominator must still surface at evaluation time.
    if a.is_zero() && matches!(b, Expr::Num(v) if v != 0.0) {
        return Expr::zero();
    }
    Expr::Div(Arc::new(a), Arc::new(b))
}

pub(crate) fn pow(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
        if !(x < 0.0 && y.fract() != 0.0) && !(x == 0.0 && y < 0.0) {
            if let Some(e) = fold(x.powf(y)) {
                return e;
            }
        }
    }
    if b.is_one() {
        return a;
    }
    if b.is_zero() {
        return Expr::one();
    }
    Expr::Pow(Arc::new(a), Arc::new(b))
}

pub(crate) fn call(f: Func, a: Expr) -> Expr {
    if a.as_num().is_some() {
        let folded = Expr::Call(f, Arc::new(a.clone())).eval(&Bindings::new());
        if let Ok(v) = folded {
            return Expr::Num(v);
        }
    }
    Expr::Call(f, Arc::new(a))
}

/// Constant folding and identity elimination (`x+0`, `x*1`, `x*0`, `x^1`, ...).
/// No canonical form is attempted.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Pi => e.clone(),
        Expr::Neg(a) => neg(simplify(a)),
        Expr::Add(a, b) => add(simplify(a), simplify(b)),
        Expr::Sub(a, b) => sub(simplify(a), simplify(b)),
        Expr::Mul(a, b) => mul(simplify(a), simplify(b)),
        Expr::Div(a, b) => div(simplify(a), simplify(b)),
        Expr::Pow(a, b) => pow(simplify(a), simplify(b)),
        Expr::Call(f, a) => call(*f, simplify(a)),
    }
}

/// Exact symbolic partial derivative with respect to `var`.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e {
        Expr::Num(_) | Expr::Pi => Expr::zero(),
        Expr::Var(v) => {
            if &**v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => neg(differentiate(a, var)),
        Expr::Add(a, b) => add(differentiate(a, var), differentiate(b, var)),
        Expr::Sub(a, b) => sub(differentiate(a, var), differentiate(b, var)),
        Expr::Mul(a, b) => {
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            add(
                mul(differentiate(&a, var), b.clone()),
                mul(a.clone(), differentiate(&b, var)),
            )
        }
        Expr::Div(a, b) => {
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            let da = differentiate(&a, var);
            if !b.depends_on(var) {
                return div(da, b);
            }
            let db = differentiate(&b, var);
            div(
                sub(mul(da, b.clone()), mul(a, db)),
                pow(b, Expr::Num(2.0)),
            )
        }
        Expr::Pow(a, b) => {
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            if !b.depends_on(var) {
                let da = differentiate(&a, var);
                let lowered = pow(a, sub(b.clone(), Expr::one()));
                return mul(mul(b, lowered), da);
            }
            let db = differentiate(&b, var);
            if !a.depends_on(var) {
                return mul(mul(e.clone(), call(Func::Log, a)), db);
            }
            let da = differentiate(&a, var);
            let inner = add(
                mul(db, call(Func::Log, a.clone())),
                div(mul(b, da), a),
            );
            mul(e.clone(), inner)
        }
        Expr::Call(f, a) => {
            let a = a.as_ref().clone();
            let da = differentiate(&a, var);
            let outer = match f {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Tan => div(Expr::one(), pow(call(Func::Cos, a), Expr::Num(2.0))),
                Func::Sinh => call(Func::Cosh, a),
                Func::Cosh => call(Func::Sinh, a),
                Func::Tanh => div(Expr::one(), pow(call(Func::Cosh, a), Expr::Num(2.0))),
                Func::Exp => e.clone(),
                Func::Log => return div(da, a),
                Func::Sqrt => {
                    return div(da, mul(Expr::Num(2.0), e.clone()));
                }
            };
            mul(outer, da)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn at(e: &Expr, pairs: &[(&str, f64)]) -> f64 {
        let b: Bindings = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        e.eval(&b).unwrap()
    }

    fn central(e: &Expr, var: &str, pairs: &[(&str, f64)], h: f64) -> f64 {
        let shift = |d: f64| {
            let b: Bindings = pairs
                .iter()
                .map(|(k, v)| (k.to_string(), if *k == var { v + d } else { *v }))
                .collect();
            e.eval(&b).unwrap()
        };
        (shift(h) - shift(-h)) / (2.0 * h)
    }

    #[test]
    fn derivative_of_sin_squared() {
        let d = differentiate(&parse("sin(theta)^2").unwrap(), "theta");
        let v = at(&d, &[("theta", std::f64::consts::FRAC_PI_4)]);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        assert_eq!(differentiate(&parse("7").unwrap(), "x"), Expr::zero());
    }

    #[test]
    fn derivative_of_exponential_with_binding() {
        let e = parse("exp(2*K*x0)").unwrap();
        let d = differentiate(&e, "x0");
        let pts = [("K", 1.5), ("x0", 0.0)];
        let fd = central(&e, "x0", &pts, 1e-5);
        assert!((fd - 3.0).abs() < 1e-8, "oracle {fd}");
        assert!((at(&d, &pts) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn simplify_identities_and_folding() {
        assert_eq!(simplify(&parse("x*1+0").unwrap()), Expr::var("x"));
        assert_eq!(simplify(&parse("2*3").unwrap()), Expr::Num(6.0));
        assert_eq!(simplify(&parse("x^1 - 0").unwrap()), Expr::var("x"));
        assert_eq!(simplify(&parse("0*sin(y)").unwrap()), Expr::zero());
        // a zero numerator over a non-constant denominator is kept
        assert!(matches!(simplify(&parse("0/x").unwrap()), Expr::Div(..)));
        let d = simplify(&differentiate(&parse("x^2").unwrap(), "x"));
        assert_eq!(at(&d, &[("x", 3.0)]), 6.0);
    }

    #[test]
    fn folding_never_produces_non_finite_literals() {
        let e = simplify(&parse("1e308*10").unwrap());
        assert!(matches!(e, Expr::Mul(..)));
        let e = simplify(&parse("log(0)").unwrap());
        assert!(matches!(e, Expr::Call(Func::Log, _)));
    }

    #[test]
    fn every_rule_matches_central_differences() {
        let sources = [
            "sin(x)*cos(y)",
            "tan(x/2)",
            "sinh(x)+cosh(x*y)",
            "tanh(x-y)",
            "exp(-x^2)",
            "log(2+x*x)",
            "sqrt(3+y^2)",
            "x^y",
            "2^x",
            "x/(1+y^2)",
            "(1-x^2-y^2)^-1.5",
            "-x^3/(2-y)",
            "pi*x",
        ];
        let pts = [("x", 0.37), ("y", -0.61)];
        for src in sources {
            let e = parse(src).unwrap();
            for var in ["x", "y"] {
                let d = differentiate(&e, var);
                let sym = at(&d, &pts);
                let fd = central(&e, var, &pts, 1e-5);
                let scale = sym.abs().max(1.0);
                assert!((sym - fd).abs() / scale < 1e-6, "{src} d/d{var}: {sym} vs {fd}");
            }
        }
    }
}
