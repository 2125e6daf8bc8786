//! Expression language for metric and field components.
//!
//! Expressions are parsed once, stay immutable, and are evaluated against a
//! point plus named-constant bindings. Symbolic partial derivatives keep the
//! downstream residual checks limited only by floating-point roundoff.

mod diff;
mod expr;
mod parser;

pub use diff::{differentiate, simplify};
pub use expr::{Bindings, DomainErrorKind, Env, EvalError, Expr, Func, PointEnv};
pub use parser::{parse, ParseError};

/// Central finite difference of `e` along coordinate `index` at `point`.
///
/// Test oracle for the symbolic derivatives; never used on the verification path.
pub fn central_difference(
    e: &Expr,
    coords: &[String],
    bindings: &Bindings,
    point: &[f64],
    index: usize,
    h: f64,
) -> Result<f64, EvalError> {
    let mut plus = point.to_vec();
    let mut minus = point.to_vec();
    plus[index] += h;
    minus[index] -= h;
    let f = |p: &[f64]| {
        e.eval(&PointEnv {
            coords,
            point: p,
            bindings,
        })
    };
    Ok((f(&plus)? - f(&minus)?) / (2.0 * h))
}
