//! Tokenizer and recursive-descent parser for the component expression language.
//!
//! ```text
//! expr   := term { ("+"|"-") term }
//! term   := unary { ("*"|"/") unary }
//! unary  := "-" unary | power
//! power  := atom [ "^" unary ]
//! atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! reads as `-(x^2)` and `2^-x` as `2^(-x)`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::expr::{Expr, Func};

const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("number out of range at byte {offset}")]
    NumberRange { offset: usize },
    #[error("expression nested too deeply at byte {offset}")]
    TooDeep { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::NumberRange { offset }
            | ParseError::TooDeep { offset } => *offset,
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(ParseError::Syntax {
                            offset: i,
                            expected: vec!["digit"],
                            found: found_at(src, i),
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let v: f64 = src[start..i]
                    .parse()
                    .map_err(|_| ParseError::NumberRange { offset: start })?;
                if !v.is_finite() {
                    return Err(ParseError::NumberRange { offset: start });
                }
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number", "identifier", "operator", "`(`", "`)`"],
                    found: found_at(src, start),
                })
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, bytes.len()));
    Ok(out)
}

fn found_at(src: &str, offset: usize) -> String {
    match src.get(offset..).and_then(|s| s.chars().next()) {
        Some(c) => format!("{c:?}"),
        None if offset >= src.len() => "end of input".to_string(),
        None => "invalid byte".to_string(),
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().to_string(),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep {
                offset: self.offset(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            self.enter()?;
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Pow(Arc::new(base), Arc::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { offset, name })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Arc::new(arg)));
                }
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                if Func::from_name(&name).is_some() {
                    return Err(self.error(vec!["`(`"]));
                }
                Ok(Expr::Var(Arc::from(name.as_str())))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            _ => Err(self.error(vec!["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec!["`)`", "operator"]))
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(vec!["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::expr::Bindings;

    fn num(v: f64) -> Arc<Expr> {
        Arc::new(Expr::Num(v))
    }

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0").unwrap(), Expr::Num(0.0));
    }

    #[test]
    fn power_of_call() {
        let e = parse("sin(theta)^2").unwrap();
        let expected = Expr::Pow(
            Arc::new(Expr::Call(Func::Sin, Arc::new(Expr::var("theta")))),
            num(2.0),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn unary_minus_binds_below_caret() {
        let e = parse("-x^2").unwrap();
        assert_eq!(
            e,
            Expr::Neg(Arc::new(Expr::Pow(Arc::new(Expr::var("x")), num(2.0))))
        );
        let e = parse("2^-x^2").unwrap();
        assert_eq!(
            e,
            Expr::Pow(
                num(2.0),
                Arc::new(Expr::Neg(Arc::new(Expr::Pow(
                    Arc::new(Expr::var("x")),
                    num(2.0)
                ))))
            )
        );
    }

    #[test]
    fn caret_is_right_associative_and_ops_left() {
        let mut b = Bindings::new();
        b.insert("x".into(), 2.0);
        assert_eq!(parse("2^3^2").unwrap().eval(&b).unwrap(), 512.0);
        assert_eq!(parse("8/4/2").unwrap().eval(&b).unwrap(), 1.0);
        assert_eq!(parse("8-4-2").unwrap().eval(&b).unwrap(), 2.0);
        assert_eq!(parse("1+2*3").unwrap().eval(&b).unwrap(), 7.0);
        assert_eq!(parse(" -x * 3 ").unwrap().eval(&b).unwrap(), -6.0);
    }

    #[test]
    fn named_constant_is_a_plain_variable() {
        let e = parse("-x0*exp(2*K0*x0)").unwrap();
        let mut b = Bindings::new();
        b.insert("K0".into(), 1.5);
        b.insert("x0".into(), 0.0);
        assert_eq!(e.eval(&b).unwrap(), 0.0);
    }

    #[test]
    fn numbers_with_fraction_and_exponent() {
        let b = Bindings::new();
        assert_eq!(parse("2e-3").unwrap().eval(&b).unwrap(), 2e-3);
        assert_eq!(parse("0.5E+1").unwrap().eval(&b).unwrap(), 5.0);
        assert!(parse("1.").is_err());
        assert!(matches!(
            parse("1e999"),
            Err(ParseError::NumberRange { offset: 0 })
        ));
    }

    #[test]
    fn errors_carry_offsets() {
        match parse("1 + * 2") {
            Err(ParseError::Syntax {
                offset, expected, ..
            }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"number"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse("foo(x)"),
            Err(ParseError::UnknownFunction {
                offset: 0,
                name: "foo".into()
            })
        );
        assert_eq!(parse("(x").unwrap_err().offset(), 2);
        assert_eq!(parse("x)").unwrap_err().offset(), 1);
        assert!(parse("sin").is_err());
        assert!(parse("").is_err());
        assert!(parse("x $ y").is_err());
        assert!(parse("é").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(matches!(parse(&src), Err(ParseError::TooDeep { .. })));
        let src = "-".repeat(10_000) + "x";
        assert!(matches!(parse(&src), Err(ParseError::TooDeep { .. })));
        let src = "x^".repeat(10_000) + "x";
        assert!(matches!(parse(&src), Err(ParseError::TooDeep { .. })));
    }

    #[test]
    fn pi_is_a_constant() {
        let e = parse("sin(pi/2)^2").unwrap();
        assert_eq!(e.eval(&Bindings::new()).unwrap(), 1.0);
    }
}
