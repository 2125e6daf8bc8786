//! Line-oriented metric and field files.
//!
//! ```text
//! # comment
//! dim = 2
//! coord 0 = theta
//! coord 1 = phi
//! domain 0 = 0.4 2.7
//! domain 1 = -3 3
//! const R = 1.5
//! g 0 0 = R^2
//! g 1 1 = R^2*sin(theta)^2
//! ```
//!
//! Field files share the syntax and start with `kind = ...`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dsl::{parse, Bindings, Expr};
use crate::fields::{ConcircularCandidate, SinyukovSolution};
use crate::geometry::{BilinearField, CovectorField, ExprMatrix, Interval, MetricChart};
use crate::{Error, Result};

struct Line<'a> {
    number: usize,
    key: Vec<&'a str>,
    value: &'a str,
}

fn lines(text: &str) -> Result<Vec<Line<'_>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Format {
            line: number,
            message: "expected `KEY = VALUE`".into(),
        })?;
        out.push(Line {
            number,
            key: key.split_whitespace().collect(),
            value: value.trim(),
        });
    }
    Ok(out)
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn index(line: &Line, s: &str, n: usize) -> Result<usize> {
    let i: usize = s
        .parse()
        .map_err(|_| err(line.number, format!("`{s}` is not an index")))?;
    if i >= n {
        return Err(err(line.number, format!("index {i} out of range for dimension {n}")));
    }
    Ok(i)
}

fn real(line: &Line, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| err(line.number, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(err(line.number, "number must be finite"));
    }
    Ok(v)
}

fn expr(line: &Line) -> Result<Expr> {
    parse(line.value).map_err(|e| err(line.number, format!("in `{}`: {e}", line.value)))
}

/// Collects symmetric matrix entries; `(i, j)` and `(j, i)` may both be set
/// only to the same expression.
struct SymmetricEntries {
    n: usize,
    entries: BTreeMap<(usize, usize), Expr>,
}

impl SymmetricEntries {
    fn new(n: usize) -> Self {
        SymmetricEntries {
            n,
            entries: BTreeMap::new(),
        }
    }

    fn set(&mut self, line: &Line, i: usize, j: usize, e: Expr) -> Result<()> {
        let key = (i.min(j), i.max(j));
        if let Some(old) = self.entries.get(&key) {
            if *old != e || i == j {
                return Err(err(
                    line.number,
                    format!("entry ({i}, {j}) conflicts with an earlier assignment"),
                ));
            }
        }
        self.entries.insert(key, e);
        Ok(())
    }

    fn build(self) -> ExprMatrix {
        let mut m = ExprMatrix::zeros(self.n);
        for ((i, j), e) in self.entries {
            m.set(i, j, e.clone());
            m.set(j, i, e);
        }
        m
    }
}

pub fn parse_metric(text: &str) -> Result<MetricChart> {
    let lines = lines(text)?;
    let dim_line = lines
        .iter()
        .find(|l| l.key == ["dim"])
        .ok_or_else(|| err(0, "missing `dim = N`"))?;
    let n: usize = dim_line
        .value
        .parse()
        .map_err(|_| err(dim_line.number, "dimension must be a positive integer"))?;
    if n < 2 {
        return Err(err(dim_line.number, "dimension must be at least 2"));
    }
    let mut coords: Vec<Option<String>> = vec![None; n];
    let mut domain: Vec<Option<Interval>> = vec![None; n];
    let mut bindings = Bindings::new();
    let mut metric = SymmetricEntries::new(n);
    let mut seen_dim = false;
    for line in &lines {
        match line.key.as_slice() {
            ["dim"] => {
                if seen_dim {
                    return Err(err(line.number, "`dim` given twice"));
                }
                seen_dim = true;
            }
            ["coord", i] => {
                let i = index(line, i, n)?;
                let name = line.value;
                let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid {
                    return Err(err(line.number, format!("`{name}` is not an identifier")));
                }
                if coords[i].replace(name.to_string()).is_some() {
                    return Err(err(line.number, format!("coordinate {i} given twice")));
                }
            }
            ["domain", i] => {
                let i = index(line, i, n)?;
                let parts: Vec<&str> = line.value.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(err(line.number, "expected `domain I = LO HI`"));
                }
                let (lo, hi) = (real(line, parts[0])?, real(line, parts[1])?);
                if lo >= hi {
                    return Err(err(line.number, "domain needs LO < HI"));
                }
                if domain[i].replace(Interval::new(lo, hi)).is_some() {
                    return Err(err(line.number, format!("domain {i} given twice")));
                }
            }
            ["const", name] => {
                let v = real(line, line.value)?;
                if bindings.insert(name.to_string(), v).is_some() {
                    return Err(err(line.number, format!("constant `{name}` given twice")));
                }
            }
            ["g", i, j] => {
                let (i, j) = (index(line, i, n)?, index(line, j, n)?);
                metric.set(line, i, j, expr(line)?)?;
            }
            other => {
                return Err(err(line.number, format!("unknown key `{}`", other.join(" "))));
            }
        }
    }
    let coords = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| err(0, format!("missing `coord {i}`"))))
        .collect::<Result<Vec<_>>>()?;
    let domain = domain
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| err(0, format!("missing `domain {i}`"))))
        .collect::<Result<Vec<_>>>()?;
    MetricChart::new(coords, domain, metric.build(), bindings)
}

/// Contents of a field file.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldFile {
    Concircular(ConcircularCandidate),
    Sinyukov(SinyukovSolution),
    Covector(CovectorField),
    /// Raw lifted form on a cone chart.
    SinyukovLifted(BilinearField),
}

impl FieldFile {
    pub fn kind(&self) -> &'static str {
        match self {
            FieldFile::Concircular(_) => "concircular",
            FieldFile::Sinyukov(_) => "sinyukov",
            FieldFile::Covector(_) => "covector",
            FieldFile::SinyukovLifted(_) => "sinyukov-lifted",
        }
    }
}

/// Parses a field file against `chart`, whose dimension fixes the component
/// count and whose coordinates and constants bind the expressions.
pub fn parse_field(text: &str, chart: &MetricChart) -> Result<FieldFile> {
    let n = chart.dim();
    let lines = lines(text)?;
    let kind_line = lines
        .iter()
        .find(|l| l.key == ["kind"])
        .ok_or_else(|| err(0, "missing `kind = ...`"))?;
    let kind = kind_line.value;
    let mut vector: Vec<Option<Expr>> = vec![None; n];
    let mut matrix = SymmetricEntries::new(n);
    let mut scalar: Option<Expr> = None;
    let mut k: Option<f64> = None;
    let (vec_key, scalar_key, has_matrix, has_k) = match kind {
        "concircular" => ("phi", Some("rho"), false, true),
        "sinyukov" => ("lambda", Some("mu"), true, true),
        "covector" => ("w", None, false, false),
        "sinyukov-lifted" => ("", None, true, false),
        other => return Err(err(kind_line.number, format!("unknown kind `{other}`"))),
    };
    for line in &lines {
        match line.key.as_slice() {
            ["kind"] => {
                if line.number != kind_line.number {
                    return Err(err(line.number, "`kind` given twice"));
                }
            }
            ["K"] if has_k => {
                if k.replace(real(line, line.value)?).is_some() {
                    return Err(err(line.number, "`K` given twice"));
                }
            }
            [key, i] if *key == vec_key && !vec_key.is_empty() => {
                let i = index(line, i, n)?;
                if vector[i].replace(expr(line)?).is_some() {
                    return Err(err(line.number, format!("component {i} given twice")));
                }
            }
            ["a", i, j] if has_matrix => {
                let (i, j) = (index(line, i, n)?, index(line, j, n)?);
                matrix.set(line, i, j, expr(line)?)?;
            }
            [key] if Some(*key) == scalar_key => {
                if scalar.replace(expr(line)?).is_some() {
                    return Err(err(line.number, format!("`{key}` given twice")));
                }
            }
            other => {
                return Err(err(
                    line.number,
                    format!("key `{}` not valid for kind `{kind}`", other.join(" ")),
                ));
            }
        }
    }
    let vector = CovectorField::new(vector.into_iter().map(|e| e.unwrap_or_else(Expr::zero)).collect());
    let scalar = match (scalar_key, scalar) {
        (Some(key), None) => return Err(err(0, format!("missing `{key} = ...`"))),
        (_, s) => s.unwrap_or_else(Expr::zero),
    };
    let out = match kind {
        "concircular" => FieldFile::Concircular(ConcircularCandidate::new(vector, scalar, k)),
        "sinyukov" => FieldFile::Sinyukov(SinyukovSolution::new(
            BilinearField::new(matrix.build()),
            vector,
            scalar,
            k,
        )),
        "covector" => FieldFile::Covector(vector),
        _ => FieldFile::SinyukovLifted(BilinearField::new(matrix.build())),
    };
    match &out {
        FieldFile::Concircular(c) => c.check(chart)?,
        FieldFile::Sinyukov(s) => s.check(chart)?,
        FieldFile::Covector(w) => w.check(chart)?,
        FieldFile::SinyukovLifted(a) => a.check(chart)?,
    }
    Ok(out)
}

fn comment_block(out: &mut String, comment: &str) {
    for line in comment.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
}

pub fn write_metric(chart: &MetricChart, comment: &str) -> String {
    let mut out = String::new();
    comment_block(&mut out, comment);
    let n = chart.dim();
    let _ = writeln!(out, "dim = {n}");
    for (i, c) in chart.coords().iter().enumerate() {
        let _ = writeln!(out, "coord {i} = {c}");
    }
    for (i, d) in chart.domain().iter().enumerate() {
        let _ = writeln!(out, "domain {i} = {:?} {:?}", d.lo, d.hi);
    }
    for (name, v) in chart.bindings() {
        let _ = writeln!(out, "const {name} = {v:?}");
    }
    for i in 0..n {
        for j in i..n {
            let e = chart.metric().get(i, j);
            if !e.is_zero() {
                let _ = writeln!(out, "g {i} {j} = {e}");
            }
        }
    }
    out
}

fn write_matrix(out: &mut String, m: &ExprMatrix) {
    let n = m.dim();
    for i in 0..n {
        for j in i..n {
            let e = m.get(i, j);
            if !e.is_zero() {
                let _ = writeln!(out, "a {i} {j} = {e}");
            }
        }
    }
}

pub fn write_field(field: &FieldFile, comment: &str) -> String {
    let mut out = String::new();
    comment_block(&mut out, comment);
    let _ = writeln!(out, "kind = {}", field.kind());
    let vector = |out: &mut String, key: &str, v: &CovectorField| {
        for (i, e) in v.comps.iter().enumerate() {
            if !e.is_zero() {
                let _ = writeln!(out, "{key} {i} = {e}");
            }
        }
    };
    match field {
        FieldFile::Concircular(c) => {
            vector(&mut out, "phi", &c.phi);
            let _ = writeln!(out, "rho = {}", c.rho);
            if let Some(k) = c.k {
                let _ = writeln!(out, "K = {k:?}");
            }
        }
        FieldFile::Sinyukov(s) => {
            write_matrix(&mut out, &s.a.comps);
            vector(&mut out, "lambda", &s.lambda);
            let _ = writeln!(out, "mu = {}", s.mu);
            if let Some(k) = s.k {
                let _ = writeln!(out, "K = {k:?}");
            }
        }
        FieldFile::Covector(w) => vector(&mut out, "w", w),
        FieldFile::SinyukovLifted(a) => write_matrix(&mut out, &a.comps),
    }
    out
}
