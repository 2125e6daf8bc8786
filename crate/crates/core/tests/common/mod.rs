//! Helpers shared by the integration tests.
#![allow(dead_code)]

use conlab_core::catalog::{entry, NAMES};
use conlab_core::cone::{lift_solution_raw, ConeSpace, DEFAULT_X0_DOMAIN};
use conlab_core::dsl::{central_difference, differentiate, Expr, PointEnv};
use conlab_core::fields::{log_det_potential, solution_from_metrics, GeodesicPair, SinyukovSolution};
use conlab_core::files::FieldFile;
use conlab_core::geometry::{random_points, MetricChart};
use conlab_core::jordan::product_expr;

/// A chart together with expressions written in its coordinates.
pub struct ExprSet {
    pub label: String,
    pub chart: MetricChart,
    pub exprs: Vec<Expr>,
}

fn solution_exprs(s: &SinyukovSolution) -> Vec<Expr> {
    let mut v: Vec<Expr> = s.a.comps.entries().to_vec();
    v.extend(s.lambda.comps.iter().cloned());
    v.push(s.mu.clone());
    v
}

/// Every expression of every catalog file, plus the derived expressions the
/// library builds symbolically: inverse metrics, the log-determinant
/// potential and mapped solution, Jordan products and cone lifts.
pub fn catalog_expressions() -> Vec<ExprSet> {
    let mut out = Vec::new();
    for name in NAMES {
        let e = entry(name).unwrap();
        let charts: Vec<(String, MetricChart)> = e
            .files
            .iter()
            .filter(|f| f.name.ends_with(".metric"))
            .map(|f| (f.name.clone(), e.metric(&f.name).unwrap()))
            .collect();
        for (label, chart) in &charts {
            let mut exprs = chart.metric().entries().to_vec();
            let (inv, det) = chart.symbolic_inverse();
            exprs.extend(inv.entries().iter().cloned());
            exprs.push(det.clone());
            out.push(ExprSet { label: format!("{name}/{label}"), chart: chart.clone(), exprs });
        }
        for f in e.files.iter().filter(|f| !f.name.ends_with(".metric") && !f.name.ends_with(".json")) {
            let (chart, field) = charts
                .iter()
                .find_map(|(_, c)| e.field(&f.name, c).ok().map(|fld| (c.clone(), fld)))
                .unwrap_or_else(|| panic!("{} parses against no chart", f.name));
            let exprs = match field {
                FieldFile::Concircular(c) => {
                    let mut v = c.phi.comps.clone();
                    v.push(c.rho);
                    v
                }
                FieldFile::Sinyukov(s) => solution_exprs(&s),
                FieldFile::Covector(w) => w.comps,
                FieldFile::SinyukovLifted(a) => a.comps.entries().to_vec(),
            };
            out.push(ExprSet { label: format!("{name}/{}", f.name), chart, exprs });
        }
    }

    let klein = entry("klein2").unwrap();
    let pair = GeodesicPair::new(
        &klein.metric("flat2.metric").unwrap(),
        &klein.metric("klein2.metric").unwrap(),
    )
    .unwrap();
    let mut exprs = solution_exprs(&solution_from_metrics(&pair).unwrap());
    exprs.push(log_det_potential(&pair));
    out.push(ExprSet { label: "flat2/klein2 mapping".into(), chart: pair.g.clone(), exprs });

    let sphere = entry("sphere2").unwrap();
    let chart = sphere.metric("sphere2.metric").unwrap();
    let s1 = sphere.solution("sphere2.sol", &chart).unwrap();
    let s2 = sphere.solution("sphere2-b.sol", &chart).unwrap();
    let product = product_expr(&chart, -1.0, &s1, &s2);
    out.push(ExprSet { label: "sphere2 product".into(), chart: chart.clone(), exprs: solution_exprs(&product) });
    let cone = ConeSpace::build(&chart, -1.0, DEFAULT_X0_DOMAIN, false).unwrap();
    let mut exprs = cone.chart().metric().entries().to_vec();
    exprs.extend(lift_solution_raw(&cone, &s1).comps.entries().iter().cloned());
    out.push(ExprSet { label: "sphere2 cone".into(), chart: cone.chart().clone(), exprs });
    out
}

/// Points strictly inside the chart box (5% inset).
pub fn inner_points(chart: &MetricChart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let boxed: Vec<_> = chart
        .domain()
        .iter()
        .map(|iv| {
            let m = 0.05 * (iv.hi - iv.lo);
            conlab_core::geometry::Interval::new(iv.lo + m, iv.hi - m)
        })
        .collect();
    random_points(&boxed, count, seed)
}

pub fn eval_at(chart: &MetricChart, e: &Expr, p: &[f64]) -> f64 {
    e.eval(&PointEnv { coords: chart.coords(), point: p, bindings: chart.bindings() }).unwrap()
}

/// Largest relative disagreement `|∂e − FD| / max(1, |FD|)` over the
/// expressions and points, with the FD step `h`.
pub fn fd_disagreement(set: &ExprSet, points: &[Vec<f64>], h: f64) -> f64 {
    let coords = set.chart.coords();
    let mut worst: f64 = 0.0;
    for e in &set.exprs {
        for (k, var) in coords.iter().enumerate() {
            let d = differentiate(e, var);
            for p in points {
                let sym = eval_at(&set.chart, &d, p);
                let fd = central_difference(e, coords, set.chart.bindings(), p, k, h).unwrap();
                worst = worst.max((sym - fd).abs() / fd.abs().max(1.0));
            }
        }
    }
    worst
}
