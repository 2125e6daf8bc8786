use conlab_core::catalog::entry;
use conlab_core::cone::{ConeSpace, DEFAULT_X0_DOMAIN};
use conlab_core::fields::{check_sinyukov, SinyukovSolution};
use conlab_core::geometry::{GridConfig, MetricChart, SampleGrid};
use conlab_core::jordan::{
    bracket_values, check_ideal, check_isomorphism, check_jordan_axioms, product_values,
    JordanAlgebra, JordanElement,
};

struct Sphere {
    chart: MetricChart,
    alg: JordanAlgebra,
    cone: ConeSpace,
    cone_grid: SampleGrid,
    elements: Vec<JordanElement>,
}

fn sphere() -> Sphere {
    let e = entry("sphere2").unwrap();
    let chart = e.metric("sphere2.metric").unwrap();
    let grid = SampleGrid::new(chart.domain(), GridConfig::default()).unwrap();
    let alg = JordanAlgebra::new(&chart, -1.0, grid).unwrap();
    let elements = ["sphere2.sol", "sphere2-b.sol", "sphere2.reflect.sol"]
        .iter()
        .map(|f| alg.admit(&e.solution(f, &chart).unwrap()).unwrap())
        .collect();
    let cone = ConeSpace::build(&chart, -1.0, DEFAULT_X0_DOMAIN, false).unwrap();
    let cone_grid = SampleGrid::new(cone.chart().domain(), GridConfig::default()).unwrap();
    Sphere {
        chart,
        alg,
        cone,
        cone_grid,
        elements,
    }
}

#[test]
fn lift_of_product_is_bracket_of_lifts() {
    let s = sphere();
    let unit = s.alg.unit().unwrap();
    let all: Vec<&JordanElement> = std::iter::once(&unit).chain(&s.elements).collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i..] {
            let r = check_isomorphism(&s.alg, &s.cone, a, b, &s.cone_grid, 1e-9).unwrap();
            assert!(r.pass, "{i}: {r:?}");
        }
    }
}

#[test]
fn products_stay_in_the_algebra() {
    let s = sphere();
    let p = s.alg.multiply(&s.elements[0], &s.elements[1]).unwrap();
    let r = check_sinyukov(&s.chart, p.solution(), s.alg.grid(), 1e-9).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn axioms_hold_on_sphere_elements() {
    let s = sphere();
    let out = check_jordan_axioms(&s.alg, &s.elements).unwrap();
    assert!(out.joint.pass, "{out:#?}");
}

#[test]
fn unit_is_neutral_for_numeric_product() {
    let s = sphere();
    let unit = s.alg.unit().unwrap();
    for p in s.alg.grid().points.iter().take(20) {
        let ginv = s.chart.inverse_metric(p).unwrap();
        let u = s.alg.values(&unit, p).unwrap();
        for e in &s.elements {
            let v = s.alg.values(e, p).unwrap();
            assert!(product_values(-1.0, &ginv, &u, &v).max_abs_diff(&v) < 1e-12);
        }
    }
}

#[test]
fn numeric_product_commutes_bitwise() {
    let s = sphere();
    let p = &s.alg.grid().points[3];
    let ginv = s.chart.inverse_metric(p).unwrap();
    let a = s.alg.values(&s.elements[0], p).unwrap();
    let b = s.alg.values(&s.elements[1], p).unwrap();
    assert_eq!(product_values(-1.0, &ginv, &a, &b), product_values(-1.0, &ginv, &b, &a));
    let m = bracket_values(&ginv, &a.a, &b.a);
    assert_eq!(m, bracket_values(&ginv, &b.a, &a.a));
}

#[test]
fn concircular_products_form_an_ideal() {
    let s = sphere();
    let e = entry("sphere2").unwrap();
    let fields: Vec<_> = ["sphere2.conc", "sphere2-b.conc", "sphere2-c.conc"]
        .iter()
        .map(|f| e.concircular(f, &s.chart).unwrap())
        .collect();
    let mut elements = s.elements.clone();
    elements.push(s.alg.unit().unwrap());
    let out = check_ideal(&s.alg, &fields, &elements, 1e-7).unwrap();
    assert!(out.joint.pass, "{:#?}", (out.projection, out.coefficient_fit, out.reconstruction, out.generator_rank));
}

#[test]
fn mismatched_k_is_rejected() {
    let s = sphere();
    let wrong = SinyukovSolution::unit(&s.chart, 1.0).unwrap();
    assert!(s.alg.admit(&wrong).is_err());
}
