mod common;

use std::f64::consts::FRAC_PI_2;

use conlab_core::catalog::entry;
use conlab_core::cone::{ConeSpace, DEFAULT_X0_DOMAIN};
use conlab_core::dsl::central_difference;
use conlab_core::geometry::{
    energies, geodesic_map_check, integrate_geodesic, lower_index, raise_index, GridConfig,
    MetricChart, SampleGrid,
};
use conlab_core::Error;
use nalgebra::{DMatrix, DVector};

fn metric(entry_name: &str, file: &str) -> MetricChart {
    entry(entry_name).unwrap().metric(file).unwrap()
}

fn all_metrics() -> Vec<MetricChart> {
    vec![
        metric("flat2", "flat2.metric"),
        metric("sphere2", "sphere2.metric"),
        metric("hyperbolic2", "hyperbolic2.metric"),
        metric("klein2", "klein2.metric"),
        metric("klein2", "warped2.metric"),
        metric("flat-vn0", "flat-vn0.metric"),
        metric("cone-of-hyperbolic2", "cone-of-hyperbolic2.metric"),
    ]
}

#[test]
fn inverse_metric_examples() {
    let flat = metric("flat2", "flat2.metric");
    assert_eq!(flat.inverse_metric(&[0.1, 0.2]).unwrap(), DMatrix::identity(2, 2));
    let sphere = metric("sphere2", "sphere2.metric");
    let inv = sphere.inverse_metric(&[FRAC_PI_2, 0.0]).unwrap();
    assert!((inv - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
    let klein = metric("klein2", "klein2.metric");
    let geo = klein.geometry_at(&[0.3, 0.0]).unwrap();
    assert!(geo.inverse_defect() < 1e-12);
}

#[test]
fn inverse_is_consistent_on_every_grid() {
    for chart in all_metrics() {
        let grid = SampleGrid::new(chart.domain(), GridConfig::default()).unwrap();
        for p in &grid.points {
            assert!(chart.geometry_at(p).unwrap().inverse_defect() <= 1e-12, "{:?}", chart.coords());
        }
    }
}

#[test]
fn singular_metric_names_the_point() {
    let text = "dim = 2\ncoord 0 = x\ncoord 1 = y\ndomain 0 = -1 1\ndomain 1 = -1 1\ng 0 0 = x\ng 1 1 = 1\n";
    let chart = conlab_core::files::parse_metric(text).unwrap();
    match chart.inverse_metric(&[0.0, 0.5]) {
        Err(Error::SingularMetric { point }) => assert_eq!(point, vec![0.0, 0.5]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn christoffel_symbols_of_the_sphere() {
    let sphere = metric("sphere2", "sphere2.metric");
    let t = 1.0f64;
    let geo = sphere.geometry_at(&[t, 0.3]).unwrap();
    assert!((geo.gamma[0][(1, 1)] + t.sin() * t.cos()).abs() < 1e-15);
    assert!((geo.gamma[1][(0, 1)] - t.cos() / t.sin()).abs() < 1e-15);
    // FD oracle: Γ^k_ij from finite differences of the metric entries.
    let coords = sphere.coords().to_vec();
    let p = [t, 0.3];
    let dg: Vec<DMatrix<f64>> = (0..2)
        .map(|k| {
            DMatrix::from_fn(2, 2, |i, j| {
                central_difference(sphere.metric().get(i, j), &coords, sphere.bindings(), &p, k, 1e-5).unwrap()
            })
        })
        .collect();
    let ginv = sphere.inverse_metric(&p).unwrap();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let fd: f64 = (0..2)
                    .map(|s| 0.5 * ginv[(k, s)] * (dg[i][(s, j)] + dg[j][(s, i)] - dg[s][(i, j)]))
                    .sum();
                assert!((fd - geo.gamma[k][(i, j)]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn christoffel_symbols_are_bitwise_symmetric() {
    for chart in all_metrics() {
        let grid = SampleGrid::new(chart.domain(), GridConfig { random: 20, lattice: 2, ..GridConfig::default() }).unwrap();
        for p in &grid.points {
            let geo = chart.geometry_at(p).unwrap();
            for g in &geo.gamma {
                assert_eq!(g, &g.transpose());
            }
        }
    }
}

#[test]
fn cone_time_time_symbol_is_k() {
    let base = metric("hyperbolic2", "hyperbolic2.metric");
    for k in [1.0, -0.5, 2.0] {
        let cone = ConeSpace::build(&base, k, DEFAULT_X0_DOMAIN, false).unwrap();
        let geo = cone.chart().geometry_at(&[0.2, 1.0, 0.4]).unwrap();
        assert!((geo.gamma[0][(0, 0)] - k).abs() < 1e-14);
    }
}

#[test]
fn metricity_on_every_catalog_metric() {
    for chart in all_metrics() {
        let grid = SampleGrid::new(chart.domain(), GridConfig::default()).unwrap();
        let jet = conlab_core::geometry::BilinearField::new(chart.metric().clone()).jet(chart.coords());
        for p in &grid.points {
            let geo = chart.geometry_at(p).unwrap();
            let (g, dg) = jet.eval(&chart, p).unwrap();
            let worst = geo.nabla_bilinear(&g, &dg).iter().map(|m| m.amax()).fold(0.0, f64::max);
            assert!(worst <= 1e-10, "{:?} at {p:?}: {worst:e}", chart.coords());
        }
    }
}

#[test]
fn covariant_derivative_of_concircular_fields() {
    let sphere = metric("sphere2", "sphere2.metric");
    let c = entry("sphere2").unwrap().concircular("sphere2.conc", &sphere).unwrap();
    let t = 1.2f64;
    let p = [t, 0.0];
    let geo = sphere.geometry_at(&p).unwrap();
    let (v, d) = c.phi.jet(sphere.coords()).eval(&sphere, &p).unwrap();
    let nab = geo.nabla_covector(&v, &d);
    assert!((nab + &geo.g * t.cos()).amax() < 1e-10);

    let hyp = metric("hyperbolic2", "hyperbolic2.metric");
    let c = entry("hyperbolic2").unwrap().concircular("hyperbolic2.conc", &hyp).unwrap();
    let p = [1.1, 0.4];
    let geo = hyp.geometry_at(&p).unwrap();
    let (v, d) = c.phi.jet(hyp.coords()).eval(&hyp, &p).unwrap();
    assert!((geo.nabla_covector(&v, &d) - &geo.g * 1.1f64.cosh()).amax() < 1e-10);
}

#[test]
fn covariant_derivative_of_flat_solution() {
    let flat = metric("flat2", "flat2.metric");
    let s = entry("flat2").unwrap().solution("flat2.sol", &flat).unwrap();
    let p = [0.3, -0.2];
    let geo = flat.geometry_at(&p).unwrap();
    let (a, da) = s.a.jet(flat.coords()).eval(&flat, &p).unwrap();
    let nab = geo.nabla_bilinear(&a, &da);
    let c = [1.0, 0.0];
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert!((nab[k][(i, j)] - c[i] * delta(j, k) - c[j] * delta(i, k)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn raise_and_lower() {
    let hyp = metric("hyperbolic2", "hyperbolic2.metric");
    let w = DVector::from_vec(vec![0.0, 1.0]);
    let up = raise_index(&hyp, &[1.0, 0.0], &w).unwrap();
    assert!((up[1] - 1.0 / 1f64.sinh().powi(2)).abs() < 1e-14);
    let back = lower_index(&hyp, &[1.0, 0.0], &up).unwrap();
    assert!((back - w).amax() < 1e-12);
}

#[test]
fn straight_lines_in_the_plane() {
    let flat = metric("flat2", "flat2.metric");
    let traj = integrate_geodesic(&flat, &[-0.5, 0.0], &[1.0, 0.25], 100, 1e-2).unwrap();
    for p in &traj.points {
        assert!((p.x[0] - (-0.5 + p.t)).abs() < 1e-13);
        assert!((p.x[1] - 0.25 * p.t).abs() < 1e-13);
    }
}

#[test]
fn sphere_equator_is_a_geodesic() {
    let sphere = metric("sphere2", "sphere2.metric");
    let traj = integrate_geodesic(&sphere, &[FRAC_PI_2, 0.0], &[0.0, 1.0], 1000, 1e-3).unwrap();
    assert!(traj.truncated_at.is_none());
    for p in &traj.points {
        assert!((p.x[0] - FRAC_PI_2).abs() < 1e-10);
    }
}

#[test]
fn geodesics_leave_through_the_boundary() {
    let sphere = metric("sphere2", "sphere2.metric");
    let traj = integrate_geodesic(&sphere, &[FRAC_PI_2, 2.9], &[0.0, 1.0], 1000, 1e-3).unwrap();
    let cut = traj.truncated_at.unwrap();
    assert_eq!(traj.points.len(), cut);
    assert!(traj.points.iter().all(|p| p.x[1] <= 3.0));
    assert!(traj.to_tsv().lines().count() == cut);
}

#[test]
fn energy_is_conserved_on_catalog_metrics() {
    let cases: Vec<(MetricChart, Vec<f64>, Vec<f64>)> = vec![
        (metric("sphere2", "sphere2.metric"), vec![1.0, -0.5], vec![0.3, 0.4]),
        (metric("hyperbolic2", "hyperbolic2.metric"), vec![0.8, 0.0], vec![0.2, 0.3]),
        (metric("klein2", "klein2.metric"), vec![-0.2, 0.1], vec![0.3, -0.1]),
        (metric("klein2", "warped2.metric"), vec![0.0, 0.0], vec![0.2, 0.1]),
        (metric("flat-vn0", "flat-vn0.metric"), vec![0.0, 0.0, 0.0], vec![0.1, 0.2, 0.3]),
        (metric("cone-of-hyperbolic2", "cone-of-hyperbolic2.metric"), vec![0.0, 1.0, 0.0], vec![0.1, 0.2, 0.1]),
    ];
    for (chart, x0, v0) in cases {
        let traj = integrate_geodesic(&chart, &x0, &v0, 1000, 1e-3).unwrap();
        assert!(traj.truncated_at.is_none());
        let e = energies(&chart, &traj).unwrap();
        let drift = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max) / e[0].abs();
        assert!(drift <= 1e-8, "{:?}: {drift:e}", chart.coords());
    }
}

#[test]
fn geodesic_map_examples() {
    let flat = metric("flat2", "flat2.metric");
    let klein = metric("klein2", "klein2.metric");
    let warped = metric("klein2", "warped2.metric");
    let (same, _) = geodesic_map_check(&flat, &flat, &[0.1, 0.1], &[1.0, 0.5], 200, 1e-3, 1e-8).unwrap();
    assert_eq!(same.max, 0.0);
    let (r, _) = geodesic_map_check(&flat, &klein, &[0.1, 0.1], &[1.0, 0.5], 1000, 1e-3, 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
    let (r, _) = geodesic_map_check(&flat, &warped, &[0.1, 0.1], &[1.0, 0.5], 1000, 1e-3, 1e-8).unwrap();
    assert!(r.max > 1e-2, "{r:?}");
}

#[test]
fn klein_geodesic_through_two_points_is_the_chord() {
    // Brute-force oracle: integrate the Klein geodesic directly; it must
    // stay on the straight line through its start in the initial direction.
    let klein = metric("klein2", "klein2.metric");
    let (x0, v0) = ([-0.3, 0.2], [0.6, -0.2]);
    let traj = integrate_geodesic(&klein, &x0, &v0, 1000, 1e-3).unwrap();
    for p in &traj.points {
        let cross = (p.x[0] - x0[0]) * v0[1] - (p.x[1] - x0[1]) * v0[0];
        assert!(cross.abs() < 1e-9, "{cross:e}");
    }
}

#[test]
fn metric_derivatives_match_finite_differences() {
    for set in common::catalog_expressions().iter().filter(|s| s.label.ends_with(".metric")) {
        let pts = common::inner_points(&set.chart, 20, 7);
        let d = common::fd_disagreement(&common::ExprSet { label: set.label.clone(), chart: set.chart.clone(), exprs: set.chart.metric().entries().to_vec() }, &pts, 1e-5);
        assert!(d <= 1e-6, "{}: {d:e}", set.label);
    }
}
