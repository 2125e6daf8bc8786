use conlab_core::catalog::entry;
use conlab_core::cone::{
    check_connection, check_convergent_field, check_parallel_bilinear, check_parallel_covector,
    covector_round_trip, lift_concircular, lift_solution, solution_round_trip, ConeSpace,
    DEFAULT_X0_DOMAIN,
};
use conlab_core::geometry::{GridConfig, SampleGrid};
use conlab_core::Error;

fn spaces() -> Vec<(&'static str, f64, &'static str, &'static str)> {
    vec![
        ("sphere2", -1.0, "sphere2.conc", "sphere2.sol"),
        ("hyperbolic2", 1.0, "hyperbolic2.conc", "hyperbolic2.sol"),
    ]
}

#[test]
fn lifts_are_parallel_on_both_cones() {
    for (name, k, conc, sol) in spaces() {
        let e = entry(name).unwrap();
        let base = e.metric(&format!("{name}.metric")).unwrap();
        let base_grid = SampleGrid::new(base.domain(), GridConfig::default()).unwrap();
        let cone = ConeSpace::build(&base, k, DEFAULT_X0_DOMAIN, false).unwrap();
        let grid = SampleGrid::new(cone.chart().domain(), GridConfig::default()).unwrap();

        let conn = check_connection(&cone, &grid, 1e-10).unwrap();
        assert!(conn.mixed.pass && conn.closed_form.pass && conn.metricity.pass, "{name}: {conn:#?}");
        assert!(conn.inverse.pass, "{name}");
        // The mixed block scales with K, so the unscaled reading is off by |K − 1|.
        assert!((conn.mixed_unscaled_deviation - (k - 1.0).abs()).abs() < 1e-10);
        assert!(check_convergent_field(&cone, &grid, 1e-9).unwrap().joint.pass);

        let c = e.concircular(conc, &base).unwrap();
        let w = lift_concircular(&cone, &c, &base_grid, 1e-9).unwrap();
        let r = check_parallel_covector(&cone, &w, &grid, 1e-9).unwrap();
        assert!(r.pass, "{name}: {r:?}");

        let s = e.solution(sol, &base).unwrap();
        let a = lift_solution(&cone, &s, &base_grid, 1e-9).unwrap();
        let r = check_parallel_bilinear(&cone, &a, &grid, 1e-9).unwrap();
        assert!(r.pass, "{name}: {r:?}");

        assert!(covector_round_trip(&cone, &c, &grid).unwrap().max_ulps <= 1);
        assert!(solution_round_trip(&cone, &s, &grid).unwrap().max_ulps <= 1);
    }
}

#[test]
fn flipped_cone_keeps_connection() {
    let e = entry("sphere2").unwrap();
    let base = e.metric("sphere2.metric").unwrap();
    let cone = ConeSpace::build(&base, -1.0, DEFAULT_X0_DOMAIN, true).unwrap();
    let grid = SampleGrid::new(cone.chart().domain(), GridConfig::default()).unwrap();
    let conn = check_connection(&cone, &grid, 1e-10).unwrap();
    assert!(conn.mixed.pass && conn.metricity.pass && conn.inverse.pass);
}

#[test]
fn lifting_with_wrong_k_is_a_precondition_error() {
    let e = entry("sphere2").unwrap();
    let base = e.metric("sphere2.metric").unwrap();
    let base_grid = SampleGrid::new(base.domain(), GridConfig::default()).unwrap();
    let cone = ConeSpace::build(&base, 1.0, DEFAULT_X0_DOMAIN, false).unwrap();
    let c = e.concircular("sphere2.conc", &base).unwrap();
    assert!(matches!(lift_concircular(&cone, &c, &base_grid, 1e-9), Err(Error::Precondition(_))));
    let mut c = c;
    c.k = None;
    assert!(matches!(lift_concircular(&cone, &c, &base_grid, 1e-9), Err(Error::Precondition(_))));
}

#[test]
fn cone_coordinate_avoids_clashes() {
    let text = "dim = 2\ncoord 0 = x0\ncoord 1 = y\ndomain 0 = 0 1\ndomain 1 = 0 1\ng 0 0 = 1\ng 1 1 = 1\n";
    let base = conlab_core::files::parse_metric(text).unwrap();
    let cone = ConeSpace::build(&base, 2.0, DEFAULT_X0_DOMAIN, false).unwrap();
    assert_eq!(cone.x0_name(), "x0_");
    assert_eq!(cone.chart().coords(), ["x0_", "x0", "y"]);
}
