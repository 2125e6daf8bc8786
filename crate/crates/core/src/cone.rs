//! The warped cone over a base chart: metric
//! `G = e^{2K x⁰}(−dx⁰² + g/K)`, its connection, and the lifts of special
//! concircular fields and Sinyukov solutions to parallel objects.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dsl::Expr;
use crate::fields::{self, ConcircularCandidate, SinyukovSolution, SolutionValues};
use crate::geometry::{
    BilinearField, CovectorField, ExprMatrix, Interval, MetricChart, SampleGrid,
};
use crate::report::{combine, max_abs, ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

pub const DEFAULT_X0_DOMAIN: Interval = Interval { lo: -0.5, hi: 0.5 };

#[derive(Clone, Debug)]
pub struct ConeSpace {
    base: MetricChart,
    k: f64,
    flipped: bool,
    x0: String,
    chart: MetricChart,
}

impl ConeSpace {
    /// Prepends a coordinate (named `x0` unless the base already uses it) and
    /// builds `G_00 = −e^{2Kx⁰}`, `G_0i = 0`, `G_ij = e^{2Kx⁰} g_ij / K`.
    /// `flipped` negates both blocks, giving the positive-norm variant.
    pub fn build(base: &MetricChart, k: f64, x0_domain: Interval, flipped: bool) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Invalid(format!("the cone needs a finite K != 0, got {k}")));
        }
        let mut x0 = "x0".to_string();
        while base.coords().contains(&x0) || base.bindings().contains_key(&x0) {
            x0.push('_');
        }
        let n = base.dim();
        let e2 = exp_k(2.0 * k, &x0);
        let kk = Expr::num(k);
        let sign = if flipped { -1.0 } else { 1.0 };
        let metric = ExprMatrix::symmetric_from_fn(n + 1, |i, j| match (i, j) {
            (0, 0) => signed(-sign, e2.clone()),
            (0, _) => Expr::zero(),
            (i, j) => signed(sign, &e2 * &(base.metric().get(i - 1, j - 1) / &kk)),
        });
        let mut coords = vec![x0.clone()];
        coords.extend(base.coords().iter().cloned());
        let mut domain = vec![x0_domain];
        domain.extend(base.domain().iter().copied());
        let chart = MetricChart::new(coords, domain, metric, base.bindings().clone())?;
        Ok(ConeSpace {
            base: base.clone(),
            k,
            flipped,
            x0,
            chart,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn base(&self) -> &MetricChart {
        &self.base
    }

    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn x0_name(&self) -> &str {
        &self.x0
    }

    pub fn x0_domain(&self) -> Interval {
        self.chart.domain()[0]
    }

    /// `e^{Kx⁰}` raised to `power`, as an expression.
    pub fn factor(&self, power: f64) -> Expr {
        exp_k(power * self.k, &self.x0)
    }

    /// `e^{−2Kx⁰} [[−1, 0], [0, K g⁻¹]]` (negated for the flipped cone).
    pub fn inverse_closed_form(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.base.dim();
        let ginv = self.base.inverse_metric(&p[1..])?;
        let s = (-2.0 * self.k * p[0]).exp() * if self.flipped { -1.0 } else { 1.0 };
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m[(0, 0)] = -s;
        for i in 0..n {
            for j in 0..n {
                m[(i + 1, j + 1)] = s * self.k * ginv[(i, j)];
            }
        }
        Ok(m)
    }
}

fn exp_k(c: f64, x0: &str) -> Expr {
    (Expr::num(c) * Expr::var(x0)).exp()
}

fn signed(sign: f64, e: Expr) -> Expr {
    if sign < 0.0 {
        -e
    } else {
        e
    }
}

/// Connection of the cone at one point, with deviations from the closed forms.
#[derive(Clone, Debug, Serialize)]
pub struct ConeConnection {
    /// `gamma[I][(J, L)] = Γ̃^I_JL` from the generic formula.
    pub gamma: Vec<Vec<Vec<f64>>>,
    /// `|Γ̃^0_00 − K|`
    pub time_time: f64,
    /// `max |Γ̃^0_0j|`
    pub time_mixed: f64,
    /// `max |Γ̃^0_ij − g_ij|`
    pub time_base: f64,
    /// `max |Γ̃^k_ij − Γ^k_ij|`
    pub base_base: f64,
    /// `max |Γ̃^I_0J − K δ^I_J|`
    pub mixed: f64,
    /// `max |Γ̃^i_0j − δ^i_j|`, the unscaled variant of the mixed block
    pub mixed_unscaled: f64,
}

pub fn cone_christoffel_oracle(cone: &ConeSpace, p: &[f64]) -> Result<ConeConnection> {
    let n = cone.base.dim();
    let k = cone.k;
    let geo = cone.chart.geometry_at(p)?;
    let base = cone.base.geometry_at(&p[1..])?;
    let gam = &geo.gamma;
    let mut time_mixed: f64 = 0.0;
    let mut time_base: f64 = 0.0;
    let mut base_base: f64 = 0.0;
    let mut mixed: f64 = 0.0;
    let mut mixed_unscaled: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let d = if i == j { 1.0 } else { 0.0 };
            mixed = mixed.max((gam[i][(0, j)] - k * d).abs());
            if i > 0 && j > 0 {
                mixed_unscaled = mixed_unscaled.max((gam[i][(0, j)] - d).abs());
            }
        }
    }
    for j in 1..=n {
        time_mixed = time_mixed.max(gam[0][(0, j)].abs());
        for l in 1..=n {
            time_base = time_base.max((gam[0][(j, l)] - base.g[(j - 1, l - 1)]).abs());
            for m in 1..=n {
                base_base = base_base.max((gam[m][(j, l)] - base.gamma[m - 1][(j - 1, l - 1)]).abs());
            }
        }
    }
    Ok(ConeConnection {
        gamma: gam
            .iter()
            .map(|m| (0..=n).map(|r| m.row(r).iter().copied().collect()).collect())
            .collect(),
        time_time: (gam[0][(0, 0)] - k).abs(),
        time_mixed,
        time_base,
        base_base,
        mixed,
        mixed_unscaled,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectionCheck {
    /// `Γ̃^I_0J = K δ^I_J`
    pub mixed: ResidualReport,
    /// Remaining closed-form blocks.
    pub closed_form: ResidualReport,
    /// `∇̃G = 0`
    pub metricity: ResidualReport,
    /// `G · G⁻¹ = I` with the closed-form inverse.
    pub inverse: ResidualReport,
    /// Largest deviation of `Γ̃^i_0j` from the unscaled `δ^i_j`; equals
    /// `|K − 1|` when the mixed block scales with `K`.
    pub mixed_unscaled_deviation: f64,
}

pub fn check_connection(cone: &ConeSpace, grid: &SampleGrid, tolerance: f64) -> Result<ConnectionCheck> {
    let mut mixed = ResidualAccumulator::new("cone-mixed-connection", tolerance);
    let mut closed = ResidualAccumulator::new("cone-connection-closed-form", tolerance);
    let mut metricity = ResidualAccumulator::new("cone-metricity", tolerance);
    let mut inverse = ResidualAccumulator::new("cone-inverse", 1e-12);
    let mut unscaled: f64 = 0.0;
    let g_jet = BilinearField::new(cone.chart.metric().clone()).jet(cone.chart.coords());
    for p in &grid.points {
        let c = cone_christoffel_oracle(cone, p)?;
        mixed.push(p, c.mixed);
        closed.push(p, max_abs([c.time_time, c.time_mixed, c.time_base, c.base_base].iter()));
        unscaled = unscaled.max(c.mixed_unscaled);
        let geo = cone.chart.geometry_at(p)?;
        let (g, dg) = g_jet.eval(&cone.chart, p)?;
        let nab = geo.nabla_bilinear(&g, &dg);
        metricity.push(p, nab.iter().map(|m| m.amax()).fold(0.0, f64::max));
        let inv = cone.inverse_closed_form(p)?;
        let n1 = g.nrows();
        inverse.push(p, (&g * inv - DMatrix::<f64>::identity(n1, n1)).amax());
    }
    Ok(ConnectionCheck {
        mixed: mixed.finish(),
        closed_form: closed.finish(),
        metricity: metricity.finish(),
        inverse: inverse.finish(),
        mixed_unscaled_deviation: unscaled,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergentCheck {
    /// `∇̃_J φ̃^I − K δ^I_J` for `φ̃ = ∂_0`
    pub field: ResidualReport,
    /// `max(G(φ̃, φ̃), 0)`; a timelike field leaves it at zero
    pub norm: ResidualReport,
    pub joint: ResidualReport,
}

pub fn check_convergent_field(cone: &ConeSpace, grid: &SampleGrid, tolerance: f64) -> Result<ConvergentCheck> {
    let mut field = ResidualAccumulator::new("convergent-field", tolerance);
    let mut norm = ResidualAccumulator::new("convergent-norm", 0.0);
    let n1 = cone.chart.dim();
    for p in &grid.points {
        let geo = cone.chart.geometry_at(p)?;
        // ∇_J φ^I = ∂_J φ^I + Γ^I_JS φ^S = Γ^I_J0
        let mut worst: f64 = 0.0;
        for i in 0..n1 {
            for j in 0..n1 {
                let d = if i == j { cone.k } else { 0.0 };
                worst = worst.max((geo.gamma[i][(j, 0)] - d).abs());
            }
        }
        field.push(p, worst);
        norm.push(p, geo.g[(0, 0)].max(0.0));
    }
    let (field, norm) = (field.finish(), norm.finish());
    let joint = combine("convergent", &[&field, &norm]);
    Ok(ConvergentCheck { field, norm, joint })
}

/// `e^{Kx⁰}(ρ, φ_i)` without checking the base identities.
pub fn lift_covector_raw(cone: &ConeSpace, rho: &Expr, phi: &CovectorField) -> CovectorField {
    let f = cone.factor(1.0);
    let mut comps = vec![&f * rho];
    comps.extend(phi.comps.iter().map(|c| &f * c));
    CovectorField::new(comps)
}

/// `e^{2Kx⁰} [[μ, λ_j], [λ_i, a_ij]]` without checking the base identities.
pub fn lift_solution_raw(cone: &ConeSpace, sol: &SinyukovSolution) -> BilinearField {
    let f = cone.factor(2.0);
    let n = sol.dim();
    BilinearField::new(ExprMatrix::symmetric_from_fn(n + 1, |i, j| match (i, j) {
        (0, 0) => &f * &sol.mu,
        (0, j) => &f * &sol.lambda.comps[j - 1],
        (i, j) => &f * sol.a.comps.get(i - 1, j - 1),
    }))
}

/// Base grid obtained by dropping the cone coordinate.
fn check_base_grid(cone: &ConeSpace, grid: &SampleGrid) -> Result<()> {
    if grid.points.iter().any(|p| p.len() != cone.base.dim()) {
        return Err(Error::Invalid("precondition grid must live on the base chart".into()));
    }
    Ok(())
}

/// Lifts a special concircular field after verifying `∇φ = ρg` and
/// `∇ρ = Kφ` with the cone's `K` on `base_grid`.
pub fn lift_concircular(
    cone: &ConeSpace,
    c: &ConcircularCandidate,
    base_grid: &SampleGrid,
    tolerance: f64,
) -> Result<CovectorField> {
    check_base_grid(cone, base_grid)?;
    if let Some(k) = c.k {
        if k != cone.k {
            return Err(Error::Precondition(format!(
                "field declares K = {k}, the cone uses K = {}",
                cone.k
            )));
        }
    }
    let with_k = ConcircularCandidate::new(c.phi.clone(), c.rho.clone(), Some(cone.k));
    let out = fields::check_concircular(&cone.base, &with_k, base_grid, tolerance)?;
    if !out.concircular.pass {
        return Err(Error::Precondition(format!(
            "∇φ = ρg fails (max residual {:e})",
            out.concircular.max
        )));
    }
    if !out.special.pass {
        return Err(Error::Precondition(format!(
            "∇ρ = Kφ fails with K = {} (max residual {:e})",
            cone.k, out.special.max
        )));
    }
    Ok(lift_covector_raw(cone, &c.rho, &c.phi))
}

/// Lifts a solution after verifying the Sinyukov and V_n(K) identities with
/// the cone's `K` on `base_grid`.
pub fn lift_solution(
    cone: &ConeSpace,
    sol: &SinyukovSolution,
    base_grid: &SampleGrid,
    tolerance: f64,
) -> Result<BilinearField> {
    check_base_grid(cone, base_grid)?;
    match sol.k {
        Some(k) if k != cone.k => {
            return Err(Error::Precondition(format!(
                "solution declares K = {k}, the cone uses K = {}",
                cone.k
            )))
        }
        _ => {}
    }
    let mut with_k = sol.clone();
    with_k.k = Some(cone.k);
    let s = fields::check_sinyukov(&cone.base, &with_k, base_grid, tolerance)?;
    if !s.pass {
        return Err(Error::Precondition(format!(
            "∇a = λ⊗g + g⊗λ fails (max residual {:e})",
            s.max
        )));
    }
    let v = fields::check_vnk(&cone.base, &with_k, base_grid, tolerance)?;
    if !v.lambda.pass {
        return Err(Error::Precondition(format!(
            "∇λ = K a + μ g fails (max residual {:e})",
            v.lambda.max
        )));
    }
    if !v.mu.pass {
        return Err(Error::Precondition(format!(
            "∇μ = 2Kλ fails (max residual {:e})",
            v.mu.max
        )));
    }
    Ok(lift_solution_raw(cone, sol))
}

/// Max `|∇̃_J w_I|` over the cone grid.
pub fn check_parallel_covector(
    cone: &ConeSpace,
    w: &CovectorField,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ResidualReport> {
    w.check(&cone.chart)?;
    let jet = w.jet(cone.chart.coords());
    let mut acc = ResidualAccumulator::new("parallel-covector", tolerance);
    for p in &grid.points {
        let geo = cone.chart.geometry_at(p)?;
        let (v, d) = jet.eval(&cone.chart, p)?;
        acc.push(p, max_abs(geo.nabla_covector(&v, &d).iter()));
    }
    Ok(acc.finish())
}

/// Max `|∇̃_K ã_IJ|` over the cone grid.
pub fn check_parallel_bilinear(
    cone: &ConeSpace,
    a: &BilinearField,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ResidualReport> {
    a.check(&cone.chart)?;
    let jet = a.jet(cone.chart.coords());
    let mut acc = ResidualAccumulator::new("parallel-bilinear", tolerance);
    for p in &grid.points {
        let geo = cone.chart.geometry_at(p)?;
        let (v, d) = jet.eval(&cone.chart, p)?;
        let nab = geo.nabla_bilinear(&v, &d);
        acc.push(p, nab.iter().map(|m| m.amax()).fold(0.0, f64::max));
    }
    Ok(acc.finish())
}

/// Divides a lifted covector by `e^{Kx⁰}` at a cone point, returning `(ρ, φ)`.
pub fn unlift_covector_at(cone: &ConeSpace, w: &CovectorField, p: &[f64]) -> Result<(f64, Vec<f64>)> {
    let f = cone.chart.eval(&cone.factor(1.0), p)?;
    let v = cone.chart.eval_vec(&w.comps, p)?;
    Ok((v[0] / f, v.iter().skip(1).map(|x| x / f).collect()))
}

/// Divides a lifted form by `e^{2Kx⁰}` at a cone point and splits the blocks.
pub fn unlift_bilinear_at(cone: &ConeSpace, a: &BilinearField, p: &[f64]) -> Result<SolutionValues> {
    let f = cone.chart.eval(&cone.factor(2.0), p)?;
    let m = cone.chart.eval_matrix(&a.comps, p)? / f;
    let n = m.nrows() - 1;
    Ok(SolutionValues {
        a: m.view((1, 1), (n, n)).into_owned(),
        lambda: DVector::from_iterator(n, (1..=n).map(|j| m[(0, j)])),
        mu: m[(0, 0)],
    })
}

/// Distance between two doubles in units in the last place.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_nan() || b.is_nan() {
        return u64::MAX;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub max_ulps: u64,
    pub points: usize,
}

/// Unlifts at every cone grid point and compares with direct evaluation of
/// `(ρ, φ)` on the base.
pub fn covector_round_trip(
    cone: &ConeSpace,
    c: &ConcircularCandidate,
    grid: &SampleGrid,
) -> Result<RoundTrip> {
    let w = lift_covector_raw(cone, &c.rho, &c.phi);
    let mut max_ulps = 0;
    for p in &grid.points {
        let (rho, phi) = unlift_covector_at(cone, &w, p)?;
        let base = &p[1..];
        max_ulps = max_ulps.max(ulp_distance(rho, cone.base.eval(&c.rho, base)?));
        let direct = cone.base.eval_vec(&c.phi.comps, base)?;
        for (a, b) in phi.iter().zip(direct.iter()) {
            max_ulps = max_ulps.max(ulp_distance(*a, *b));
        }
    }
    Ok(RoundTrip {
        max_ulps,
        points: grid.len(),
    })
}

pub fn solution_round_trip(
    cone: &ConeSpace,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
) -> Result<RoundTrip> {
    let a = lift_solution_raw(cone, sol);
    let mut max_ulps = 0;
    for p in &grid.points {
        let got = unlift_bilinear_at(cone, &a, p)?;
        let want = sol.values(&cone.base, &p[1..])?;
        for (x, y) in got.stacked().iter().zip(want.stacked()) {
            max_ulps = max_ulps.max(ulp_distance(*x, y));
        }
    }
    Ok(RoundTrip {
        max_ulps,
        points: grid.len(),
    })
}
