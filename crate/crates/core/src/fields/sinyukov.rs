use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SinyukovSolution;
use crate::geometry::{MetricChart, PointGeometry, SampleGrid};
use crate::report::{combine, max_abs, ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

/// Everything the solution checks need at one grid point.
struct PointData {
    geo: PointGeometry,
    a: DMatrix<f64>,
    nabla_a: Vec<DMatrix<f64>>,
    lambda: DVector<f64>,
    nabla_lambda: DMatrix<f64>,
    mu: f64,
    grad_mu: DVector<f64>,
}

fn for_each_point(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
    mut f: impl FnMut(&[f64], &PointData),
) -> Result<()> {
    sol.check(chart)?;
    let jets = sol.jets(chart.coords());
    for p in &grid.points {
        let geo = chart.geometry_at(p)?;
        let (a, da) = jets.a.eval(chart, p)?;
        let (lambda, dl) = jets.lambda.eval(chart, p)?;
        let (mu, grad_mu) = jets.mu.eval(chart, p)?;
        let data = PointData {
            nabla_a: geo.nabla_bilinear(&a, &da),
            nabla_lambda: geo.nabla_covector(&lambda, &dl),
            geo,
            a,
            lambda,
            mu,
            grad_mu,
        };
        f(p, &data);
    }
    Ok(())
}

fn sinyukov_residual(d: &PointData) -> f64 {
    let n = d.a.nrows();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let r = d.nabla_a[k][(i, j)]
                    - d.lambda[i] * d.geo.g[(j, k)]
                    - d.lambda[j] * d.geo.g[(i, k)];
                worst = max_abs([worst, r].iter());
            }
        }
    }
    worst
}

/// Residual of `∇_k a_ij − λ_i g_jk − λ_j g_ik`.
pub fn check_sinyukov(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ResidualReport> {
    let mut acc = ResidualAccumulator::new("sinyukov", tolerance);
    for_each_point(chart, sol, grid, |p, d| acc.push(p, sinyukov_residual(d)))?;
    Ok(acc.finish())
}

#[derive(Clone, Debug, Serialize)]
pub struct VnkOutcome {
    /// `∇_j λ_i − K a_ij − μ g_ij`
    pub lambda: ResidualReport,
    /// `∇_k μ − 2K λ_k`
    pub mu: ResidualReport,
    pub joint: ResidualReport,
}

pub fn check_vnk(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<VnkOutcome> {
    let k = sol.require_k()?;
    let mut lam = ResidualAccumulator::new("vnk-lambda", tolerance);
    let mut mu = ResidualAccumulator::new("vnk-mu", tolerance);
    for_each_point(chart, sol, grid, |p, d| {
        let r = &d.nabla_lambda - &d.a * k - &d.geo.g * d.mu;
        lam.push(p, max_abs(r.iter()));
        let r = &d.grad_mu - &d.lambda * (2.0 * k);
        mu.push(p, max_abs(r.iter()));
    })?;
    let (lambda, mu) = (lam.finish(), mu.finish());
    let joint = combine("vnk", &[&lambda, &mu]);
    Ok(VnkOutcome { lambda, mu, joint })
}

/// Least-squares `K` for the pair of identities `∇λ = K a + μ g`,
/// `∇μ = 2K λ` over the grid.
pub fn fit_vnk_k(chart: &MetricChart, sol: &SinyukovSolution, grid: &SampleGrid) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for_each_point(chart, sol, grid, |_, d| {
        let b = &d.nabla_lambda - &d.geo.g * d.mu;
        num += b.dot(&d.a);
        den += d.a.norm_squared();
        num += d.grad_mu.dot(&(&d.lambda * 2.0));
        den += 4.0 * d.lambda.norm_squared();
    })?;
    if den < 1e-18 {
        return Err(Error::Degenerate("a and λ vanish on the grid, K cannot be fitted".into()));
    }
    Ok(num / den)
}

#[derive(Clone, Debug, Serialize)]
pub struct Vn0Outcome {
    pub sinyukov: ResidualReport,
    /// `∇_k λ_i − μ g_ik`
    pub lambda: ResidualReport,
    /// `|∂μ|`, which must vanish for a constant `μ`
    pub mu_constant: ResidualReport,
    pub joint: ResidualReport,
}

pub fn check_vn0(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<Vn0Outcome> {
    if let Some(k) = sol.k {
        if k != 0.0 {
            return Err(Error::Invalid(format!("V_n(0) check needs K = 0, got {k}")));
        }
    }
    let mut sin = ResidualAccumulator::new("sinyukov", tolerance);
    let mut lam = ResidualAccumulator::new("vn0-lambda", tolerance);
    let mut mu = ResidualAccumulator::new("vn0-mu-constant", tolerance.min(1e-12));
    for_each_point(chart, sol, grid, |p, d| {
        sin.push(p, sinyukov_residual(d));
        let r = &d.nabla_lambda - &d.geo.g * d.mu;
        lam.push(p, max_abs(r.iter()));
        mu.push(p, max_abs(d.grad_mu.iter()));
    })?;
    let (sinyukov, lambda, mu_constant) = (sin.finish(), lam.finish(), mu.finish());
    let joint = combine("vn0", &[&sinyukov, &lambda, &mu_constant]);
    Ok(Vn0Outcome {
        sinyukov,
        lambda,
        mu_constant,
        joint,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Corollary1Outcome {
    pub e: i32,
    /// `K a(AX, Y) − λ(X)λ(Y) − e g(X, Y)/K`
    pub form: ResidualReport,
    /// `K λ(AX) − μ λ(X)`
    pub covector: ResidualReport,
    /// `K g⁻¹(λ, λ) − μ² + e`
    pub scalar: ResidualReport,
    pub joint: ResidualReport,
}

struct CorollarySample {
    point: Vec<f64>,
    form: DMatrix<f64>,
    g_over_k: DMatrix<f64>,
    covector: f64,
    scalar: f64,
}

fn corollary_samples(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
) -> Result<(f64, Vec<CorollarySample>)> {
    let k = sol.require_k()?;
    if k == 0.0 {
        return Err(Error::Invalid("the identities need K != 0".into()));
    }
    sol.check(chart)?;
    let mut out = Vec::with_capacity(grid.len());
    for p in &grid.points {
        let g = chart.eval_matrix(chart.metric(), p)?;
        let ginv = chart.inverse_metric(p)?;
        let v = sol.values(chart, p)?;
        let ag = &v.a * &ginv;
        let form = (&ag * &v.a) * k - &v.lambda * v.lambda.transpose();
        let cov = (&ag * &v.lambda) * k - &v.lambda * v.mu;
        let scalar = k * (v.lambda.transpose() * &ginv * &v.lambda)[(0, 0)] - v.mu * v.mu;
        out.push(CorollarySample {
            point: p.clone(),
            form,
            g_over_k: g / k,
            covector: max_abs(cov.iter()),
            scalar,
        });
    }
    Ok((k, out))
}

fn corollary_reports(samples: &[CorollarySample], e: i32, tolerance: f64) -> Corollary1Outcome {
    let mut form = ResidualAccumulator::new("corollary1-form", tolerance);
    let mut cov = ResidualAccumulator::new("corollary1-covector", tolerance);
    let mut scalar = ResidualAccumulator::new("corollary1-scalar", tolerance);
    let ef = e as f64;
    for s in samples {
        let r = &s.form - &s.g_over_k * ef;
        form.push(&s.point, max_abs(r.iter()));
        cov.push(&s.point, s.covector);
        scalar.push(&s.point, s.scalar + ef);
    }
    let (form, covector, scalar) = (form.finish(), cov.finish(), scalar.finish());
    let joint = combine("corollary1", &[&form, &covector, &scalar]);
    Corollary1Outcome {
        e,
        form,
        covector,
        scalar,
        joint,
    }
}

pub fn check_corollary1(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    e: i32,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<Corollary1Outcome> {
    if ![-1, 0, 1].contains(&e) {
        return Err(Error::Invalid(format!("e must be -1, 0 or 1, got {e}")));
    }
    let (_, samples) = corollary_samples(chart, sol, grid)?;
    Ok(corollary_reports(&samples, e, tolerance))
}

#[derive(Clone, Debug, Serialize)]
pub struct ESelection {
    /// The single passing value, if exactly one passes.
    pub e: Option<i32>,
    pub unambiguous: bool,
    pub candidates: Vec<Corollary1Outcome>,
}

/// Tries `e ∈ {−1, 0, 1}` and reports which values pass.
pub fn select_e(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ESelection> {
    let (_, samples) = corollary_samples(chart, sol, grid)?;
    let candidates: Vec<_> = [-1, 0, 1]
        .iter()
        .map(|&e| corollary_reports(&samples, e, tolerance))
        .collect();
    let passing: Vec<i32> = candidates.iter().filter(|c| c.joint.pass).map(|c| c.e).collect();
    let unambiguous = passing.len() == 1;
    Ok(ESelection {
        e: if unambiguous { Some(passing[0]) } else { None },
        unambiguous,
        candidates,
    })
}
