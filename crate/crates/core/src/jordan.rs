//! The Jordan algebra of Sinyukov solutions on a chart with constant `K ≠ 0`
//! and the bracket of parallel symmetric forms on the cone.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cone::{self, ConeSpace};
use crate::dsl::Expr;
use crate::fields::{self, ConcircularCandidate, SinyukovSolution, SolutionValues};
use crate::geometry::{BilinearField, CovectorField, ExprMatrix, MetricChart, SampleGrid};
use crate::linalg;
use crate::report::{combine, ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

/// Tolerance for admitting elements and re-verifying products.
pub const ADMISSION_TOLERANCE: f64 = 1e-8;

/// A solution that passed the Sinyukov and V_n(K) checks.
#[derive(Clone, Debug)]
pub struct JordanElement {
    sol: SinyukovSolution,
    admission: Vec<ResidualReport>,
}

impl JordanElement {
    pub fn solution(&self) -> &SinyukovSolution {
        &self.sol
    }

    pub fn admission(&self) -> &[ResidualReport] {
        &self.admission
    }
}

#[derive(Clone, Debug)]
pub struct JordanAlgebra {
    chart: MetricChart,
    k: f64,
    grid: SampleGrid,
    tolerance: f64,
}

impl JordanAlgebra {
    pub fn new(chart: &MetricChart, k: f64, grid: SampleGrid) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Invalid(format!("the algebra needs a finite K != 0, got {k}")));
        }
        Ok(JordanAlgebra {
            chart: chart.clone(),
            k,
            grid,
            tolerance: ADMISSION_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    /// Verifies the Sinyukov and V_n(K) identities with the algebra's `K`.
    pub fn admit(&self, sol: &SinyukovSolution) -> Result<JordanElement> {
        if let Some(k) = sol.k {
            if k != self.k {
                return Err(Error::Precondition(format!(
                    "element declares K = {k}, the algebra uses K = {}",
                    self.k
                )));
            }
        }
        let mut sol = sol.clone();
        sol.k = Some(self.k);
        let s = fields::check_sinyukov(&self.chart, &sol, &self.grid, self.tolerance)?;
        let v = fields::check_vnk(&self.chart, &sol, &self.grid, self.tolerance)?;
        let admission = vec![s, v.lambda, v.mu];
        if let Some(bad) = admission.iter().find(|r| !r.pass) {
            return Err(Error::Precondition(format!(
                "element rejected: {} residual {:e} exceeds {:e}",
                bad.equation, bad.max, bad.tolerance
            )));
        }
        Ok(JordanElement { sol, admission })
    }

    pub fn unit(&self) -> Result<JordanElement> {
        self.admit(&SinyukovSolution::unit(&self.chart, self.k)?)
    }

    /// The product as expressions, not yet verified.
    pub fn product_solution(&self, e1: &JordanElement, e2: &JordanElement) -> SinyukovSolution {
        product_expr(&self.chart, self.k, &e1.sol, &e2.sol)
    }

    /// Product followed by re-verification of the result.
    pub fn multiply(&self, e1: &JordanElement, e2: &JordanElement) -> Result<JordanElement> {
        let sol = self.product_solution(e1, e2);
        self.admit(&sol).map_err(|e| match e {
            Error::Precondition(msg) => Error::Precondition(format!("product not closed: {msg}")),
            other => other,
        })
    }

    pub fn values(&self, e: &JordanElement, p: &[f64]) -> Result<SolutionValues> {
        e.sol.values(&self.chart, p)
    }
}

fn sum(terms: impl Iterator<Item = Expr>) -> Expr {
    terms.fold(Expr::zero(), |a, b| a + b)
}

/// `2a³ = K(a² g⁻¹ a¹ + a¹ g⁻¹ a²) − (λ¹⊗λ² + λ²⊗λ¹)`,
/// `2λ³ = K(a² g⁻¹ λ¹ + a¹ g⁻¹ λ²) − (μ¹λ² + μ²λ¹)`,
/// `μ³ = K g⁻¹(λ¹, λ²) − μ¹μ²`, built from the symbolic inverse metric.
pub fn product_expr(chart: &MetricChart, k: f64, s1: &SinyukovSolution, s2: &SinyukovSolution) -> SinyukovSolution {
    let n = chart.dim();
    let (ginv, _) = chart.symbolic_inverse();
    let kk = Expr::num(k);
    let half = Expr::num(0.5);
    let (a1, a2) = (&s1.a.comps, &s2.a.comps);
    let (l1, l2) = (&s1.lambda.comps, &s2.lambda.comps);
    // (x g⁻¹ y)_ij
    let sandwich = |x: &ExprMatrix, y: &ExprMatrix, i: usize, j: usize| {
        sum((0..n).flat_map(|s| (0..n).map(move |t| (s, t))).filter_map(|(s, t)| {
            let gi = ginv.get(s, t);
            if gi.is_zero() {
                None
            } else {
                Some(&(x.get(i, s) * gi) * y.get(t, j))
            }
        }))
    };
    let apply = |x: &ExprMatrix, v: &[Expr], i: usize| {
        sum((0..n).flat_map(|s| (0..n).map(move |t| (s, t))).filter_map(|(s, t)| {
            let gi = ginv.get(s, t);
            if gi.is_zero() {
                None
            } else {
                Some(&(x.get(i, s) * gi) * &v[t])
            }
        }))
    };
    let a = ExprMatrix::symmetric_from_fn(n, |i, j| {
        let m = sandwich(a2, a1, i, j) + sandwich(a1, a2, i, j);
        let l = &(&l1[i] * &l2[j]) + &(&l2[i] * &l1[j]);
        &half * &(&(&kk * &m) - &l)
    });
    let lambda = (0..n)
        .map(|i| {
            let m = apply(a2, l1, i) + apply(a1, l2, i);
            let l = &(&s1.mu * &l2[i]) + &(&s2.mu * &l1[i]);
            &half * &(&(&kk * &m) - &l)
        })
        .collect();
    let contract = |x: &[Expr], y: &[Expr]| {
        sum((0..n).flat_map(|s| (0..n).map(move |t| (s, t))).filter_map(|(s, t)| {
            let gi = ginv.get(s, t);
            if gi.is_zero() {
                None
            } else {
                Some(&(&x[s] * gi) * &y[t])
            }
        }))
    };
    let inner = &half * &(contract(l1, l2) + contract(l2, l1));
    let mu = &(&kk * &inner) - &(&s1.mu * &s2.mu);
    SinyukovSolution::new(
        BilinearField::new(a),
        CovectorField::new(lambda),
        mu,
        Some(k),
    )
}

/// Pointwise product from values and the inverse metric. Swapping the
/// arguments reproduces the result bit for bit.
pub fn product_values(k: f64, ginv: &DMatrix<f64>, v1: &SolutionValues, v2: &SolutionValues) -> SolutionValues {
    let m = &v2.a * ginv * &v1.a;
    let nn = &v1.a * ginv * &v2.a;
    let ll = &v1.lambda * v2.lambda.transpose() + &v2.lambda * v1.lambda.transpose();
    let a = ((m + nn) * k - ll) * 0.5;
    let p = &v2.a * (ginv * &v1.lambda);
    let q = &v1.a * (ginv * &v2.lambda);
    let lambda = ((p + q) * k - (&v2.lambda * v1.mu + &v1.lambda * v2.mu)) * 0.5;
    let x = v1.lambda.dot(&(ginv * &v2.lambda));
    let y = v2.lambda.dot(&(ginv * &v1.lambda));
    let mu = k * (0.5 * (x + y)) - v1.mu * v2.mu;
    SolutionValues { a, lambda, mu }
}

/// `{ã; b̃} = ½(ã G⁻¹ b̃ + b̃ G⁻¹ ã)` from values.
pub fn bracket_values(g_inv: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    (a * g_inv * b + b * g_inv * a) * 0.5
}

/// The bracket as expressions, using the cone's symbolic inverse metric.
pub fn bracket_expr(cone: &ConeSpace, a: &BilinearField, b: &BilinearField) -> BilinearField {
    let chart = cone.chart();
    let n = chart.dim();
    let (ginv, _) = chart.symbolic_inverse();
    let half = Expr::num(0.5);
    let term = |x: &ExprMatrix, y: &ExprMatrix, i: usize, j: usize| {
        sum((0..n).flat_map(|s| (0..n).map(move |t| (s, t))).filter_map(|(s, t)| {
            let gi = ginv.get(s, t);
            if gi.is_zero() {
                None
            } else {
                Some(&(x.get(i, s) * gi) * y.get(t, j))
            }
        }))
    };
    BilinearField::new(ExprMatrix::symmetric_from_fn(n, |i, j| {
        &half * &(term(&a.comps, &b.comps, i, j) + term(&b.comps, &a.comps, i, j))
    }))
}

/// Bracket of two parallel forms, with the result checked for parallelity.
pub fn jordan_bracket(
    cone: &ConeSpace,
    a: &BilinearField,
    b: &BilinearField,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<(BilinearField, ResidualReport)> {
    for f in [a, b] {
        let r = cone::check_parallel_bilinear(cone, f, grid, tolerance)?;
        if !r.pass {
            return Err(Error::Precondition(format!(
                "bracket argument is not parallel (max residual {:e})",
                r.max
            )));
        }
    }
    let c = bracket_expr(cone, a, b);
    let r = cone::check_parallel_bilinear(cone, &c, grid, tolerance)?;
    Ok((c, r))
}

/// `‖lift(e1∘e2) − {lift e1; lift e2}‖∞` over the cone grid.
pub fn check_isomorphism(
    alg: &JordanAlgebra,
    cone: &ConeSpace,
    e1: &JordanElement,
    e2: &JordanElement,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ResidualReport> {
    if cone.k() != alg.k {
        return Err(Error::Invalid(format!(
            "cone uses K = {}, the algebra K = {}",
            cone.k(),
            alg.k
        )));
    }
    if cone.base().coords() != alg.chart.coords() {
        return Err(Error::Invalid("cone and algebra use different base charts".into()));
    }
    let product = cone::lift_solution_raw(cone, &alg.product_solution(e1, e2));
    let l1 = cone::lift_solution_raw(cone, &e1.sol);
    let l2 = cone::lift_solution_raw(cone, &e2.sol);
    let chart = cone.chart();
    let mut acc = ResidualAccumulator::new("isomorphism", tolerance);
    for p in &grid.points {
        let ginv = chart.inverse_metric(p)?;
        let lhs = chart.eval_matrix(&product.comps, p)?;
        let a = chart.eval_matrix(&l1.comps, p)?;
        let b = chart.eval_matrix(&l2.comps, p)?;
        let rhs = bracket_values(&ginv, &a, &b);
        acc.push(p, (lhs - rhs).amax());
    }
    Ok(acc.finish())
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomsOutcome {
    pub commutativity: ResidualReport,
    pub jordan_identity: ResidualReport,
    pub unit_left: ResidualReport,
    pub unit_right: ResidualReport,
    pub joint: ResidualReport,
}

/// Commutativity and the Jordan identity `(x∘y)∘(x∘x) = x∘(y∘(x∘x))` for
/// every ordered pair, plus both unit laws, all pointwise.
pub fn check_jordan_axioms(alg: &JordanAlgebra, elements: &[JordanElement]) -> Result<AxiomsOutcome> {
    if elements.is_empty() {
        return Err(Error::Invalid("at least one element is required".into()));
    }
    let k = alg.k;
    let unit = alg.unit()?;
    let mut comm = ResidualAccumulator::new("commutativity", 1e-10);
    let mut jordan = ResidualAccumulator::new("jordan-identity", 1e-8);
    let mut left = ResidualAccumulator::new("unit-left", 1e-10);
    let mut right = ResidualAccumulator::new("unit-right", 1e-10);
    for p in &alg.grid.points {
        let ginv = alg.chart.inverse_metric(p)?;
        let vals = elements
            .iter()
            .map(|e| alg.values(e, p))
            .collect::<Result<Vec<_>>>()?;
        let u = alg.values(&unit, p)?;
        let prod = |x: &SolutionValues, y: &SolutionValues| product_values(k, &ginv, x, y);
        let mut c: f64 = 0.0;
        let mut j: f64 = 0.0;
        let mut l: f64 = 0.0;
        let mut r: f64 = 0.0;
        for x in &vals {
            l = l.max(prod(&u, x).max_abs_diff(x));
            r = r.max(prod(x, &u).max_abs_diff(x));
            let xx = prod(x, x);
            for y in &vals {
                c = c.max(prod(x, y).max_abs_diff(&prod(y, x)));
                let lhs = prod(&prod(x, y), &xx);
                let rhs = prod(x, &prod(y, &xx));
                j = j.max(lhs.max_abs_diff(&rhs));
            }
        }
        comm.push(p, c);
        jordan.push(p, j);
        left.push(p, l);
        right.push(p, r);
    }
    let (commutativity, jordan_identity, unit_left, unit_right) =
        (comm.finish(), jordan.finish(), left.finish(), right.finish());
    let joint = combine(
        "jordan-axioms",
        &[&commutativity, &jordan_identity, &unit_left, &unit_right],
    );
    Ok(AxiomsOutcome {
        commutativity,
        jordan_identity,
        unit_left,
        unit_right,
        joint,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorProjection {
    pub element: usize,
    /// Index pair `(α, β)` of the generator `sym(φ^α ⊗ φ^β)`.
    pub generator: (usize, usize),
    pub residual: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealOutcome {
    pub generator_pairs: Vec<(usize, usize)>,
    pub generator_rank: usize,
    pub rank_deficient: bool,
    pub projections: Vec<GeneratorProjection>,
    /// `F[element][β][γ]` with `Φ^β = Σ_γ F^β_γ φ̃^γ`.
    pub coefficient_matrices: Vec<Vec<Vec<f64>>>,
    pub projection: ResidualReport,
    /// Fit residual of `Φ^β` in the span of the lifted fields.
    pub coefficient_fit: ResidualReport,
    /// Product rebuilt from `F` against the direct product, at `x⁰ = 0`.
    pub reconstruction: ResidualReport,
    pub joint: ResidualReport,
}

/// Projects every product `e ∘ b` of an element with a generator
/// `b = sym(φ^α ⊗ φ^β)` onto the span of all generators, and recovers the
/// constants `F^β_γ` of `Φ^β = ã G⁻¹ φ̃^β = Σ_γ F^β_γ φ̃^γ` on the cone slice
/// `x⁰ = 0`, rebuilding the bracket from them.
pub fn check_ideal(
    alg: &JordanAlgebra,
    fields_list: &[ConcircularCandidate],
    elements: &[JordanElement],
    tolerance: f64,
) -> Result<IdealOutcome> {
    let m = fields_list.len();
    if m == 0 {
        return Err(Error::Invalid("at least one concircular field is required".into()));
    }
    let k = alg.k;
    let n = alg.chart.dim();
    let mut pairs = Vec::new();
    let mut generators = Vec::new();
    for al in 0..m {
        for be in al..m {
            let sol = SinyukovSolution::from_concircular_pair(&fields_list[al], &fields_list[be])?;
            generators.push(alg.admit(&sol)?);
            pairs.push((al, be));
        }
    }
    let pts = &alg.grid.points;
    let mut ginvs = Vec::with_capacity(pts.len());
    let mut gen_vals: Vec<Vec<SolutionValues>> = vec![Vec::with_capacity(pts.len()); generators.len()];
    let mut el_vals: Vec<Vec<SolutionValues>> = vec![Vec::with_capacity(pts.len()); elements.len()];
    let mut lifted: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(pts.len()); m];
    for p in pts {
        ginvs.push(alg.chart.inverse_metric(p)?);
        for (g, out) in generators.iter().zip(gen_vals.iter_mut()) {
            out.push(alg.values(g, p)?);
        }
        for (e, out) in elements.iter().zip(el_vals.iter_mut()) {
            out.push(alg.values(e, p)?);
        }
        for (c, out) in fields_list.iter().zip(lifted.iter_mut()) {
            let rho = alg.chart.eval(&c.rho, p)?;
            let phi = alg.chart.eval_vec(&c.phi.comps, p)?;
            out.push(DVector::from_iterator(n + 1, std::iter::once(rho).chain(phi.iter().copied())));
        }
    }
    let stack = |vals: &[SolutionValues]| -> DVector<f64> {
        DVector::from_vec(vals.iter().flat_map(|v| v.stacked()).collect())
    };
    let design = DMatrix::from_columns(&gen_vals.iter().map(|v| stack(v)).collect::<Vec<_>>());
    let generator_rank = linalg::column_rank(&design, 1e-8);
    let lifted_design = DMatrix::from_columns(
        &lifted
            .iter()
            .map(|v| DVector::from_vec(v.iter().flat_map(|x| x.iter().copied()).collect()))
            .collect::<Vec<_>>(),
    );

    let mut projection = ResidualAccumulator::new("ideal-projection", tolerance);
    let mut fit = ResidualAccumulator::new("ideal-coefficient-fit", tolerance);
    let mut rebuild = ResidualAccumulator::new("ideal-reconstruction", tolerance);
    let mut projections = Vec::new();
    let mut matrices = Vec::new();
    for (ei, ev) in el_vals.iter().enumerate() {
        // F^β_γ from Φ^β = ã₀ G₀⁻¹ φ̃^β at x⁰ = 0
        let mut f = vec![vec![0.0; m]; m];
        for be in 0..m {
            let rhs: Vec<f64> = (0..pts.len())
                .flat_map(|idx| {
                    let at = lifted_form(&ev[idx]);
                    let g0 = cone_inverse_at_origin(k, &ginvs[idx]);
                    (at * g0 * &lifted[be][idx]).iter().copied().collect::<Vec<_>>()
                })
                .collect();
            let rhs = DVector::from_vec(rhs);
            let coef = linalg::least_squares(&lifted_design, &rhs);
            let resid = &lifted_design * &coef - &rhs;
            for (idx, p) in pts.iter().enumerate() {
                let chunk = resid.rows(idx * (n + 1), n + 1);
                fit.push(p, chunk.amax());
            }
            f[be] = coef.iter().copied().collect();
        }
        for (gi, &(al, be)) in pairs.iter().enumerate() {
            let prods: Vec<SolutionValues> = (0..pts.len())
                .map(|idx| product_values(k, &ginvs[idx], &ev[idx], &gen_vals[gi][idx]))
                .collect();
            let target = stack(&prods);
            let coef = linalg::least_squares(&design, &target);
            let resid = &design * &coef - &target;
            let width = n * n + n + 1;
            let mut worst: f64 = 0.0;
            for (idx, p) in pts.iter().enumerate() {
                let r = resid.rows(idx * width, width).amax();
                worst = worst.max(r);
                projection.push(p, r);
            }
            projections.push(GeneratorProjection {
                element: ei,
                generator: (al, be),
                residual: worst,
                coefficients: coef.iter().copied().collect(),
            });
            // b = Σ C_{γδ} φ̃^γ ⊗ φ̃^δ with C symmetric
            let mut c = vec![vec![0.0; m]; m];
            if al == be {
                c[al][al] = 1.0;
            } else {
                c[al][be] = 0.5;
                c[be][al] = 0.5;
            }
            for (idx, p) in pts.iter().enumerate() {
                let mut rebuilt = DMatrix::zeros(n + 1, n + 1);
                for (ga, crow) in c.iter().enumerate() {
                    for (de, &cv) in crow.iter().enumerate() {
                        if cv == 0.0 {
                            continue;
                        }
                        for (ep, &fv) in f[de].iter().enumerate() {
                            let u = &lifted[ga][idx];
                            let w = &lifted[ep][idx];
                            rebuilt += (u * w.transpose() + w * u.transpose()) * (0.5 * cv * fv);
                        }
                    }
                }
                let direct = lifted_form(&prods[idx]);
                rebuild.push(p, (rebuilt - direct).amax());
            }
        }
        matrices.push(f);
    }
    let (projection, coefficient_fit, reconstruction) = (projection.finish(), fit.finish(), rebuild.finish());
    let joint = combine("ideal", &[&projection, &coefficient_fit, &reconstruction]);
    Ok(IdealOutcome {
        rank_deficient: generator_rank < pairs.len(),
        generator_pairs: pairs,
        generator_rank,
        projections,
        coefficient_matrices: matrices,
        projection,
        coefficient_fit,
        reconstruction,
        joint,
    })
}

/// `[[μ, λ_j], [λ_i, a_ij]]`, the lift at `x⁰ = 0`.
fn lifted_form(v: &SolutionValues) -> DMatrix<f64> {
    let n = v.lambda.len();
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => v.mu,
        (0, j) => v.lambda[j - 1],
        (i, 0) => v.lambda[i - 1],
        (i, j) => v.a[(i - 1, j - 1)],
    })
}

/// `[[−1, 0], [0, K g⁻¹]]`
fn cone_inverse_at_origin(k: f64, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ginv.nrows();
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => -1.0,
        (0, _) | (_, 0) => 0.0,
        (i, j) => k * ginv[(i - 1, j - 1)],
    })
}
