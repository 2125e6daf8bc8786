use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SinyukovSolution;
use crate::geometry::{random_points, CovectorField, Interval, MetricChart, SampleGrid};
use crate::linalg;
use crate::quadrature::CumulativeRule;
use crate::report::{max_abs, ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

const NODES: usize = 64;

#[derive(Clone, Debug)]
pub struct SequenceOptions {
    pub base_point: Vec<f64>,
    pub max_len: usize,
    /// Tolerance for parallelity and the orthogonality identities.
    pub tolerance: f64,
    /// Relative threshold of the rank test.
    pub rank_tolerance: f64,
    /// Seed for the `4n` rank-test points.
    pub seed: u64,
}

impl SequenceOptions {
    pub fn new(base_point: Vec<f64>, max_len: usize) -> Self {
        SequenceOptions {
            base_point,
            max_len,
            tolerance: 1e-8,
            rank_tolerance: 1e-8,
            seed: crate::geometry::DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceMember {
    pub index: usize,
    /// `|∇φ^α|`
    pub parallel: ResidualReport,
    /// `φ^α(λ*)`
    pub orthogonality: ResidualReport,
    /// `φ¹(A^{α−1} λ*)`
    pub power_orthogonality: ResidualReport,
    /// `λ(A^{α−1} φ*)`
    pub lambda_orthogonality: ResidualReport,
    /// Components at the rank-test points, `[point][i]`.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    /// 1-based index of the member with `φ^α(λ*) ≠ 0`.
    pub index: usize,
    pub max: f64,
    pub worst_point: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceOutcome {
    pub base_point: Vec<f64>,
    pub input_parallel: ResidualReport,
    pub lambda_parallel: ResidualReport,
    pub closedness: ResidualReport,
    /// Linearly independent members, starting with the input field.
    pub members: Vec<SequenceMember>,
    pub rank_points: Vec<Vec<f64>>,
    /// Coefficients expressing the first dependent iterate through the members.
    pub dependency: Option<Vec<f64>>,
    pub obstruction: Option<Obstruction>,
    pub pass: bool,
}

impl SequenceOutcome {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Per-point data of every iterate: value and partials at the point.
struct PointIterates {
    values: Vec<DVector<f64>>,
    partials: Vec<DMatrix<f64>>,
    a_value: DMatrix<f64>,
    lambda_value: DVector<f64>,
}

struct Context<'a> {
    chart: &'a MetricChart,
    sol: &'a SinyukovSolution,
    phi: &'a CovectorField,
    rule: CumulativeRule,
    base: Vec<f64>,
    phi_partials: Vec<Vec<crate::dsl::Expr>>,
    a_partials: Vec<crate::geometry::ExprMatrix>,
    lambda_partials: Vec<Vec<crate::dsl::Expr>>,
}

impl Context<'_> {
    /// `B = a g⁻¹` so that `(Aφ)_i = a^t_i φ_t = (B φ)_i`.
    fn operator(&self, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
        let ginv = self.chart.inverse_metric(p)?;
        let a = self.chart.eval_matrix(&self.sol.a.comps, p)?;
        let lambda = self.chart.eval_vec(&self.sol.lambda.comps, p)?;
        Ok((&a * &ginv, ginv, lambda))
    }

    /// Iterates `φ^{α+1} = A φ^α − f^α λ` up to `levels` members at `p`,
    /// with potentials integrated along the segment from the base point.
    fn iterate(&self, p: &[f64], levels: usize) -> Result<PointIterates> {
        let n = self.chart.dim();
        let d: Vec<f64> = p.iter().zip(&self.base).map(|(x, b)| x - b).collect();
        let mut node_b = Vec::with_capacity(self.rule.len());
        let mut node_l = Vec::with_capacity(self.rule.len());
        let mut node_v = Vec::with_capacity(self.rule.len());
        for s in &self.rule.nodes {
            let x: Vec<f64> = self
                .base
                .iter()
                .zip(&d)
                .map(|(b, di)| b + 0.5 * (1.0 + s) * di)
                .collect();
            let (b, _, l) = self.operator(&x)?;
            node_b.push(b);
            node_l.push(l);
            node_v.push(self.chart.eval_vec(&self.phi.comps, &x)?);
        }
        let (b, ginv, lambda) = self.operator(p)?;
        let dg: Vec<DMatrix<f64>> = self
            .chart
            .metric_partials()
            .iter()
            .map(|m| self.chart.eval_matrix(m, p))
            .collect::<Result<_>>()?;
        let a = self.chart.eval_matrix(&self.sol.a.comps, p)?;
        // ∂_k B = (∂_k a) g⁻¹ − a g⁻¹ (∂_k g) g⁻¹
        let db: Vec<DMatrix<f64>> = (0..n)
            .map(|k| {
                let da = self.chart.eval_matrix(&self.a_partials[k], p)?;
                Ok(&da * &ginv - &a * &ginv * &dg[k] * &ginv)
            })
            .collect::<Result<_>>()?;
        let mut dl = DMatrix::zeros(n, n);
        let mut dphi = DMatrix::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                dl[(k, i)] = self.chart.eval(&self.lambda_partials[k][i], p)?;
                dphi[(k, i)] = self.chart.eval(&self.phi_partials[k][i], p)?;
            }
        }
        let mut value = self.chart.eval_vec(&self.phi.comps, p)?;
        let mut out = PointIterates {
            values: vec![value.clone()],
            partials: vec![dphi.clone()],
            a_value: a.clone(),
            lambda_value: lambda.clone(),
        };
        for _ in 1..levels {
            let integrand: Vec<f64> = node_v.iter().map(|v| v.iter().zip(&d).map(|(a, b)| a * b).sum()).collect();
            let (cum, total) = self.rule.integrate(&integrand);
            let f_end = 0.5 * total;
            for (m, v) in node_v.iter_mut().enumerate() {
                let f = 0.5 * cum[m];
                *v = &node_b[m] * &*v - &node_l[m] * f;
            }
            let mut next_d = DMatrix::zeros(n, n);
            for k in 0..n {
                for i in 0..n {
                    let mut s = -value[k] * lambda[i] - f_end * dl[(k, i)];
                    for t in 0..n {
                        s += db[k][(i, t)] * value[t] + b[(i, t)] * dphi[(k, t)];
                    }
                    next_d[(k, i)] = s;
                }
            }
            value = &b * &value - &lambda * f_end;
            dphi = next_d;
            out.values.push(value.clone());
            out.partials.push(dphi.clone());
        }
        Ok(out)
    }
}

/// Builds the sequence of absolutely parallel covectors generated by a
/// parallel `φ` on a space with `∇a = λ⊗g + g⊗λ`, `∇λ = 0`.
///
/// The input must be closed and parallel, and `λ` parallel; otherwise an
/// error is returned. Iteration stops at `max_len` members, at the first
/// iterate lying in the span of the previous ones, or when `φ^α(λ*) ≠ 0`
/// makes the next iterate non-parallel (reported as an obstruction).
pub fn build_parallel_sequence(
    chart: &MetricChart,
    sol: &SinyukovSolution,
    phi: &CovectorField,
    grid: &SampleGrid,
    opts: &SequenceOptions,
) -> Result<SequenceOutcome> {
    sol.check(chart)?;
    phi.check(chart)?;
    let n = chart.dim();
    if opts.base_point.len() != n || !chart.contains(&opts.base_point) {
        return Err(Error::Invalid(format!(
            "base point {:?} is not inside the chart domain",
            opts.base_point
        )));
    }
    if opts.max_len == 0 {
        return Err(Error::Invalid("max_len must be at least 1".into()));
    }
    let tol = opts.tolerance;
    let phi_jet = phi.jet(chart.coords());
    let lambda_jet = sol.lambda.jet(chart.coords());

    let mut input_parallel = ResidualAccumulator::new("sequence-input-parallel", tol);
    let mut lambda_parallel = ResidualAccumulator::new("sequence-lambda-parallel", tol);
    let mut closed = ResidualAccumulator::new("sequence-input-closed", 1e-9);
    for p in &grid.points {
        let geo = chart.geometry_at(p)?;
        let (v, d) = phi_jet.eval(chart, p)?;
        input_parallel.push(p, max_abs(geo.nabla_covector(&v, &d).iter()));
        closed.push(p, max_abs((&d - d.transpose()).iter()));
        let (v, d) = lambda_jet.eval(chart, p)?;
        lambda_parallel.push(p, max_abs(geo.nabla_covector(&v, &d).iter()));
    }
    let (input_parallel, lambda_parallel, closedness) =
        (input_parallel.finish(), lambda_parallel.finish(), closed.finish());
    if !closedness.pass {
        return Err(Error::Precondition(format!(
            "covector is not closed (max |∂_i φ_j − ∂_j φ_i| = {:e}), no potential exists",
            closedness.max
        )));
    }
    if !input_parallel.pass {
        return Err(Error::Precondition(format!(
            "covector is not absolutely parallel (max |∇φ| = {:e})",
            input_parallel.max
        )));
    }
    if !lambda_parallel.pass {
        return Err(Error::Precondition(format!(
            "λ is not absolutely parallel (max |∇λ| = {:e})",
            lambda_parallel.max
        )));
    }

    let ctx = Context {
        chart,
        sol,
        phi,
        rule: CumulativeRule::new(NODES),
        base: opts.base_point.clone(),
        phi_partials: phi_jet.partials.clone(),
        a_partials: sol.a.jet(chart.coords()).partials,
        lambda_partials: lambda_jet.partials.clone(),
    };
    let levels = opts.max_len + 1;
    let grid_iterates = grid
        .points
        .iter()
        .map(|p| ctx.iterate(p, levels))
        .collect::<Result<Vec<_>>>()?;
    let boxed: Vec<Interval> = chart
        .domain()
        .iter()
        .map(|iv| {
            let m = grid.config.inset * (iv.hi - iv.lo);
            Interval::new(iv.lo + m, iv.hi - m)
        })
        .collect();
    let rank_points = random_points(&boxed, 4 * n, opts.seed);
    let rank_iterates = rank_points
        .iter()
        .map(|p| ctx.iterate(p, levels))
        .collect::<Result<Vec<_>>>()?;

    let column = |alpha: usize| -> DVector<f64> {
        DVector::from_iterator(
            rank_iterates.len() * n,
            rank_iterates.iter().flat_map(|it| it.values[alpha].iter().copied()),
        )
    };

    let mut members = Vec::new();
    let mut columns: Vec<DVector<f64>> = Vec::new();
    let mut dependency = None;
    let mut obstruction = None;
    for alpha in 0..levels {
        let col = column(alpha);
        if alpha > 0 {
            let scale = columns.iter().map(|c| c.amax()).fold(col.amax(), f64::max);
            let residual = linalg::orthogonal_residual(&columns, &col);
            if residual.amax() <= opts.rank_tolerance * scale.max(1.0) {
                let basis = DMatrix::from_columns(&columns);
                dependency = Some(linalg::least_squares(&basis, &col).iter().copied().collect());
                break;
            }
            if alpha == opts.max_len {
                break;
            }
        }
        let member = member_reports(chart, grid, &grid_iterates, alpha, tol)?;
        let ortho_fail = !member.orthogonality.pass;
        let samples = rank_iterates
            .iter()
            .map(|it| it.values[alpha].iter().copied().collect())
            .collect();
        let worst = member.orthogonality.clone();
        members.push(SequenceMember { samples, ..member });
        columns.push(col);
        if ortho_fail {
            obstruction = Some(Obstruction {
                index: alpha + 1,
                max: worst.max,
                worst_point: worst.worst_point,
            });
            break;
        }
    }
    // The power forms φ¹(A^{α−1}λ*) and λ(A^{α−1}φ*) follow from φ^α(λ*) = 0
    // only when λ is null, so they are reported but do not decide the verdict.
    let pass = obstruction.is_none()
        && members.iter().all(|m| m.parallel.pass && m.orthogonality.pass);
    Ok(SequenceOutcome {
        base_point: opts.base_point.clone(),
        input_parallel,
        lambda_parallel,
        closedness,
        members,
        rank_points,
        dependency,
        obstruction,
        pass,
    })
}

fn member_reports(
    chart: &MetricChart,
    grid: &SampleGrid,
    iterates: &[PointIterates],
    alpha: usize,
    tol: f64,
) -> Result<SequenceMember> {
    let name = |s: &str| format!("sequence-{}-{s}", alpha + 1);
    let mut parallel = ResidualAccumulator::new(name("parallel"), tol);
    let mut ortho = ResidualAccumulator::new(name("lambda-star"), tol);
    let mut power = ResidualAccumulator::new(name("power-lambda-star"), tol);
    let mut lam = ResidualAccumulator::new(name("lambda-phi-star"), tol);
    for (p, it) in grid.points.iter().zip(iterates) {
        let geo = chart.geometry_at(p)?;
        let v = &it.values[alpha];
        parallel.push(p, max_abs(geo.nabla_covector(v, &it.partials[alpha]).iter()));
        let lambda_star = &geo.ginv * &it.lambda_value;
        ortho.push(p, v.dot(&lambda_star));
        // A acting on vectors: (Aw)^i = g^{is} a_st w^t
        let op = &geo.ginv * &it.a_value;
        let mut w = lambda_star.clone();
        let mut u = &geo.ginv * &it.values[0];
        for _ in 0..alpha {
            w = &op * w;
            u = &op * u;
        }
        power.push(p, it.values[0].dot(&w));
        lam.push(p, it.lambda_value.dot(&u));
    }
    Ok(SequenceMember {
        index: alpha + 1,
        parallel: parallel.finish(),
        orthogonality: ortho.finish(),
        power_orthogonality: power.finish(),
        lambda_orthogonality: lam.finish(),
        samples: Vec::new(),
    })
}
