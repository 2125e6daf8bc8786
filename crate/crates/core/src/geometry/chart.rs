use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::matrix::ExprMatrix;
use crate::dsl::{Bindings, Expr, Func, PointEnv};
use crate::linalg;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

/// A coordinate chart carrying a symmetric metric of expressions.
#[derive(Debug)]
pub struct MetricChart {
    coords: Vec<String>,
    domain: Vec<Interval>,
    metric: ExprMatrix,
    bindings: Bindings,
    // partials[k] = d_k g
    partials: Vec<ExprMatrix>,
    inverse: OnceLock<(ExprMatrix, Expr)>,
}

impl Clone for MetricChart {
    fn clone(&self) -> Self {
        MetricChart {
            coords: self.coords.clone(),
            domain: self.domain.clone(),
            metric: self.metric.clone(),
            bindings: self.bindings.clone(),
            partials: self.partials.clone(),
            inverse: self.inverse.clone(),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    name == "pi" || Func::from_name(name).is_some()
}

impl MetricChart {
    pub fn new(
        coords: Vec<String>,
        domain: Vec<Interval>,
        metric: ExprMatrix,
        bindings: Bindings,
    ) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::Invalid(format!("chart dimension must be >= 2, got {n}")));
        }
        if domain.len() != n || metric.dim() != n {
            return Err(Error::Invalid(format!(
                "chart of dimension {n} needs {n} domain intervals and an {n}x{n} metric"
            )));
        }
        for (i, c) in coords.iter().enumerate() {
            if is_reserved(c) || coords[..i].contains(c) {
                return Err(Error::Invalid(format!("invalid or duplicate coordinate name `{c}`")));
            }
            if bindings.contains_key(c) {
                return Err(Error::Invalid(format!("`{c}` is both a coordinate and a constant")));
            }
        }
        for (i, iv) in domain.iter().enumerate() {
            if !iv.lo.is_finite() || !iv.hi.is_finite() || iv.lo >= iv.hi {
                return Err(Error::Invalid(format!("empty domain interval for coordinate {i}")));
            }
        }
        if !metric.is_symmetric() {
            return Err(Error::Invalid("metric is not symmetric".into()));
        }
        for e in metric.entries() {
            for v in e.variables() {
                if !coords.contains(&v) && !bindings.contains_key(&v) {
                    return Err(Error::UnknownVariable(v));
                }
            }
        }
        let partials = coords.iter().map(|c| metric.differentiate(c)).collect();
        Ok(MetricChart {
            coords,
            domain,
            metric,
            bindings,
            partials,
            inverse: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn metric(&self) -> &ExprMatrix {
        &self.metric
    }

    pub fn bindings(&self) -> &Bindings {
        &self.bindings
    }

    pub fn metric_partials(&self) -> &[ExprMatrix] {
        &self.partials
    }

    /// Same chart with a different domain box.
    pub fn with_domain(&self, domain: Vec<Interval>) -> Result<Self> {
        MetricChart::new(
            self.coords.clone(),
            domain,
            self.metric.clone(),
            self.bindings.clone(),
        )
    }

    pub fn env<'a>(&'a self, point: &'a [f64]) -> PointEnv<'a> {
        PointEnv {
            coords: &self.coords,
            point,
            bindings: &self.bindings,
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && self.domain.iter().zip(point).all(|(iv, x)| iv.contains(*x))
    }

    /// Checks that every variable of `e` is a coordinate or a bound constant.
    pub fn check_expr(&self, e: &Expr) -> Result<()> {
        for v in e.variables() {
            if !self.coords.contains(&v) && !self.bindings.contains_key(&v) {
                return Err(Error::UnknownVariable(v));
            }
        }
        Ok(())
    }

    pub fn eval(&self, e: &Expr, point: &[f64]) -> Result<f64> {
        e.eval(&self.env(point)).map_err(|source| Error::Eval {
            point: point.to_vec(),
            source,
        })
    }

    pub fn eval_matrix(&self, m: &ExprMatrix, point: &[f64]) -> Result<DMatrix<f64>> {
        m.eval(&self.env(point)).map_err(|source| Error::Eval {
            point: point.to_vec(),
            source,
        })
    }

    pub fn eval_vec(&self, v: &[Expr], point: &[f64]) -> Result<DVector<f64>> {
        let env = self.env(point);
        let vals = v
            .iter()
            .map(|e| e.eval(&env))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|source| Error::Eval {
                point: point.to_vec(),
                source,
            })?;
        Ok(DVector::from_vec(vals))
    }

    /// Symbolic inverse metric (adjugate over determinant) and determinant.
    pub fn symbolic_inverse(&self) -> &(ExprMatrix, Expr) {
        self.inverse.get_or_init(|| self.metric.inverse())
    }

    /// Numeric inverse metric at `point`.
    pub fn inverse_metric(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.eval_matrix(&self.metric, point)?;
        linalg::invert_symmetric(&g).ok_or_else(|| Error::SingularMetric {
            point: point.to_vec(),
        })
    }

    /// Metric, inverse, first partials and Christoffel symbols at `point`.
    pub fn geometry_at(&self, point: &[f64]) -> Result<PointGeometry> {
        let n = self.dim();
        let g = self.eval_matrix(&self.metric, point)?;
        let ginv = linalg::invert_symmetric(&g).ok_or_else(|| Error::SingularMetric {
            point: point.to_vec(),
        })?;
        let dg = self
            .partials
            .iter()
            .map(|m| self.eval_matrix(m, point))
            .collect::<Result<Vec<_>>>()?;
        // first kind: lowered[s][(i,j)] = 1/2 (d_i g_sj + d_j g_si - d_s g_ij)
        let mut lowered = vec![DMatrix::zeros(n, n); n];
        for s in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (dg[i][(s, j)] + dg[j][(s, i)] - dg[s][(i, j)]);
                    lowered[s][(i, j)] = v;
                    lowered[s][(j, i)] = v;
                }
            }
        }
        let mut gamma = vec![DMatrix::zeros(n, n); n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v: f64 = (0..n).map(|s| ginv[(k, s)] * lowered[s][(i, j)]).sum();
                    gamma[k][(i, j)] = v;
                    gamma[k][(j, i)] = v;
                }
            }
        }
        Ok(PointGeometry {
            point: point.to_vec(),
            g,
            ginv,
            dg,
            gamma,
        })
    }
}

/// Metric data evaluated at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `dg[k][(i, j)] = d_k g_ij`
    pub dg: Vec<DMatrix<f64>>,
    /// `gamma[k][(i, j)] = Γ^k_ij`
    pub gamma: Vec<DMatrix<f64>>,
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn raise(&self, covector: &DVector<f64>) -> DVector<f64> {
        &self.ginv * covector
    }

    pub fn lower(&self, vector: &DVector<f64>) -> DVector<f64> {
        &self.g * vector
    }

    /// `out[(j, i)] = ∇_j φ_i` from values `φ_i` and partials `partial[(j, i)] = ∂_j φ_i`.
    pub fn nabla_covector(&self, value: &DVector<f64>, partial: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, i| {
            partial[(j, i)] - (0..n).map(|s| self.gamma[s][(i, j)] * value[s]).sum::<f64>()
        })
    }

    /// `out[k][(i, j)] = ∇_k a_ij`.
    pub fn nabla_bilinear(&self, value: &DMatrix<f64>, partial: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    let mut v = partial[k][(i, j)];
                    for s in 0..n {
                        v -= self.gamma[s][(k, i)] * value[(s, j)];
                        v -= self.gamma[s][(k, j)] * value[(i, s)];
                    }
                    v
                })
            })
            .collect()
    }

    /// `Γ^k_ij v^i w^j` as a vector indexed by `k`.
    pub fn contract_christoffel(&self, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n, |k, _| (v.transpose() * &self.gamma[k] * w)[(0, 0)])
    }

    /// `‖g g⁻¹ − I‖∞`
    pub fn inverse_defect(&self) -> f64 {
        let n = self.dim();
        (&self.g * &self.ginv - DMatrix::<f64>::identity(n, n)).amax()
    }
}
