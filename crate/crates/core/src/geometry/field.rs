use nalgebra::{DMatrix, DVector};

use super::chart::MetricChart;
use super::matrix::ExprMatrix;
use crate::dsl::{differentiate, Expr};
use crate::{Error, Result};

/// Covector components `w_i` as expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct CovectorField {
    pub comps: Vec<Expr>,
}

impl CovectorField {
    pub fn new(comps: Vec<Expr>) -> Self {
        CovectorField { comps }
    }

    pub fn zero(n: usize) -> Self {
        CovectorField {
            comps: vec![Expr::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn check(&self, chart: &MetricChart) -> Result<()> {
        if self.dim() != chart.dim() {
            return Err(Error::Invalid(format!(
                "covector has {} components, chart dimension is {}",
                self.dim(),
                chart.dim()
            )));
        }
        self.comps.iter().try_for_each(|e| chart.check_expr(e))
    }

    pub fn scale(&self, factor: &Expr) -> Self {
        CovectorField::new(self.comps.iter().map(|c| factor * c).collect())
    }

    pub fn jet(&self, coords: &[String]) -> CovectorJet {
        CovectorJet::new(self, coords)
    }
}

/// Symmetric bilinear form `a_ij` as expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearField {
    pub comps: ExprMatrix,
}

impl BilinearField {
    pub fn new(comps: ExprMatrix) -> Self {
        BilinearField { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.dim()
    }

    pub fn check(&self, chart: &MetricChart) -> Result<()> {
        if self.dim() != chart.dim() {
            return Err(Error::Invalid(format!(
                "bilinear form has dimension {}, chart dimension is {}",
                self.dim(),
                chart.dim()
            )));
        }
        if !self.comps.is_symmetric() {
            return Err(Error::Invalid("bilinear form is not symmetric".into()));
        }
        self.comps.entries().iter().try_for_each(|e| chart.check_expr(e))
    }

    pub fn jet(&self, coords: &[String]) -> BilinearJet {
        BilinearJet::new(&self.comps, coords)
    }
}

/// A scalar together with its symbolic gradient.
#[derive(Clone, Debug)]
pub struct ScalarJet {
    pub value: Expr,
    pub grad: Vec<Expr>,
}

impl ScalarJet {
    pub fn new(value: &Expr, coords: &[String]) -> Self {
        ScalarJet {
            value: value.clone(),
            grad: coords.iter().map(|c| differentiate(value, c)).collect(),
        }
    }

    pub fn eval(&self, chart: &MetricChart, p: &[f64]) -> Result<(f64, DVector<f64>)> {
        Ok((chart.eval(&self.value, p)?, chart.eval_vec(&self.grad, p)?))
    }
}

/// Covector components with all first partials.
#[derive(Clone, Debug)]
pub struct CovectorJet {
    pub value: Vec<Expr>,
    /// `partials[j][i] = ∂_j w_i`
    pub partials: Vec<Vec<Expr>>,
}

impl CovectorJet {
    pub fn new(field: &CovectorField, coords: &[String]) -> Self {
        CovectorJet {
            value: field.comps.clone(),
            partials: coords
                .iter()
                .map(|c| field.comps.iter().map(|e| differentiate(e, c)).collect())
                .collect(),
        }
    }

    /// Value and the partial matrix `(j, i) -> ∂_j w_i`.
    pub fn eval(&self, chart: &MetricChart, p: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.value.len();
        let value = chart.eval_vec(&self.value, p)?;
        let mut d = DMatrix::zeros(n, n);
        for (j, row) in self.partials.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                d[(j, i)] = chart.eval(e, p)?;
            }
        }
        Ok((value, d))
    }
}

/// Symmetric form with all first partials.
#[derive(Clone, Debug)]
pub struct BilinearJet {
    pub value: ExprMatrix,
    pub partials: Vec<ExprMatrix>,
}

impl BilinearJet {
    pub fn new(m: &ExprMatrix, coords: &[String]) -> Self {
        BilinearJet {
            value: m.clone(),
            partials: coords.iter().map(|c| m.differentiate(c)).collect(),
        }
    }

    pub fn eval(&self, chart: &MetricChart, p: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let value = chart.eval_matrix(&self.value, p)?;
        let partials = self
            .partials
            .iter()
            .map(|m| chart.eval_matrix(m, p))
            .collect::<Result<Vec<_>>>()?;
        Ok((value, partials))
    }
}

/// `∇_j w_i` at `p`, indexed `(j, i)`.
pub fn covariant_derivative_covector(
    chart: &MetricChart,
    field: &CovectorField,
    p: &[f64],
) -> Result<DMatrix<f64>> {
    field.check(chart)?;
    let geo = chart.geometry_at(p)?;
    let (v, d) = field.jet(chart.coords()).eval(chart, p)?;
    Ok(geo.nabla_covector(&v, &d))
}

/// `∇_k a_ij` at `p`, indexed `[k][(i, j)]`.
pub fn covariant_derivative_bilinear(
    chart: &MetricChart,
    field: &BilinearField,
    p: &[f64],
) -> Result<Vec<DMatrix<f64>>> {
    field.check(chart)?;
    let geo = chart.geometry_at(p)?;
    let (v, d) = field.jet(chart.coords()).eval(chart, p)?;
    Ok(geo.nabla_bilinear(&v, &d))
}

pub fn raise_index(chart: &MetricChart, p: &[f64], covector: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(chart.inverse_metric(p)? * covector)
}

pub fn lower_index(chart: &MetricChart, p: &[f64], vector: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(chart.eval_matrix(chart.metric(), p)? * vector)
}
