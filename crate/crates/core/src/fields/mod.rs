//! Residual verifiers for concircular fields, Sinyukov solutions and
//! geodesically equivalent metric pairs on a base chart.

mod concircular;
mod pair;
mod sequence;
mod sinyukov;

use nalgebra::{DMatrix, DVector};

use crate::dsl::Expr;
use crate::geometry::{
    BilinearField, BilinearJet, CovectorField, CovectorJet, ExprMatrix, MetricChart, ScalarJet,
};
use crate::{Error, Result};

pub use concircular::{check_concircular, fit_k, Classification, ConcircularOutcome, KFit, Kind};
pub use pair::{
    check_levi_civita, log_det_potential, psi_field, psi_from_pair, solution_from_metrics,
    transfer_rho, transferred_candidate, GeodesicPair, PsiSource,
};
pub use sequence::{
    build_parallel_sequence, Obstruction, SequenceMember, SequenceOptions, SequenceOutcome,
};
pub use sinyukov::{
    check_corollary1, check_sinyukov, check_vn0, check_vnk, fit_vnk_k, select_e,
    Corollary1Outcome, ESelection, Vn0Outcome, VnkOutcome,
};

/// Zero-detection threshold for dichotomies such as basic/exceptional.
pub const ZERO_THRESHOLD: f64 = 1e-9;

/// A covector `φ_i` with scalar `ρ` claimed to satisfy `∇φ = ρ g`, and
/// optionally `∇ρ = K φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcircularCandidate {
    pub phi: CovectorField,
    pub rho: Expr,
    pub k: Option<f64>,
}

impl ConcircularCandidate {
    pub fn new(phi: CovectorField, rho: Expr, k: Option<f64>) -> Self {
        ConcircularCandidate { phi, rho, k }
    }

    pub fn zero(n: usize) -> Self {
        ConcircularCandidate::new(CovectorField::zero(n), Expr::zero(), None)
    }

    pub fn check(&self, chart: &MetricChart) -> Result<()> {
        self.phi.check(chart)?;
        chart.check_expr(&self.rho)
    }
}

/// A triple `(a, λ, μ)` with constant `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SinyukovSolution {
    pub a: BilinearField,
    pub lambda: CovectorField,
    pub mu: Expr,
    pub k: Option<f64>,
}

impl SinyukovSolution {
    pub fn new(a: BilinearField, lambda: CovectorField, mu: Expr, k: Option<f64>) -> Self {
        SinyukovSolution { a, lambda, mu, k }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn check(&self, chart: &MetricChart) -> Result<()> {
        self.a.check(chart)?;
        self.lambda.check(chart)?;
        chart.check_expr(&self.mu)
    }

    pub fn require_k(&self) -> Result<f64> {
        self.k
            .ok_or_else(|| Error::Invalid("solution carries no constant K".into()))
    }

    /// The unit `(g/K, 0, -1)`.
    pub fn unit(chart: &MetricChart, k: f64) -> Result<Self> {
        if k == 0.0 {
            return Err(Error::Invalid("the unit needs K != 0".into()));
        }
        let kk = Expr::num(k);
        Ok(SinyukovSolution::new(
            BilinearField::new(chart.metric().map(|e| e / &kk)),
            CovectorField::zero(chart.dim()),
            Expr::num(-1.0),
            Some(k),
        ))
    }

    /// `(sym(φ⊗φ'), ½(ρ'φ + ρφ'), ρρ')` for two concircular fields sharing `K`.
    pub fn from_concircular_pair(c1: &ConcircularCandidate, c2: &ConcircularCandidate) -> Result<Self> {
        let n = c1.phi.dim();
        if c2.phi.dim() != n {
            return Err(Error::Invalid("concircular fields of different dimension".into()));
        }
        let k = match (c1.k, c2.k) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Invalid(format!("concircular fields carry different K ({a} vs {b})")))
            }
            (a, b) => a.or(b),
        };
        let half = Expr::num(0.5);
        let (p, q) = (&c1.phi.comps, &c2.phi.comps);
        let a = if c1 == c2 {
            ExprMatrix::symmetric_from_fn(n, |i, j| &p[i] * &p[j])
        } else {
            ExprMatrix::symmetric_from_fn(n, |i, j| &half * &(&(&p[i] * &q[j]) + &(&p[j] * &q[i])))
        };
        let lambda = if c1 == c2 {
            p.iter().map(|pi| &c1.rho * pi).collect()
        } else {
            (0..n)
                .map(|i| &half * &(&(&c2.rho * &p[i]) + &(&c1.rho * &q[i])))
                .collect()
        };
        Ok(SinyukovSolution::new(
            BilinearField::new(a),
            CovectorField::new(lambda),
            &c1.rho * &c2.rho,
            k,
        ))
    }

    pub fn jets(&self, coords: &[String]) -> SolutionJets {
        SolutionJets {
            a: self.a.jet(coords),
            lambda: self.lambda.jet(coords),
            mu: ScalarJet::new(&self.mu, coords),
        }
    }

    pub fn values(&self, chart: &MetricChart, p: &[f64]) -> Result<SolutionValues> {
        Ok(SolutionValues {
            a: chart.eval_matrix(&self.a.comps, p)?,
            lambda: chart.eval_vec(&self.lambda.comps, p)?,
            mu: chart.eval(&self.mu, p)?,
        })
    }
}

/// Symbolic first partials of a solution.
#[derive(Clone, Debug)]
pub struct SolutionJets {
    pub a: BilinearJet,
    pub lambda: CovectorJet,
    pub mu: ScalarJet,
}

/// A solution evaluated at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionValues {
    pub a: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub mu: f64,
}

impl SolutionValues {
    /// Components stacked as `a` (row-major), `λ`, `μ`.
    pub fn stacked(&self) -> Vec<f64> {
        let n = self.lambda.len();
        let mut out = Vec::with_capacity(n * n + n + 1);
        for i in 0..n {
            for j in 0..n {
                out.push(self.a[(i, j)]);
            }
        }
        out.extend(self.lambda.iter());
        out.push(self.mu);
        out
    }

    pub fn max_abs_diff(&self, other: &SolutionValues) -> f64 {
        (&self.a - &other.a)
            .amax()
            .max((&self.lambda - &other.lambda).amax())
            .max((self.mu - other.mu).abs())
    }
}
