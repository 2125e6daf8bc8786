use nalgebra::DVector;

use super::{ConcircularCandidate, SinyukovSolution};
use crate::dsl::{differentiate, Expr};
use crate::geometry::{BilinearField, CovectorField, ExprMatrix, MetricChart, SampleGrid};
use crate::report::{max_abs, ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

/// Two metrics on one coordinate chart. Constants are merged and the domain
/// is the intersection of both boxes.
#[derive(Clone, Debug)]
pub struct GeodesicPair {
    pub g: MetricChart,
    pub gbar: MetricChart,
}

impl GeodesicPair {
    pub fn new(g: &MetricChart, gbar: &MetricChart) -> Result<Self> {
        if g.coords() != gbar.coords() {
            return Err(Error::Invalid(format!(
                "metrics use different coordinates: {:?} vs {:?}",
                g.coords(),
                gbar.coords()
            )));
        }
        let mut bindings = g.bindings().clone();
        for (k, v) in gbar.bindings() {
            match bindings.get(k) {
                Some(old) if old != v => {
                    return Err(Error::Invalid(format!(
                        "constant `{k}` has different values in the two metric files"
                    )))
                }
                _ => {
                    bindings.insert(k.clone(), *v);
                }
            }
        }
        let domain = g
            .domain()
            .iter()
            .zip(gbar.domain())
            .map(|(a, b)| {
                a.intersect(b)
                    .ok_or_else(|| Error::Invalid("metric domains do not overlap".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let rebuild = |c: &MetricChart| {
            MetricChart::new(
                c.coords().to_vec(),
                domain.clone(),
                c.metric().clone(),
                bindings.clone(),
            )
        };
        Ok(GeodesicPair {
            g: rebuild(g)?,
            gbar: rebuild(gbar)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }
}

/// How `ψ` is obtained for the Levi-Civita check.
#[derive(Clone, Debug)]
pub enum PsiSource {
    Auto,
    Given(CovectorField),
}

/// `Ψ = ln|det ḡ / det g| / (2(n+1))`, written as `ln(u²)/(4(n+1))` since the
/// expression language has no absolute value.
pub fn log_det_potential(pair: &GeodesicPair) -> Expr {
    let n = pair.dim() as f64;
    let u = pair.gbar.metric().determinant() / pair.g.metric().determinant();
    u.powi(2).log() / Expr::num(4.0 * (n + 1.0))
}

/// `ψ_i = ∂_i Ψ` as expressions.
pub fn psi_field(pair: &GeodesicPair) -> CovectorField {
    let psi = log_det_potential(pair);
    CovectorField::new(pair.g.coords().iter().map(|c| differentiate(&psi, c)).collect())
}

pub fn psi_from_pair(pair: &GeodesicPair, p: &[f64]) -> Result<DVector<f64>> {
    pair.g.inverse_metric(p)?;
    pair.gbar.inverse_metric(p)?;
    pair.g.eval_vec(&psi_field(pair).comps, p)
}

/// Residual of `∇_k ḡ_ij − 2ψ_k ḡ_ij − ψ_i ḡ_jk − ψ_j ḡ_ik` with `∇` of `g`.
pub fn check_levi_civita(
    pair: &GeodesicPair,
    psi: &PsiSource,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ResidualReport> {
    let n = pair.dim();
    let auto = matches!(psi, PsiSource::Auto);
    let psi = match psi {
        PsiSource::Auto => psi_field(pair),
        PsiSource::Given(f) => {
            f.check(&pair.g)?;
            f.clone()
        }
    };
    let gbar_jet = BilinearField::new(pair.gbar.metric().clone()).jet(pair.g.coords());
    let mut acc = ResidualAccumulator::new("levi-civita", tolerance);
    for p in &grid.points {
        let geo = pair.g.geometry_at(p)?;
        if auto {
            pair.gbar.inverse_metric(p)?;
        }
        let (gb, dgb) = gbar_jet.eval(&pair.g, p)?;
        let nab = geo.nabla_bilinear(&gb, &dgb);
        let s = pair.g.eval_vec(&psi.comps, p)?;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let r = nab[k][(i, j)]
                        - 2.0 * s[k] * gb[(i, j)]
                        - s[i] * gb[(j, k)]
                        - s[j] * gb[(i, k)];
                    worst = max_abs([worst, r].iter());
                }
            }
        }
        acc.push(p, worst);
    }
    Ok(acc.finish())
}

fn sum(terms: impl Iterator<Item = Expr>) -> Expr {
    terms.fold(Expr::zero(), |a, b| a + b)
}

/// `a_ij = e^{2Ψ} ḡ^{αβ} g_αi g_βj` and `λ_i = −e^{2Ψ} ḡ^{αβ} g_αi ψ_β`.
/// `μ` is left zero and `K` unset.
pub fn solution_from_metrics(pair: &GeodesicPair) -> Result<SinyukovSolution> {
    let n = pair.dim();
    let g = pair.g.metric();
    let (gbar_inv, _) = pair.gbar.symbolic_inverse();
    let psi = psi_field(pair);
    let factor = (Expr::num(2.0) * log_det_potential(pair)).exp();
    // h^α_i = ḡ^{αβ} g_βi
    let h = ExprMatrix::from_fn(n, |al, i| sum((0..n).map(|be| gbar_inv.get(al, be) * g.get(be, i))));
    let a = ExprMatrix::symmetric_from_fn(n, |i, j| {
        &factor * &sum((0..n).map(|al| g.get(al, i) * h.get(al, j)))
    });
    let lambda = (0..n)
        .map(|i| -(&factor * &sum((0..n).map(|al| h.get(al, i) * &psi.comps[al]))))
        .collect();
    Ok(SinyukovSolution::new(
        BilinearField::new(a),
        CovectorField::new(lambda),
        Expr::zero(),
        None,
    ))
}

/// The image of a concircular field of `g` as a concircular field of `ḡ`:
/// `φ̄^i = e^{−Ψ} φ^i` (so `φ̄_i = e^{−Ψ} ḡ_it g^{ts} φ_s`) and
/// `ρ̄ = e^{−Ψ}(ρ + g^{ij} φ_i ψ_j)`.
pub fn transferred_candidate(
    pair: &GeodesicPair,
    c: &ConcircularCandidate,
) -> Result<ConcircularCandidate> {
    c.check(&pair.g)?;
    let n = pair.dim();
    let (g_inv, _) = pair.g.symbolic_inverse();
    let gbar = pair.gbar.metric();
    let psi = psi_field(pair);
    let damp = (-log_det_potential(pair)).exp();
    let raised: Vec<Expr> = (0..n)
        .map(|t| sum((0..n).map(|s| g_inv.get(t, s) * &c.phi.comps[s])))
        .collect();
    let phi = (0..n)
        .map(|i| &damp * &sum((0..n).map(|t| gbar.get(i, t) * &raised[t])))
        .collect();
    let contraction = sum((0..n).map(|j| &raised[j] * &psi.comps[j]));
    let rho = &damp * &(&c.rho + &contraction);
    Ok(ConcircularCandidate::new(CovectorField::new(phi), rho, None))
}

/// `ρ̄(p)` of the transferred field.
pub fn transfer_rho(pair: &GeodesicPair, c: &ConcircularCandidate, p: &[f64]) -> Result<f64> {
    pair.g.inverse_metric(p)?;
    pair.gbar.inverse_metric(p)?;
    let t = transferred_candidate(pair, c)?;
    pair.g.eval(&t.rho, p)
}
