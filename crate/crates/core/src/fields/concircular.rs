use serde::Serialize;

use super::{ConcircularCandidate, ZERO_THRESHOLD};
use crate::geometry::{MetricChart, SampleGrid, ScalarJet};
use crate::report::{max_abs, ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Basic,
    Exceptional,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub concircular: bool,
    pub kind: Kind,
    pub special: bool,
    pub convergent: bool,
    /// The K under which the special identity was tested (supplied or fitted).
    pub k: Option<f64>,
}

impl Classification {
    pub fn summary(&self) -> String {
        let mut parts = vec![match self.kind {
            Kind::Basic => "basic".to_string(),
            Kind::Exceptional => "exceptional".to_string(),
            Kind::Indeterminate => "indeterminate".to_string(),
        }];
        if self.special {
            parts.push("special".into());
            if let Some(k) = self.k {
                parts.push(format!("K={k}"));
            }
        }
        if self.convergent {
            parts.push("convergent".into());
        }
        parts.join(", ")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KFit {
    pub k: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcircularOutcome {
    pub concircular: ResidualReport,
    pub special: ResidualReport,
    pub convergent: ResidualReport,
    pub fitted: Option<KFit>,
    pub max_abs_rho: f64,
    pub classification: Classification,
}

impl ConcircularOutcome {
    pub fn reports(&self) -> Vec<&ResidualReport> {
        vec![&self.concircular, &self.special, &self.convergent]
    }
}

struct Samples {
    points: Vec<Vec<f64>>,
    // ∇_j φ_i − ρ g_ij, max over components
    nabla: Vec<f64>,
    rho: Vec<f64>,
    grad_rho: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
}

fn sample(chart: &MetricChart, c: &ConcircularCandidate, grid: &SampleGrid) -> Result<Samples> {
    c.check(chart)?;
    let phi_jet = c.phi.jet(chart.coords());
    let rho_jet = ScalarJet::new(&c.rho, chart.coords());
    let mut s = Samples {
        points: Vec::new(),
        nabla: Vec::new(),
        rho: Vec::new(),
        grad_rho: Vec::new(),
        phi: Vec::new(),
    };
    for p in &grid.points {
        let geo = chart.geometry_at(p)?;
        let (v, d) = phi_jet.eval(chart, p)?;
        let (rho, grad) = rho_jet.eval(chart, p)?;
        let r = geo.nabla_covector(&v, &d) - &geo.g * rho;
        s.points.push(p.clone());
        s.nabla.push(max_abs(r.iter()));
        s.rho.push(rho);
        s.grad_rho.push(grad.iter().copied().collect());
        s.phi.push(v.iter().copied().collect());
    }
    Ok(s)
}

fn fit_from(s: &Samples) -> Result<KFit> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, f) in s.grad_rho.iter().zip(&s.phi) {
        for (a, b) in g.iter().zip(f) {
            num += a * b;
            den += b * b;
        }
    }
    if den < 1e-18 {
        return Err(Error::Degenerate(
            "the covector vanishes on the grid, K cannot be fitted".into(),
        ));
    }
    let k = num / den;
    let residual = s
        .grad_rho
        .iter()
        .zip(&s.phi)
        .map(|(g, f)| max_abs(g.iter().zip(f).map(|(a, b)| a - k * b).collect::<Vec<_>>().iter()))
        .fold(0.0, f64::max);
    Ok(KFit { k, residual })
}

/// Least-squares `K` minimizing `Σ |∇ρ − K φ|²` over the grid.
pub fn fit_k(chart: &MetricChart, c: &ConcircularCandidate, grid: &SampleGrid) -> Result<KFit> {
    fit_from(&sample(chart, c, grid)?)
}

/// Checks `∇φ = ρ g` and classifies the field. The special identity
/// `∇ρ = K φ` uses the supplied `K`, otherwise a least-squares fit; when `φ`
/// vanishes everywhere any `K` works and the report holds `|∇ρ|`.
pub fn check_concircular(
    chart: &MetricChart,
    c: &ConcircularCandidate,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<ConcircularOutcome> {
    let s = sample(chart, c, grid)?;
    let fitted = fit_from(&s).ok();
    let k = c.k.or(fitted.as_ref().map(|f| f.k));
    let mut conc = ResidualAccumulator::new("concircular", tolerance);
    let mut special = ResidualAccumulator::new("special", tolerance);
    let mut convergent = ResidualAccumulator::new("convergent", tolerance);
    for (idx, p) in s.points.iter().enumerate() {
        conc.push(p, s.nabla[idx]);
        let kk = k.unwrap_or(0.0);
        let sp: Vec<f64> = s.grad_rho[idx]
            .iter()
            .zip(&s.phi[idx])
            .map(|(g, f)| g - kk * f)
            .collect();
        special.push(p, max_abs(sp.iter()));
        convergent.push(p, max_abs(s.grad_rho[idx].iter()));
    }
    let max_abs_rho = max_abs(s.rho.iter());
    let kind = if max_abs_rho > 10.0 * ZERO_THRESHOLD {
        Kind::Basic
    } else if max_abs_rho <= 0.1 * ZERO_THRESHOLD {
        Kind::Exceptional
    } else {
        Kind::Indeterminate
    };
    let concircular = conc.finish();
    let special = special.finish();
    let convergent = convergent.finish();
    let classification = Classification {
        concircular: concircular.pass,
        kind,
        special: concircular.pass && special.pass,
        convergent: concircular.pass && convergent.pass,
        k,
    };
    Ok(ConcircularOutcome {
        concircular,
        special,
        convergent,
        fitted,
        max_abs_rho,
        classification,
    })
}
