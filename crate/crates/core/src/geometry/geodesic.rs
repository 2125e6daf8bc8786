use nalgebra::DVector;
use serde::Serialize;

use super::chart::MetricChart;
use crate::report::{ResidualAccumulator, ResidualReport};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Step index at which the next point would have left the domain.
    pub truncated_at: Option<usize>,
}

impl Trajectory {
    /// Tab-separated `t x.. v..`, one line per point.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let cols: Vec<String> = std::iter::once(p.t)
                .chain(p.x.iter().copied())
                .chain(p.v.iter().copied())
                .map(|v| format!("{v:?}"))
                .collect();
            out.push_str(&cols.join("\t"));
            out.push('\n');
        }
        out
    }
}

fn acceleration(chart: &MetricChart, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let geo = chart.geometry_at(x.as_slice())?;
    Ok(-geo.contract_christoffel(v, v))
}

/// Classical RK4 for `x'' + Γ(x', x') = 0`, stopping before leaving the domain.
pub fn integrate_geodesic(
    chart: &MetricChart,
    x0: &[f64],
    v0: &[f64],
    steps: usize,
    dt: f64,
) -> Result<Trajectory> {
    let n = chart.dim();
    if x0.len() != n || v0.len() != n {
        return Err(Error::Invalid(format!("initial point and velocity need {n} components")));
    }
    if !chart.contains(x0) {
        return Err(Error::Invalid(format!("initial point {x0:?} outside the chart domain")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Invalid("time step must be positive".into()));
    }
    let mut x = DVector::from_column_slice(x0);
    let mut v = DVector::from_column_slice(v0);
    let mut points = vec![TrajectoryPoint {
        t: 0.0,
        x: x0.to_vec(),
        v: v0.to_vec(),
    }];
    let mut truncated_at = None;
    for step in 1..=steps {
        let k1x = v.clone();
        let k1v = acceleration(chart, &x, &v)?;
        let x2 = &x + &k1x * (0.5 * dt);
        let v2 = &v + &k1v * (0.5 * dt);
        let k2v = acceleration(chart, &x2, &v2)?;
        let x3 = &x + &v2 * (0.5 * dt);
        let v3 = &v + &k2v * (0.5 * dt);
        let k3v = acceleration(chart, &x3, &v3)?;
        let x4 = &x + &v3 * dt;
        let v4 = &v + &k3v * dt;
        let k4v = acceleration(chart, &x4, &v4)?;
        let nx = &x + (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
        let nv = &v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        if !chart.contains(nx.as_slice()) {
            truncated_at = Some(step);
            break;
        }
        x = nx;
        v = nv;
        points.push(TrajectoryPoint {
            t: step as f64 * dt,
            x: x.iter().copied().collect(),
            v: v.iter().copied().collect(),
        });
    }
    Ok(Trajectory { points, truncated_at })
}

/// `g(v, v)` along a trajectory.
pub fn energies(chart: &MetricChart, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.points
        .iter()
        .map(|p| {
            let g = chart.eval_matrix(chart.metric(), &p.x)?;
            let v = DVector::from_column_slice(&p.v);
            Ok((v.transpose() * g * &v)[(0, 0)])
        })
        .collect()
}

/// Integrates a `g`-geodesic and, at each point, measures how far the
/// difference acceleration `(Γ̄ − Γ)(v, v)` leans away from the tangent.
/// The residual is the `ḡ`-orthogonal part over the full length, both in the
/// Euclidean component norm; the projection falls back to the Euclidean one
/// when `v` is `ḡ`-null.
pub fn geodesic_map_check(
    g: &MetricChart,
    gbar: &MetricChart,
    x0: &[f64],
    v0: &[f64],
    steps: usize,
    dt: f64,
    tolerance: f64,
) -> Result<(ResidualReport, Trajectory)> {
    if g.coords() != gbar.coords() {
        return Err(Error::Invalid("both metrics must share the coordinate chart".into()));
    }
    let traj = integrate_geodesic(g, x0, v0, steps, dt)?;
    let mut acc = ResidualAccumulator::new("geodesic-map", tolerance);
    for p in &traj.points {
        let v = DVector::from_column_slice(&p.v);
        let geo = g.geometry_at(&p.x)?;
        let bar = gbar.geometry_at(&p.x)?;
        let a = bar.contract_christoffel(&v, &v) - geo.contract_christoffel(&v, &v);
        acc.push(&p.x, orthogonal_fraction(&a, &v, &bar.g));
    }
    Ok((acc.finish(), traj))
}

fn orthogonal_fraction(a: &DVector<f64>, v: &DVector<f64>, metric: &nalgebra::DMatrix<f64>) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let gv = metric * v;
    let vv = v.dot(&gv);
    let scale = metric.amax().max(1.0) * v.norm_squared();
    let coef = if vv.abs() > 1e-12 * scale {
        a.dot(&gv) / vv
    } else {
        a.dot(v) / v.norm_squared()
    };
    (a - v * coef).norm() / norm
}
