use serde::{Deserialize, Serialize};

/// Max/mean absolute residual of one equation over a set of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: String,
    pub max: f64,
    pub mean: f64,
    pub tolerance: f64,
    pub points: usize,
    pub pass: bool,
    pub worst_point: Vec<f64>,
}

/// Collects per-point residuals (already reduced to a max over components).
#[derive(Clone, Debug)]
pub struct ResidualAccumulator {
    equation: String,
    tolerance: f64,
    max: f64,
    sum: f64,
    points: usize,
    worst_point: Vec<f64>,
}

impl ResidualAccumulator {
    pub fn new(equation: impl Into<String>, tolerance: f64) -> Self {
        ResidualAccumulator {
            equation: equation.into(),
            tolerance,
            max: 0.0,
            sum: 0.0,
            points: 0,
            worst_point: Vec::new(),
        }
    }

    /// Non-finite residuals are recorded as `f64::MAX` so they always fail and
    /// still serialize as numbers.
    pub fn push(&mut self, point: &[f64], residual: f64) {
        let r = if residual.is_finite() { residual.abs() } else { f64::MAX };
        if self.points == 0 || r > self.max {
            self.max = r;
            self.worst_point = point.to_vec();
        }
        self.sum += r;
        self.points += 1;
    }

    pub fn finish(self) -> ResidualReport {
        let mean = if self.points == 0 { 0.0 } else { self.sum / self.points as f64 };
        ResidualReport {
            pass: self.max <= self.tolerance,
            equation: self.equation,
            max: self.max,
            mean: mean.min(f64::MAX),
            tolerance: self.tolerance,
            points: self.points,
            worst_point: self.worst_point,
        }
    }
}

/// Largest absolute entry of a slice of residual components.
pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0_f64, |m, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}

/// Merges reports of several blocks into one verdict under `equation`.
pub fn combine(equation: &str, reports: &[&ResidualReport]) -> ResidualReport {
    let worst = reports
        .iter()
        .max_by(|a, b| (a.max / a.tolerance).total_cmp(&(b.max / b.tolerance)));
    let points = reports.iter().map(|r| r.points).max().unwrap_or(0);
    ResidualReport {
        equation: equation.to_string(),
        max: reports.iter().map(|r| r.max).fold(0.0, f64::max),
        mean: if reports.is_empty() {
            0.0
        } else {
            reports.iter().map(|r| r.mean).sum::<f64>() / reports.len() as f64
        },
        tolerance: worst.map(|r| r.tolerance).unwrap_or(0.0),
        points,
        pass: reports.iter().all(|r| r.pass),
        worst_point: worst.map(|r| r.worst_point.clone()).unwrap_or_default(),
    }
}
