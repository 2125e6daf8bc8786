//! Gauss-Legendre nodes and cumulative integration along a segment.

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0; n + 1];
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// Integrates samples of a smooth function on `[-1, 1]` from `-1`.
///
/// The samples at the Gauss nodes are expanded in Legendre polynomials, and
/// the series is integrated term by term, giving the antiderivative at every
/// node plus the full integral.
#[derive(Clone, Debug)]
pub struct CumulativeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    // poly[m][k] = P_k(x_m)
    poly: Vec<Vec<f64>>,
    // integral_at[m][k] = ∫_{-1}^{x_m} P_k
    integral_at: Vec<Vec<f64>>,
}

impl CumulativeRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let poly: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let integral_at = nodes
            .iter()
            .zip(&poly)
            .map(|(&x, p)| {
                (0..n)
                    .map(|k| {
                        if k == 0 {
                            x + 1.0
                        } else {
                            (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        CumulativeRule {
            nodes,
            weights,
            poly,
            integral_at,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Antiderivative from `-1` at each node, and the integral over `[-1, 1]`.
    pub fn integrate(&self, samples: &[f64]) -> (Vec<f64>, f64) {
        let n = self.len();
        let coef: Vec<f64> = (0..n)
            .map(|k| {
                let s: f64 = (0..n).map(|m| self.weights[m] * samples[m] * self.poly[m][k]).sum();
                s * (2 * k + 1) as f64 / 2.0
            })
            .collect();
        let at = self
            .integral_at
            .iter()
            .map(|row| row.iter().zip(&coef).map(|(a, c)| a * c).sum())
            .collect();
        let total = self.weights.iter().zip(samples).map(|(w, s)| w * s).sum();
        (at, total)
    }
}
