use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::dsl::{differentiate, Env, EvalError, Expr};

/// Square matrix of expressions, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMatrix {
    n: usize,
    entries: Vec<Expr>,
}

impl ExprMatrix {
    pub fn zeros(n: usize) -> Self {
        ExprMatrix {
            n,
            entries: vec![Expr::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        ExprMatrix { n, entries }
    }

    /// Builds a symmetric matrix, calling `f` only for `i <= j`.
    pub fn symmetric_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut m = ExprMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let e = f(i, j);
                m.set(j, i, e.clone());
                m.set(i, j, e);
            }
        }
        m
    }

    pub fn diagonal(diag: Vec<Expr>) -> Self {
        let n = diag.len();
        let mut m = ExprMatrix::zeros(n);
        for (i, e) in diag.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.entries[i * self.n + j] = e;
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        ExprMatrix {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, factor: &Expr) -> Self {
        self.map(|e| factor * e)
    }

    pub fn differentiate(&self, var: &str) -> Self {
        self.map(|e| differentiate(e, var))
    }

    pub fn eval(&self, env: &dyn Env) -> Result<DMatrix<f64>, EvalError> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.get(i, j).eval(env)?;
            }
        }
        Ok(m)
    }

    /// Symbolic determinant by Laplace expansion with memoized minors.
    pub fn determinant(&self) -> Expr {
        let mut memo = HashMap::new();
        let rows: Vec<usize> = (0..self.n).collect();
        let full = (1u64 << self.n) - 1;
        self.minor(&rows, full, &mut memo)
    }

    // Determinant of the submatrix on `rows` x (columns in `cols` mask).
    fn minor(&self, rows: &[usize], cols: u64, memo: &mut HashMap<(u64, u64), Expr>) -> Expr {
        if rows.is_empty() {
            return Expr::one();
        }
        let row_mask = rows.iter().fold(0u64, |m, r| m | (1 << r));
        if let Some(e) = memo.get(&(row_mask, cols)) {
            return e.clone();
        }
        let first = rows[0];
        let rest = &rows[1..];
        let mut acc = Expr::zero();
        let mut sign_positive = true;
        for c in 0..self.n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = self.get(first, c);
            if !entry.is_zero() {
                let sub = self.minor(rest, cols & !(1 << c), memo);
                let term = entry * &sub;
                acc = if sign_positive { acc + term } else { acc - term };
            }
            sign_positive = !sign_positive;
        }
        memo.insert((row_mask, cols), acc.clone());
        acc
    }

    /// Symbolic inverse via the adjugate. The result of a symmetric input is
    /// stored symmetric.
    pub fn inverse(&self) -> (ExprMatrix, Expr) {
        let n = self.n;
        let det = self.determinant();
        let mut memo = HashMap::new();
        let full = (1u64 << n) - 1;
        let symmetric = self.is_symmetric();
        let mut inv = ExprMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if symmetric && j < i {
                    let e = inv.get(j, i).clone();
                    inv.set(i, j, e);
                    continue;
                }
                // (A^-1)_{ij} = (-1)^{i+j} M_{ji} / det, with M_{ji} the minor
                // deleting row j and column i.
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let minor = self.minor(&rows, full & !(1 << i), &mut memo);
                let cof = if (i + j) % 2 == 0 { minor } else { -minor };
                // A zero cofactor stays an exact zero; nondegeneracy is checked
                // numerically wherever the inverse is evaluated.
                if cof.is_zero() {
                    inv.set(i, j, Expr::zero());
                } else {
                    inv.set(i, j, &cof / &det);
                }
            }
        }
        (inv, det)
    }
}
