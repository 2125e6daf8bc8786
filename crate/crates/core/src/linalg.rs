//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Gauss-Jordan inverse with partial pivoting. Returns `None` when a pivot
/// falls below `1e-13` relative to the largest entry.
pub fn invert(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let scale = m.amax();
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut a = m.clone();
    let mut inv = DMatrix::identity(n, n);
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= 1e-13 * scale {
            return None;
        }
        a.swap_rows(col, pivot_row);
        inv.swap_rows(col, pivot_row);
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    Some(inv)
}

/// Inverse of a symmetric matrix, mirrored so the result is exactly symmetric.
pub fn invert_symmetric(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut inv = invert(m)?;
    let n = inv.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Some(inv)
}

/// Numerical rank of the columns of `m` by column-pivoted QR: diagonal entries
/// of R above `tol * |R_00|` (and above `tol` absolutely) count.
pub fn column_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let k = r.nrows().min(r.ncols());
    let lead = if k > 0 { r[(0, 0)].abs() } else { 0.0 };
    if lead <= tol {
        return 0;
    }
    (0..k).filter(|&i| r[(i, i)].abs() > tol * lead.max(1.0)).count()
}

/// Ordinary least squares `min |A x - b|` via SVD.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("SVD computed with both factors")
}

/// Components of `v` orthogonal to the span of the columns of `basis`
/// (two passes of modified Gram-Schmidt).
pub fn orthogonal_residual(basis: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for b in basis {
        let mut w = b.clone();
        for _ in 0..2 {
            for q in &ortho {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-12 * b.norm().max(1e-300) && norm > 0.0 {
            ortho.push(w / norm);
        }
    }
    let mut r = v.clone();
    for _ in 0..2 {
        for q in &ortho {
            let c = q.dot(&r);
            r -= q * c;
        }
    }
    r
}
