//! Small dense linear-algebra kernels used by the variational, stability and
//! fitting code: symmetric eigenvalues (cyclic Jacobi), LU solves with partial
//! pivoting, and ridge-regularized least squares.
//!
//! Matrices are row-major `&[f64]` slices with an explicit dimension; the
//! problem sizes here (Hessian blocks, Newton systems, 2–4 parameter fits)
//! never justify a heavier dependency.

use crate::error::{CoreError, Result};

/// Eigenvalues of a symmetric matrix, ascending, by the cyclic Jacobi method.
///
/// `a` is row-major with `a.len() == n * n`; the input is symmetrized as
/// `(A + Aᵀ)/2` before iterating, so small asymmetries from finite
/// differencing are harmless.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || a.len() != n * n {
        return Err(CoreError::arg("matrix shape does not match dimension"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::arg("matrix entries must be finite"));
    }
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    if n == 1 {
        return Ok(vec![m[0]]);
    }

    let scale: f64 = m.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-15 * scale;
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[i * n + j].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-3 * tol {
                    continue;
                }
                // Classic Jacobi rotation annihilating (p, q).
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Solves `A x = b` by LU factorization with partial pivoting.
pub fn lu_solve(a: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    if n == 0 || a.len() != n * n || b.len() != n {
        return Err(CoreError::arg("system shape does not match dimension"));
    }
    let mut lu = a.to_vec();
    let mut x = b.to_vec();
    let scale: f64 = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(CoreError::arg("matrix entries must be finite"));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = lu[perm[col] * n + col].abs();
        for row in (col + 1)..n {
            let mag = lu[perm[row] * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag <= 1e-14 * scale.max(1e-300) {
            return Err(CoreError::InvalidState(
                "singular matrix in linear solve".into(),
            ));
        }
        perm.swap(col, pivot_row);
        let prow = perm[col];
        let pivot = lu[prow * n + col];
        for row in (col + 1)..n {
            let r = perm[row];
            let factor = lu[r * n + col] / pivot;
            lu[r * n + col] = factor;
            for k in (col + 1)..n {
                lu[r * n + k] -= factor * lu[prow * n + k];
            }
        }
    }

    // Forward substitution on the permuted right-hand side.
    let mut y = vec![0.0f64; n];
    for row in 0..n {
        let r = perm[row];
        let mut acc = x[r];
        for col in 0..row {
            acc -= lu[r * n + col] * y[col];
        }
        y[row] = acc;
    }
    // Back substitution.
    for row in (0..n).rev() {
        let r = perm[row];
        let mut acc = y[row];
        for col in (row + 1)..n {
            acc -= lu[r * n + col] * x[col];
        }
        x[row] = acc / lu[r * n + row];
    }
    Ok(x)
}

/// Least squares `min ‖A x − b‖² + ridge·‖x‖²` via the normal equations.
///
/// Meant for fits with a handful of parameters (decay exponents, growth
/// slopes), where forming `AᵀA` is perfectly stable; `ridge = 0` gives the
/// plain solution.
pub fn ridge_least_squares(rows: &[Vec<f64>], rhs: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if rows.is_empty() || rows.len() != rhs.len() {
        return Err(CoreError::arg("row count does not match right-hand side"));
    }
    let p = rows[0].len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(CoreError::arg("design rows must share a nonzero width"));
    }
    if rows.len() < p {
        return Err(CoreError::arg("fewer observations than parameters"));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(CoreError::arg("ridge must be finite and nonnegative"));
    }
    let mut ata = vec![0.0f64; p * p];
    let mut atb = vec![0.0f64; p];
    for (row, &y) in rows.iter().zip(rhs) {
        for i in 0..p {
            atb[i] += row[i] * y;
            for j in 0..p {
                ata[i * p + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        ata[i * p + i] += ridge;
    }
    lu_solve(&ata, p, &atb)
}
