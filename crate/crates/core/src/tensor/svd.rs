//! One-sided Jacobi SVD.
//!
//! Works on whichever of `A` or `A'` is tall, so the rotations always act on
//! the shorter side. Output signs are fixed: the largest-magnitude entry of
//! every left singular vector is positive (first such row on ties).

use super::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin factorization `A = U diag(S) V'` with `k = min(rows, cols)` columns.
#[derive(Clone, Debug)]
pub struct MatrixFactorization {
    pub u: Matrix,
    /// Descending, non-negative.
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl MatrixFactorization {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.transpose()
    }
}

pub fn svd(a: &Matrix) -> Result<MatrixFactorization> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("svd input has non-finite entries"));
    }
    let (rows, cols) = a.shape();
    let mut f = if rows >= cols {
        let (q, s, w) = jacobi_tall(a.clone());
        MatrixFactorization { u: q, s, v: w }
    } else {
        // A' = Q S W'  =>  A = W S Q'
        let (q, s, w) = jacobi_tall(a.transpose());
        MatrixFactorization { u: w, s, v: q }
    };
    for j in 0..f.s.len() {
        if needs_flip(f.u.column(j).as_slice()) {
            f.u.column_mut(j).neg_mut();
            f.v.column_mut(j).neg_mut();
        }
    }
    Ok(f)
}

/// Square orthonormal basis of the column space of `a` and its complement:
/// the left singular vectors of `a`, padded out to `rows x rows`.
pub fn left_singular_basis(a: &Matrix) -> Result<Matrix> {
    let f = svd(a)?;
    let rows = a.nrows();
    if f.u.ncols() == rows {
        return Ok(f.u);
    }
    let mut u = f.u.clone().resize_horizontally(rows, 0.0);
    let mut filled = vec![false; rows];
    filled[..f.u.ncols()].fill(true);
    complete_basis(&mut u, &mut filled);
    for j in f.u.ncols()..rows {
        if needs_flip(u.column(j).as_slice()) {
            u.column_mut(j).neg_mut();
        }
    }
    Ok(u)
}

fn needs_flip(col: &[f64]) -> bool {
    let mut best = 0.0f64;
    let mut sign_negative = false;
    for &x in col {
        if x.abs() > best {
            best = x.abs();
            sign_negative = x < 0.0;
        }
    }
    sign_negative
}

/// Orthogonalizes the columns of a tall `b` (n x m, n >= m) by plane
/// rotations. Returns `(Q, S, W)` with `b = Q diag(S) W'`, sorted descending.
fn jacobi_tall(mut b: Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (n, m) = b.shape();
    debug_assert!(n >= m);
    let mut w = Matrix::identity(m, m);
    let tol = f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let (alpha, beta, gamma) = {
                    let bs = b.as_slice();
                    let cp = &bs[p * n..(p + 1) * n];
                    let cq = &bs[q * n..(q + 1) * n];
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(b.as_mut_slice(), n, p, q, c, s);
                rotate_columns(w.as_mut_slice(), m, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..m).map(|j| b.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    // columns below numerical rank carry rounding noise, not directions
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let floor = smax * n as f64 * f64::EPSILON;
    let mut q = Matrix::zeros(n, m);
    let mut wq = Matrix::zeros(m, m);
    let mut s = Vec::with_capacity(m);
    let mut filled = vec![false; m];
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        wq.set_column(dst, &w.column(src));
        if sigma > floor {
            q.set_column(dst, &(b.column(src) / sigma));
            filled[dst] = true;
        }
    }
    if filled.iter().any(|f| !f) {
        complete_basis(&mut q, &mut filled);
    }
    (q, s, wq)
}

#[inline]
fn rotate_columns(data: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * n);
    let cp = &mut head[p * n..(p + 1) * n];
    let cq = &mut tail[..n];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills the unfilled columns of `u` with unit vectors orthogonal to every
/// filled column, drawn from the standard basis in order.
fn complete_basis(u: &mut Matrix, filled: &mut [bool]) {
    let n = u.nrows();
    let mut candidate = 0usize;
    for j in 0..u.ncols() {
        if filled[j] {
            continue;
        }
        while candidate < n {
            let mut v = nalgebra::DVector::<f64>::zeros(n);
            v[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (k, _) in filled.iter().enumerate().filter(|(_, &f)| f) {
                    let col = u.column(k);
                    let d = col.dot(&v);
                    v.axpy(-d, &col, 1.0);
                }
            }
            let norm = v.norm();
            if norm > 0.5 / (n as f64).sqrt() {
                u.set_column(j, &(v / norm));
                filled[j] = true;
                break;
            }
        }
        debug_assert!(filled[j], "standard basis exhausted while completing");
    }
}
