use super::{Matrix, RngStream};
use crate::{Error, Result};

/// Householder QR on a column-major `n x k` block, `k <= n`.
///
/// On return, column `j` of `a` holds the reflector vector in rows `j..n`
/// and `r_diag[j]` holds the diagonal entry of R produced by that step.
fn householder_factor(n: usize, k: usize, a: &mut [f64], r_diag: &mut [f64]) {
    for j in 0..k {
        let (col_j, rest) = a[j * n..].split_at_mut(n);
        let x = &mut col_j[j..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            r_diag[j] = 0.0;
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        x[0] -= alpha;
        r_diag[j] = alpha;
        let vnorm_sq: f64 = x.iter().map(|v| v * v).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let scale = 2.0 / vnorm_sq;
        for c in 0..k - j - 1 {
            let y = &mut rest[c * n + j..c * n + n];
            let dot: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            let f = scale * dot;
            for (yi, vi) in y.iter_mut().zip(x.iter()) {
                *yi -= f * vi;
            }
        }
    }
}

/// Backward accumulation of the first `k` columns of Q from stored reflectors.
fn accumulate_q(n: usize, k: usize, a: &[f64], q: &mut [f64]) {
    for (j, col) in q.chunks_exact_mut(n).enumerate() {
        col.fill(0.0);
        col[j] = 1.0;
    }
    for j in (0..k).rev() {
        let v = &a[j * n + j..(j + 1) * n];
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let scale = 2.0 / vnorm_sq;
        // Columns left of j are still unit vectors untouched by H_j.
        for c in j..k {
            let y = &mut q[c * n + j..(c + 1) * n];
            let dot: f64 = v.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            let f = scale * dot;
            for (yi, vi) in y.iter_mut().zip(v.iter()) {
                *yi -= f * vi;
            }
        }
    }
}

fn stiefel_columns(n: usize, k: usize, stream: &mut RngStream) -> Vec<Vec<f64>> {
    let mut a = vec![0.0f64; n * k];
    for x in a.iter_mut() {
        *x = stream.standard_gaussian();
    }
    let mut r_diag = vec![0.0f64; k];
    householder_factor(n, k, &mut a, &mut r_diag);
    let mut q = vec![0.0f64; n * k];
    accumulate_q(n, k, &a, &mut q);
    // Sign correction: flip each column so the R diagonal is positive.
    // Without it the factor is not Haar/Stiefel distributed.
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut col = q[j * n..(j + 1) * n].to_vec();
        if r_diag[j] < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
        cols.push(col);
    }
    cols
}

/// Samples the first `k` columns of a Haar orthogonal matrix (uniform on the
/// Stiefel manifold): i.i.d. Gaussian fill, Householder orthonormalization,
/// positive-diagonal sign correction.
pub fn haar_stiefel(n: usize, k: usize, stream: &mut RngStream) -> Result<Vec<Vec<f64>>> {
    if n == 0 || k == 0 {
        return Err(Error::EmptyDimension);
    }
    if k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    Ok(stiefel_columns(n, k, stream))
}

/// Samples an `n x n` Haar orthogonal matrix.
pub fn haar_orthogonal(n: usize, stream: &mut RngStream) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    let cols = stiefel_columns(n, n, stream);
    let mut m = Matrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}
