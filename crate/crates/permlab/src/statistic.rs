//! Coefficient-matrix bookkeeping and the central statistics.
//!
//! The main quantity is `Tr(A M P Mᵀ)` for a coefficient matrix `A`
//! normalized to `Tr(A Aᵀ) = n`, a Haar orthogonal `M` and a permutation
//! matrix `P` with the convention `P[sigma(k), k] = 1`.

use crate::sampling::{Matrix, Permutation};
use crate::weingarten::{self, MomentSpec};
use crate::{Error, Result};

/// Tolerance on `|Tr(A Aᵀ) - n|` for an already-normalized input.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// A coefficient matrix together with its derived scalar parameters.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    a: Matrix,
    /// `sum_i A_ii / n`, the finite-n stand-in for the paper's constant s.
    s_n: f64,
    /// `sum_{i != j} A_ii A_jj / n^2`, the finite-n stand-in for c.
    c_n: f64,
    /// `Tr(A Aᵀ)`.
    norm_sq: f64,
}

impl CoefficientMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn s_n(&self) -> f64 {
        self.s_n
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// True when every off-diagonal entry is exactly zero. Diagonal
    /// coefficients admit much cheaper statistic evaluation paths.
    pub fn is_diagonal(&self) -> bool {
        let n = self.a.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.a.get(i, j) == 0.0))
    }
}

/// Wraps a matrix as a coefficient matrix, optionally rescaling it so that
/// `Tr(A Aᵀ) = n`, and computes `s_n` and `c_n`.
pub fn make_coefficient(m: Matrix, normalize: bool) -> Result<CoefficientMatrix> {
    let n = m.n();
    let norm_sq = m.frobenius_sq();
    if norm_sq == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mut a = m;
    let mut final_norm_sq = norm_sq;
    if normalize && (norm_sq - n as f64).abs() > NORMALIZATION_TOL {
        let scale = (n as f64 / norm_sq).sqrt();
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, a.get(i, j) * scale);
            }
        }
        final_norm_sq = a.frobenius_sq();
    }
    let diag_sum: f64 = (0..n).map(|i| a.get(i, i)).sum();
    let diag_sq_sum: f64 = (0..n).map(|i| a.get(i, i) * a.get(i, i)).sum();
    let nf = n as f64;
    Ok(CoefficientMatrix {
        a,
        s_n: diag_sum / nf,
        c_n: (diag_sum * diag_sum - diag_sq_sum) / (nf * nf),
        norm_sq: final_norm_sq,
    })
}

/// `Tr(A M P Mᵀ)` via `B = Mᵀ A M` followed by `sum_k B[sigma(k), k]`.
///
/// The `O(n^3)` conjugation happens once per `M`; every additional
/// permutation costs `O(n)` through [`trace_from_conjugated`].
pub fn trace_statistic(a: &CoefficientMatrix, m: &Matrix, p: &Permutation) -> Result<f64> {
    let b = conjugate_coefficient(a, m)?;
    trace_from_conjugated(&b, p)
}

/// `B = Mᵀ A M` for reuse across permutations.
pub fn conjugate_coefficient(a: &CoefficientMatrix, m: &Matrix) -> Result<Matrix> {
    if a.n() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: m.n(),
        });
    }
    m.transpose().matmul(&a.matrix().matmul(m)?)
}

/// `sum_k B[k, sigma(k)]` = `Tr(B P)` for `B = Mᵀ A M`, since column `k` of
/// `P` has its 1 in row `sigma(k)`.
pub fn trace_from_conjugated(b: &Matrix, p: &Permutation) -> Result<f64> {
    if b.n() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: b.n(),
            got: p.n(),
        });
    }
    Ok((0..p.n()).map(|k| b.get(k, p.apply(k))).sum())
}

/// The scaled single entry `sqrt(n) * (M P Mᵀ)_{ab}` in `O(n)`,
/// `a` and `b` 0-based.
pub fn entry_statistic(a: usize, b: usize, m: &Matrix, p: &Permutation) -> Result<f64> {
    let n = m.n();
    if p.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.n(),
        });
    }
    for idx in [a, b] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    let sum: f64 = (0..n).map(|k| m.get(a, p.apply(k)) * m.get(b, k)).sum();
    Ok((n as f64).sqrt() * sum)
}

/// [`entry_statistic`] evaluated from the two relevant rows of `M` only,
/// for samplers that draw just those rows: `sqrt(n) * sum_k u[sigma(k)] v[k]`.
pub fn entry_statistic_from_rows(row_a: &[f64], row_b: &[f64], p: &Permutation) -> Result<f64> {
    let n = p.n();
    if row_a.len() != n || row_b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: row_a.len().min(row_b.len()),
        });
    }
    let sum: f64 = (0..n).map(|k| row_a[p.apply(k)] * row_b[k]).sum();
    Ok((n as f64).sqrt() * sum)
}

/// Martingale increments of `Tr(A M C_n Mᵀ)` for the canonical n-cycle:
/// `X_k = m_kᵀ A m_{k+1} = sum_{i,j} A_ij M[i,k] M[j,k+1]` with column `n`
/// meaning column `0`.
pub fn martingale_increments(a: &CoefficientMatrix, m: &Matrix) -> Result<Vec<f64>> {
    let n = a.n();
    if m.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.n(),
        });
    }
    // C = A * M, then X_k = sum_i M[i,k] * C[i, k+1 mod n].
    let c = a.matrix().matmul(m)?;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let crow = c.row(i);
        let mrow = m.row(i);
        for k in 0..n {
            out[k] += mrow[k] * crow[(k + 1) % n];
        }
    }
    Ok(out)
}

/// First martingale increment from the first two Haar columns only:
/// `X_1 = m_1ᵀ A m_2 = sum_i m_1[i] (A m_2)_i`, used by the cheap Monte
/// Carlo paths.
pub fn first_increment(a: &CoefficientMatrix, col1: &[f64], col2: &[f64]) -> Result<f64> {
    let n = a.n();
    if col1.len() != n || col2.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: col1.len().min(col2.len()),
        });
    }
    let mat = a.matrix();
    let mut sum = 0.0;
    for i in 0..n {
        let row = mat.row(i);
        let dot: f64 = row.iter().zip(col2).map(|(x, y)| x * y).sum();
        sum += col1[i] * dot;
    }
    Ok(sum)
}

/// Exact `E[X_{n,k}^2]` assembled from the exact second-order Haar moments:
///
/// `sum_{i,j} A_ij^2 mu22(i,j) - (1/((n-1)n(n+2))) sum_{i != j} (A_ij A_ji + A_ii A_jj)`
///
/// where `mu22(i,j)` is the exact value of `E[M_{j,k}^2 M_{i,k+1}^2]`
/// (same-row and distinct-row cases differ), taken from the Weingarten
/// oracle rather than the O(1/n^3) asymptotic shorthand.
pub fn variance_prediction(a: &CoefficientMatrix, n: usize) -> Result<f64> {
    if a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: n,
        });
    }
    if n < 4 {
        return Err(Error::BelowInvertibilityRegime { n, r: 2 });
    }
    // Same row, distinct columns: E[M_{1,1}^2 M_{1,2}^2].
    let mu_same = weingarten::rational_to_f64(&weingarten::haar_moment(
        &MomentSpec::new(vec![1, 1, 1, 1], vec![1, 1, 2, 2])?,
        n,
    )?);
    // Distinct rows, distinct columns: E[M_{1,1}^2 M_{2,2}^2].
    let mu_diff = weingarten::rational_to_f64(&weingarten::haar_moment(
        &MomentSpec::new(vec![1, 1, 2, 2], vec![1, 1, 2, 2])?,
        n,
    )?);
    let nf = n as f64;
    let cross_coeff = 1.0 / ((nf - 1.0) * nf * (nf + 2.0));
    let mat = a.matrix();
    let mut quad = 0.0;
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..n {
            let aij = mat.get(i, j);
            quad += aij * aij * if i == j { mu_same } else { mu_diff };
            if i != j {
                cross += aij * mat.get(j, i) + mat.get(i, i) * mat.get(j, j);
            }
        }
    }
    Ok(quad - cross_coeff * cross)
}
