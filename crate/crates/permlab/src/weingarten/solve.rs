//! Fraction-free Bareiss elimination for small exact integer systems.

use num::{BigInt, BigRational, One, Zero};

/// Solves `A x = b` exactly for a nonsingular integer matrix.
///
/// Forward elimination is fraction-free (Bareiss): every intermediate entry
/// is an integer minor of the augmented matrix, and each division is exact.
/// Back substitution runs in rationals on the triangularized system.
pub fn bareiss_solve(a: Vec<Vec<BigInt>>, b: Vec<BigInt>) -> Vec<BigRational> {
    let k = b.len();
    debug_assert!(a.len() == k && a.iter().all(|row| row.len() == k));
    // Augmented matrix [A | b].
    let mut m: Vec<Vec<BigInt>> = a
        .into_iter()
        .zip(b)
        .map(|(mut row, rhs)| {
            row.push(rhs);
            row
        })
        .collect();

    let mut prev = BigInt::one();
    for c in 0..k {
        if m[c][c].is_zero() {
            let pivot_row = (c + 1..k)
                .find(|&r| !m[r][c].is_zero())
                .expect("singular system");
            m.swap(c, pivot_row);
        }
        let pivot = m[c][c].clone();
        for r in c + 1..k {
            let lead = m[r][c].clone();
            for j in c..=k {
                let num = &pivot * &m[r][j] - &lead * &m[c][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                m[r][j] = num / &prev;
            }
        }
        prev = pivot;
    }

    let mut x = vec![BigRational::zero(); k];
    for i in (0..k).rev() {
        let mut acc = BigRational::from(m[i][k].clone());
        for j in i + 1..k {
            acc -= BigRational::from(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / BigRational::from(m[i][i].clone());
    }
    x
}
