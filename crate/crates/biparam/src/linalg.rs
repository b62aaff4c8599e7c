//! Small dense linear algebra used by the resolvent solves.

use ndarray::Array2;
use num_complex::Complex64;

/// Relative pivot threshold below which a matrix is treated as singular.
pub(crate) const PIVOT_REL_TOL: f64 = 1e-14;

/// Raised when elimination hits a pivot below [`PIVOT_REL_TOL`] relative to
/// the largest entry of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SingularPivot {
    /// |pivot| / max |entry| at the failing step.
    pub ratio: f64,
    pub step: usize,
}

/// Invert a square complex matrix by in-place LU with partial pivoting,
/// then column-wise forward/back substitution against the identity.
///
/// Intended for the systems arising from resolvent evaluation (n expected
/// well under 50); no blocking, no sparsity.
pub(crate) fn invert(m: &Array2<Complex64>) -> Result<Array2<Complex64>, SingularPivot> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols(), "invert expects a square matrix");
    let scale = m
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut lu = m.clone();
    // perm[i] = original row now stored at position i
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let mut best = col;
        let mut best_mag = lu[[col, col]].norm();
        for row in col + 1..n {
            let mag = lu[[row, col]].norm();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag < PIVOT_REL_TOL * scale {
            return Err(SingularPivot {
                ratio: best_mag / scale,
                step: col,
            });
        }
        if best != col {
            for c in 0..n {
                lu.swap([col, c], [best, c]);
            }
            perm.swap(col, best);
        }
        let pivot = lu[[col, col]];
        for row in col + 1..n {
            let factor = lu[[row, col]] / pivot;
            lu[[row, col]] = factor;
            for c in col + 1..n {
                let delta = factor * lu[[col, c]];
                lu[[row, c]] -= delta;
            }
        }
    }

    // Solve L·U·X = P·I one unit column at a time.
    let mut inverse = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for entry in b.iter_mut() {
            *entry = Complex64::new(0.0, 0.0);
        }
        let pos = perm.iter().position(|&p| p == j).expect("permutation is a bijection");
        b[pos] = Complex64::new(1.0, 0.0);
        for row in 0..n {
            for c in 0..row {
                let delta = lu[[row, c]] * b[c];
                b[row] -= delta;
            }
        }
        for row in (0..n).rev() {
            for c in row + 1..n {
                let delta = lu[[row, c]] * b[c];
                b[row] -= delta;
            }
            b[row] /= lu[[row, row]];
        }
        for row in 0..n {
            inverse[[row, j]] = b[row];
        }
    }
    Ok(inverse)
}

/// Matrix ∞-norm (maximum absolute row sum).
pub(crate) fn inf_norm(m: &Array2<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for row in m.rows() {
        let s: f64 = row.iter().map(|x| x.abs()).sum();
        worst = worst.max(s);
    }
    worst
}
