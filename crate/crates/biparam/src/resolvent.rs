//! The matrix resolvent `(s₁s₂I − A)⁻¹`, the two transition solvers built
//! on it, and the Chapman–Kolmogorov diagnostic.
//!
//! The double Laplace transform of the transition matrix is the resolvent,
//! so `P(t, u)` can be computed by two-dimensional numerical inversion.
//! Independently, the Goursat boundary problem `∂²P/∂t∂u = A·P`,
//! `P(t, 0) = P(0, u) = I` is solved by the everywhere-convergent series
//! `P(t, u) = Σ Aⁿ (tu)ⁿ / (n!)²` — the `(n!)²` denominator dominates any
//! geometric growth of `Aⁿ`.

use crate::chain::{GeneratorMatrix, QueryPoint, SolverKind, TransitionMatrix};
use crate::inversion::{
    self, EvalError, InversionConfig, InversionError, TransformPoint,
};
use crate::linalg;
use crate::pde::{self, GoursatSide};
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

/// Default series truncation: relative ∞-norm of the incremental term.
pub const SERIES_DEFAULT_REL_TOL: f64 = 1e-12;
/// Default series term cap.
pub const SERIES_DEFAULT_MAX_TERMS: usize = 200;
/// Row-sum tolerance reported by the series solver.
pub const SERIES_ROW_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolventError {
    /// `s₁s₂` sits on (or numerically near) an eigenvalue of the generator.
    #[error("resolvent is singular at s1*s2 = {z} (relative pivot {pivot:e})")]
    Singular { z: Complex64, pivot: f64 },
    #[error("series reached {max_terms} terms without meeting rel_tol = {rel_tol:e}")]
    MaxTermsExceeded { max_terms: usize, rel_tol: f64 },
    #[error("series requires max_terms >= 1 and rel_tol > 0")]
    InvalidSeriesParams,
}

/// Evaluate the resolvent `(s₁s₂I − A)⁻¹` by a dense complex LU solve.
pub fn resolvent_at(
    gen: &GeneratorMatrix,
    s: TransformPoint,
) -> Result<Array2<Complex64>, ResolventError> {
    let z = s.s1 * s.s2;
    let n = gen.n();
    let mut m = gen.matrix().mapv(|x| Complex64::new(-x, 0.0));
    for i in 0..n {
        m[[i, i]] += z;
    }
    linalg::invert(&m).map_err(|e| ResolventError::Singular { z, pivot: e.ratio })
}

/// Transition matrix by entrywise double-Laplace inversion of the
/// resolvent. All entries share each contour evaluation (one LU solve per
/// transform point); non-convergence is reported per entry.
pub fn invert2d_matrix(
    gen: &GeneratorMatrix,
    at: QueryPoint,
    cfg: &InversionConfig,
) -> Result<TransitionMatrix, InversionError> {
    let n = gen.n();
    let eval = |p: TransformPoint| -> Result<Vec<Complex64>, EvalError> {
        let r = resolvent_at(gen, p).map_err(|e| EvalError::at(p, e.to_string()))?;
        Ok(r.iter().copied().collect())
    };
    let out = inversion::invert2d_components(&eval, n * n, at, cfg)?;
    for (idx, (&value, &estimate)) in out.values.iter().zip(out.estimates.iter()).enumerate() {
        if estimate > inversion::non_convergence_gate(value) {
            return Err(InversionError::NonConvergence {
                entry: Some((idx / n, idx % n)),
                estimate,
            });
        }
    }
    let p = Array2::from_shape_vec((n, n), out.values).expect("n*n values");
    Ok(TransitionMatrix::new(
        p,
        at,
        SolverKind::Laplace2d,
        laplace_row_sum_tol(cfg),
    ))
}

/// Row-sum tolerance reported by the Laplace solver: two digits of slack
/// on the requested target.
pub fn laplace_row_sum_tol(cfg: &InversionConfig) -> f64 {
    10f64.powi(-(cfg.target_decimal_digits() as i32 - 2))
}

/// Transition matrix by the Goursat power series
/// `Σ_{k=0..N} Aᵏ (tu)ᵏ / (k!)²`, truncated once the incremental term's
/// ∞-norm drops below `rel_tol` times the running sum's.
///
/// On the axes (`t·u = 0`) the result is the identity, exactly.
pub fn series_transition(
    gen: &GeneratorMatrix,
    at: QueryPoint,
    max_terms: usize,
    rel_tol: f64,
) -> Result<TransitionMatrix, ResolventError> {
    if max_terms < 1 || !rel_tol.is_finite() || rel_tol <= 0.0 {
        return Err(ResolventError::InvalidSeriesParams);
    }
    let n = gen.n();
    let tu = at.t * at.u;
    if tu == 0.0 {
        return Ok(TransitionMatrix::identity(n, at, SolverKind::Series));
    }
    let a = gen.matrix();
    let mut sum = Array2::<f64>::eye(n);
    let mut term = Array2::<f64>::eye(n);
    for k in 0..max_terms {
        let factor = tu / ((k + 1) as f64 * (k + 1) as f64);
        term = term.dot(a) * factor;
        sum += &term;
        if linalg::inf_norm(&term) <= rel_tol * linalg::inf_norm(&sum) {
            return Ok(TransitionMatrix::new(
                sum,
                at,
                SolverKind::Series,
                SERIES_ROW_SUM_TOL,
            ));
        }
    }
    Err(ResolventError::MaxTermsExceeded { max_terms, rel_tol })
}

/// Compute `P(t, u)` with the named solver at its default settings.
///
/// On the axes every solver returns the identity exactly, per the model's
/// boundary assumption.
pub fn transition_default(
    gen: &GeneratorMatrix,
    at: QueryPoint,
    solver: SolverKind,
) -> Result<TransitionMatrix, crate::Error> {
    if at.on_boundary() {
        return Ok(TransitionMatrix::identity(gen.n(), at, solver));
    }
    match solver {
        SolverKind::Series => Ok(series_transition(
            gen,
            at,
            SERIES_DEFAULT_MAX_TERMS,
            SERIES_DEFAULT_REL_TOL,
        )?),
        SolverKind::Laplace2d => Ok(invert2d_matrix(gen, at, &InversionConfig::default())?),
        SolverKind::Pde => {
            let (nt, nu) = pde::auto_grid_steps(gen, at);
            let grid = pde::solve_goursat(gen, at.t, at.u, nt, nu, GoursatSide::Backward)?;
            Ok(grid.lookup(at)?)
        }
    }
}

/// Diagnostic residual `‖P(t₁+t₂, u₁+u₂) − P(t₁,u₁)·P(t₂,u₂)‖∞` computed
/// with the chosen solver.
///
/// The Goursat/resolvent solution does not satisfy this factorization away
/// from the axes, even though the factorization holds for the chain's
/// probabilistic definition; the residual is exposed as a measurement and
/// asserted nowhere.
pub fn ck_residual(
    gen: &GeneratorMatrix,
    p1: QueryPoint,
    p2: QueryPoint,
    solver: SolverKind,
) -> Result<f64, crate::Error> {
    let joint = QueryPoint::new(p1.t + p2.t, p1.u + p2.u).map_err(crate::Error::from)?;
    let combined = transition_default(gen, joint, solver)?;
    let first = transition_default(gen, p1, solver)?;
    let second = transition_default(gen, p2, solver)?;
    let product = first.matrix().dot(second.matrix());
    let difference = combined.matrix() - &product;
    Ok(linalg::inf_norm(&difference))
}
