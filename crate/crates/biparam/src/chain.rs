//! Core domain types: generator matrices, query points, transition
//! matrices, and probability vectors.
//!
//! A chain indexed by a continuous (time, usage) pair is characterized by
//! its infinitesimal transition matrix `A`: off-diagonal entries are
//! nonnegative transition rates per (time-unit × usage-unit), diagonal
//! entries are nonpositive, and every row sums to zero. Transition
//! matrices carry the query point they were computed at, the solver that
//! produced them, and a range warning for entries outside `[0, 1]`.
//!
//! All types are immutable after construction and all operations are pure,
//! so everything here can be shared across threads without coordination.

use ndarray::{Array1, Array2};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Absolute tolerance for generator row sums. Generators are user-typed
/// rationals; this is tighter than any solver error but loose enough for
/// roundoff in the row sum itself.
pub const GENERATOR_ROW_SUM_TOL: f64 = 1e-12;

/// Transition-probability entries outside `[-RANGE_EPS, 1 + RANGE_EPS]`
/// set the range warning. The warning is reported, never clipped: the
/// model genuinely leaves `[0, 1]` for large `t·u`.
pub const RANGE_EPS: f64 = 1e-9;

/// Probability vectors must sum to 1 within this tolerance.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Row-sum deviation beyond which a transition matrix is rejected as
/// input to [`marginal_distribution`].
pub const MARGINAL_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("matrix is not square ({rows} rows, {cols} columns in row {row})")]
    NonSquare { rows: usize, cols: usize, row: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("entry ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("off-diagonal entry ({i}, {j}) = {value} is negative")]
    NegativeOffDiagonal { i: usize, j: usize, value: f64 },
    #[error("diagonal entry ({i}, {i}) = {value} is positive")]
    PositiveDiagonal { i: usize, value: f64 },
    #[error("row {i} sums to {residual:e} instead of 0")]
    RowSumNonZero { i: usize, residual: f64 },
    #[error("dimension mismatch: vector of length {vector} against {rows}x{cols} matrix")]
    DimensionMismatch { vector: usize, rows: usize, cols: usize },
    #[error("transition matrix is not stochastic: row-sum deviation {deviation:e}")]
    NonStochasticInput { deviation: f64 },
    #[error("probability entry {i} = {value} is negative or not finite")]
    InvalidProbability { i: usize, value: f64 },
    #[error("probability vector sums to {sum} instead of 1")]
    ProbabilitySumNotOne { sum: f64 },
    #[error("query point ({t}, {u}) must have finite nonnegative coordinates")]
    InvalidQueryPoint { t: f64, u: f64 },
    #[error("unknown solver `{0}` (expected series, laplace2d, or pde)")]
    UnknownSolver(String),
}

/// A (time, usage) evaluation point; both coordinates are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryPoint {
    pub t: f64,
    pub u: f64,
}

impl QueryPoint {
    pub fn new(t: f64, u: f64) -> Result<Self, ChainError> {
        if !(t.is_finite() && u.is_finite() && t >= 0.0 && u >= 0.0) {
            return Err(ChainError::InvalidQueryPoint { t, u });
        }
        Ok(Self { t, u })
    }

    pub fn origin() -> Self {
        Self { t: 0.0, u: 0.0 }
    }

    /// True if either coordinate is zero; the chain assumes `P(t, 0) =
    /// P(0, u) = I` (no transitions while one coordinate is frozen).
    pub fn on_boundary(&self) -> bool {
        self.t == 0.0 || self.u == 0.0
    }
}

impl fmt::Display for QueryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.t, self.u)
    }
}

/// Tag identifying which solver produced a transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Power series in `t·u`.
    Series,
    /// Double-Laplace-transform inversion of the resolvent.
    Laplace2d,
    /// Finite-difference Goursat solve.
    Pde,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Series => "series",
            SolverKind::Laplace2d => "laplace2d",
            SolverKind::Pde => "pde",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "series" => Ok(SolverKind::Series),
            "laplace2d" => Ok(SolverKind::Laplace2d),
            "pde" => Ok(SolverKind::Pde),
            other => Err(ChainError::UnknownSolver(other.to_string())),
        }
    }
}

/// A validated infinitesimal transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    a: Array2<f64>,
}

impl GeneratorMatrix {
    /// Validate a raw square matrix as a generator: off-diagonals
    /// nonnegative, diagonal nonpositive, rows summing to zero within
    /// [`GENERATOR_ROW_SUM_TOL`].
    pub fn validate(a: Array2<f64>) -> Result<Self, ChainError> {
        let (rows, cols) = a.dim();
        if rows == 0 || cols == 0 {
            return Err(ChainError::Empty);
        }
        if rows != cols {
            return Err(ChainError::NonSquare { rows, cols, row: 0 });
        }
        for i in 0..rows {
            for j in 0..cols {
                let value = a[[i, j]];
                if !value.is_finite() {
                    return Err(ChainError::NonFinite { i, j });
                }
                if i != j && value < 0.0 {
                    return Err(ChainError::NegativeOffDiagonal { i, j, value });
                }
                if i == j && value > 0.0 {
                    return Err(ChainError::PositiveDiagonal { i, value });
                }
            }
        }
        for i in 0..rows {
            let residual: f64 = a.row(i).sum();
            if residual.abs() > GENERATOR_ROW_SUM_TOL {
                return Err(ChainError::RowSumNonZero { i, residual });
            }
        }
        Ok(Self { a })
    }

    /// Validate a generator given as nested rows (the configuration-file
    /// form). Ragged input is reported as non-square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ChainError> {
        let n = rows.len();
        if n == 0 {
            return Err(ChainError::Empty);
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ChainError::NonSquare {
                    rows: n,
                    cols: row.len(),
                    row: i,
                });
            }
            flat.extend_from_slice(row);
        }
        let a = Array2::from_shape_vec((n, n), flat).expect("shape checked above");
        Self::validate(a)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    /// ∞-norm (maximum absolute row sum) of the generator.
    pub fn inf_norm(&self) -> f64 {
        crate::linalg::inf_norm(&self.a)
    }
}

/// Transition probabilities `P(t, u)` at a single query point.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: Array2<f64>,
    at: QueryPoint,
    method: SolverKind,
    range_warning: bool,
    row_sum_tol: f64,
}

impl TransitionMatrix {
    /// Wrap a solver result. `row_sum_tol` is the producing method's
    /// reported row-sum tolerance; the range warning is derived from the
    /// entries.
    pub fn new(p: Array2<f64>, at: QueryPoint, method: SolverKind, row_sum_tol: f64) -> Self {
        let range_warning = p
            .iter()
            .any(|&x| !(-RANGE_EPS..=1.0 + RANGE_EPS).contains(&x));
        Self {
            p,
            at,
            method,
            range_warning,
            row_sum_tol,
        }
    }

    /// The identity transition matrix, exact on the axes `t = 0` / `u = 0`.
    pub fn identity(n: usize, at: QueryPoint, method: SolverKind) -> Self {
        Self::new(Array2::eye(n), at, method, 0.0)
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn at(&self) -> QueryPoint {
        self.at
    }

    pub fn method(&self) -> SolverKind {
        self.method
    }

    /// True if some entry lies outside `[-RANGE_EPS, 1 + RANGE_EPS]`.
    pub fn range_warning(&self) -> bool {
        self.range_warning
    }

    /// Row-sum tolerance reported by the producing solver.
    pub fn row_sum_tol(&self) -> f64 {
        self.row_sum_tol
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_sum_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for row in self.p.rows() {
            worst = worst.max((row.sum() - 1.0).abs());
        }
        worst
    }
}

/// A probability row vector over the chain's states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    pi: Array1<f64>,
}

impl ProbabilityVector {
    /// Validate entries: nonnegative, finite, summing to 1 within
    /// [`PROBABILITY_SUM_TOL`].
    pub fn new(entries: Vec<f64>) -> Result<Self, ChainError> {
        for (i, &value) in entries.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ChainError::InvalidProbability { i, value });
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(ChainError::ProbabilitySumNotOne { sum });
        }
        Ok(Self {
            pi: Array1::from_vec(entries),
        })
    }

    /// Build without the nonnegativity check. Marginals of a transition
    /// matrix that carries a range warning can dip below zero; those are
    /// reported as-is rather than clipped.
    pub(crate) fn from_unchecked(pi: Array1<f64>) -> Self {
        Self { pi }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn entries(&self) -> &Array1<f64> {
        &self.pi
    }
}

/// Marginal state law at the transition matrix's query point:
/// `π(t, u) = π(0, 0) · P(t, u)`.
///
/// The input matrix must have row sums within [`MARGINAL_INPUT_TOL`] of 1;
/// the product is renormalized by its own sum, which by then deviates
/// from 1 by less than that tolerance.
pub fn marginal_distribution(
    initial: &ProbabilityVector,
    transition: &TransitionMatrix,
) -> Result<ProbabilityVector, ChainError> {
    let (rows, cols) = transition.matrix().dim();
    if initial.len() != rows {
        return Err(ChainError::DimensionMismatch {
            vector: initial.len(),
            rows,
            cols,
        });
    }
    let worst_row = transition.max_row_sum_residual();
    if worst_row >= MARGINAL_INPUT_TOL {
        return Err(ChainError::NonStochasticInput {
            deviation: worst_row,
        });
    }
    let product = initial.entries().dot(transition.matrix());
    let sum = product.sum();
    let deviation = (sum - 1.0).abs();
    if deviation >= MARGINAL_INPUT_TOL {
        return Err(ChainError::NonStochasticInput { deviation });
    }
    // Deviations at the probability-vector tolerance are roundoff, not
    // solver error; renormalizing there would perturb exact inputs
    // (π0 · I must reproduce π0 bit for bit).
    if deviation <= PROBABILITY_SUM_TOL {
        return Ok(ProbabilityVector::from_unchecked(product));
    }
    Ok(ProbabilityVector::from_unchecked(product / sum))
}
