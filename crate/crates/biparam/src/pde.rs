//! Finite-difference Goursat solver for the Kolmogorov equations, used to
//! cross-validate the series and Laplace solvers.
//!
//! The field satisfies `∂²P/∂t∂u = A·P` (backward) or `P·A` (forward) with
//! identity data on both axes. Integrating over one grid cell gives the
//! characteristic-rectangle update
//!
//! ```text
//! P[i+1][j+1] = P[i+1][j] + P[i][j+1] − P[i][j] + h·k·M(P̄)
//! ```
//!
//! with `P̄` the four-corner average (trapezoidal rule). The unknown corner
//! enters `P̄` through a linear-extrapolation predictor
//! (`P[i+1][j] + P[i][j+1] − P[i][j]`) resolved by a single fixed-point
//! sweep, which keeps the scheme second order in `(h, k)` as long as the
//! step guard `h·k·‖A‖∞ ≤ 0.1` holds.

use crate::chain::{GeneratorMatrix, QueryPoint, SolverKind, TransitionMatrix};
use ndarray::{Array2, Array4};
use thiserror::Error;

/// Fixed-point contraction guard: `h·k·‖A‖∞` beyond this is rejected.
pub const STEP_GUARD: f64 = 0.1;
/// Cap on grid payload: `(nt+1)·(nu+1)·n²` f64 values (8 bytes each).
pub const MEMORY_BUDGET_BYTES: u128 = 1 << 30;
/// Step counts must lie in `[2, MAX_STEPS]`.
pub const MAX_STEPS: usize = 100_000;
/// Row-sum tolerance reported for grid lookups.
pub const PDE_ROW_SUM_TOL: f64 = 1e-8;

/// Which Kolmogorov equation drives the march.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoursatSide {
    /// `∂²P/∂t∂u = A·P`
    Backward,
    /// `∂²P/∂t∂u = P·A`
    Forward,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("step too coarse: h*k*norm(A) = {value} exceeds the guard 0.1")]
    StepTooCoarse { value: f64 },
    #[error("grid would need {required} bytes, over the 1 GiB budget")]
    BudgetExceeded { required: u128 },
    #[error("query ({t}, {u}) outside the grid domain [0, {t_max}] x [0, {u_max}]")]
    OutOfDomain {
        t: f64,
        u: f64,
        t_max: f64,
        u_max: f64,
    },
}

/// A solved Goursat field: `(nt+1) × (nu+1)` nodes of `n × n` matrices
/// with identity data on both axes.
#[derive(Debug, Clone)]
pub struct GoursatGrid {
    t_max: f64,
    u_max: f64,
    nt: usize,
    nu: usize,
    n: usize,
    side: GoursatSide,
    values: Array4<f64>,
}

impl GoursatGrid {
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn steps(&self) -> (usize, usize) {
        (self.nt, self.nu)
    }

    pub fn state_count(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> GoursatSide {
        self.side
    }

    /// The stored matrix at grid node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> Array2<f64> {
        let n = self.n;
        let mut out = Array2::zeros((n, n));
        for r in 0..n {
            for c in 0..n {
                out[[r, c]] = self.values[[i, j, r, c]];
            }
        }
        out
    }

    /// Bilinear interpolation between the four surrounding nodes. Exact at
    /// nodes and on bilinear data; the oracle role only needs ~1e-4.
    pub fn lookup(&self, at: QueryPoint) -> Result<TransitionMatrix, PdeError> {
        if !(at.t >= 0.0 && at.u >= 0.0 && at.t <= self.t_max && at.u <= self.u_max) {
            return Err(PdeError::OutOfDomain {
                t: at.t,
                u: at.u,
                t_max: self.t_max,
                u_max: self.u_max,
            });
        }
        let x = at.t / self.t_max * self.nt as f64;
        let y = at.u / self.u_max * self.nu as f64;
        let i = (x.floor() as usize).min(self.nt - 1);
        let j = (y.floor() as usize).min(self.nu - 1);
        let alpha = x - i as f64;
        let beta = y - j as f64;

        let n = self.n;
        let mut p = Array2::zeros((n, n));
        let w00 = (1.0 - alpha) * (1.0 - beta);
        let w10 = alpha * (1.0 - beta);
        let w01 = (1.0 - alpha) * beta;
        let w11 = alpha * beta;
        for r in 0..n {
            for c in 0..n {
                p[[r, c]] = w00 * self.values[[i, j, r, c]]
                    + w10 * self.values[[i + 1, j, r, c]]
                    + w01 * self.values[[i, j + 1, r, c]]
                    + w11 * self.values[[i + 1, j + 1, r, c]];
            }
        }
        Ok(TransitionMatrix::new(
            p,
            at,
            SolverKind::Pde,
            PDE_ROW_SUM_TOL,
        ))
    }
}

/// March the trapezoidal Goursat scheme over `[0, t_max] × [0, u_max]`.
pub fn solve_goursat(
    gen: &GeneratorMatrix,
    t_max: f64,
    u_max: f64,
    nt: usize,
    nu: usize,
    side: GoursatSide,
) -> Result<GoursatGrid, PdeError> {
    if !(t_max > 0.0 && u_max > 0.0 && t_max.is_finite() && u_max.is_finite()) {
        return Err(PdeError::InvalidGrid(format!(
            "horizons must be positive and finite, got ({t_max}, {u_max})"
        )));
    }
    if !(2..=MAX_STEPS).contains(&nt) || !(2..=MAX_STEPS).contains(&nu) {
        return Err(PdeError::InvalidGrid(format!(
            "step counts must lie in [2, {MAX_STEPS}], got ({nt}, {nu})"
        )));
    }
    let n = gen.n();
    let required = (nt as u128 + 1) * (nu as u128 + 1) * (n as u128 * n as u128) * 8;
    if required > MEMORY_BUDGET_BYTES {
        return Err(PdeError::BudgetExceeded { required });
    }
    let h = t_max / nt as f64;
    let k = u_max / nu as f64;
    let guard = h * k * gen.inf_norm();
    if guard > STEP_GUARD {
        return Err(PdeError::StepTooCoarse { value: guard });
    }

    let a = gen.matrix();
    let hk = h * k;
    let mut values = Array4::<f64>::zeros((nt + 1, nu + 1, n, n));
    for i in 0..=nt {
        for r in 0..n {
            values[[i, 0, r, r]] = 1.0;
        }
    }
    for j in 0..=nu {
        for r in 0..n {
            values[[0, j, r, r]] = 1.0;
        }
    }

    // Cells are filled row by row; each cell needs only its west, south,
    // and south-west neighbours, so the sweep respects the dependency.
    let mut base = Array2::<f64>::zeros((n, n));
    let mut pbar = Array2::<f64>::zeros((n, n));
    let mut source = Array2::<f64>::zeros((n, n));
    for i in 0..nt {
        for j in 0..nu {
            for r in 0..n {
                for c in 0..n {
                    let south = values[[i + 1, j, r, c]];
                    let west = values[[i, j + 1, r, c]];
                    let corner = values[[i, j, r, c]];
                    let b = south + west - corner;
                    base[[r, c]] = b;
                    pbar[[r, c]] = 0.25 * (corner + south + west + b);
                }
            }
            match side {
                GoursatSide::Backward => {
                    for r in 0..n {
                        for c in 0..n {
                            let mut acc = 0.0;
                            for m in 0..n {
                                acc += a[[r, m]] * pbar[[m, c]];
                            }
                            source[[r, c]] = acc;
                        }
                    }
                }
                GoursatSide::Forward => {
                    for r in 0..n {
                        for c in 0..n {
                            let mut acc = 0.0;
                            for m in 0..n {
                                acc += pbar[[r, m]] * a[[m, c]];
                            }
                            source[[r, c]] = acc;
                        }
                    }
                }
            }
            for r in 0..n {
                for c in 0..n {
                    values[[i + 1, j + 1, r, c]] = base[[r, c]] + hk * source[[r, c]];
                }
            }
        }
    }

    Ok(GoursatGrid {
        t_max,
        u_max,
        nt,
        nu,
        n,
        side,
        values,
    })
}

/// Default step counts for oracle solves at a single query point: square
/// grid sized so `h·k·‖A‖∞ ≈ 0.005`, comfortably inside the guard.
pub fn auto_grid_steps(gen: &GeneratorMatrix, at: QueryPoint) -> (usize, usize) {
    let norm = gen.inf_norm().max(f64::MIN_POSITIVE);
    let steps = (at.t * at.u * norm / 0.005).sqrt().ceil() as usize;
    let clamped = steps.clamp(200, 2000);
    (clamped, clamped)
}
