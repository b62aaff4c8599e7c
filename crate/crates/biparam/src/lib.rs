//! Numerical toolkit for homogeneous Markov chains indexed by a
//! continuous two-dimensional parameter, typically time and usage.
//!
//! Such a chain is characterized by an infinitesimal transition matrix
//! `A` of mixed second partials of the transition probabilities at the
//! origin. The transition matrix `P(t, u)` solves the hyperbolic Goursat
//! problem `∂²P/∂t∂u = A·P = P·A` with `P(t, 0) = P(0, u) = I`, and its
//! double Laplace transform is the resolvent `(s₁s₂I − A)⁻¹`.
//!
//! Three independent solvers are provided and cross-checked against each
//! other: a power series in `t·u` ([`resolvent::series_transition`]),
//! two-dimensional Laplace inversion of the resolvent
//! ([`resolvent::invert2d_matrix`]), and a finite-difference Goursat
//! marcher ([`pde::solve_goursat`]). On top of the chain layer sit
//! waiting-region distributions ([`waiting`]) and a two-dimensional
//! warranty cost model ([`warranty`]).
//!
//! Everything is immutable after construction and every operation is a
//! pure function, so query points can be fanned out across worker threads
//! without coordination.

pub mod chain;
pub mod inversion;
mod linalg;
pub mod pde;
pub mod resolvent;
pub mod waiting;
pub mod warranty;

pub use chain::{
    marginal_distribution, ChainError, GeneratorMatrix, ProbabilityVector, QueryPoint, SolverKind,
    TransitionMatrix,
};
pub use inversion::{
    invert2d_scalar, EvalError, InversionConfig, InversionError, InversionOrder, ScalarTransform,
    TransformPoint,
};
pub use pde::{solve_goursat, GoursatGrid, GoursatSide, PdeError};
pub use resolvent::{
    ck_residual, invert2d_matrix, resolvent_at, series_transition, transition_default,
    ResolventError,
};
pub use waiting::{
    extract_waiting_transforms, factorization_residual, survival, waiting_cdf_at,
    WaitingDistribution, WaitingError, WaitingRegionRates,
};
pub use warranty::{
    expected_warranty_expense, CoverageRegion, ExpenseReport, WarrantyError, WarrantyPolicy,
};

/// Any error surfaced by the toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Waiting(#[from] WaitingError),
    #[error(transparent)]
    Warranty(#[from] WarrantyError),
}
