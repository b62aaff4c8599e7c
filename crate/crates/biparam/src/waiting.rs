//! Waiting-region laws: how long (in time and usage together) the chain
//! stays in a state before leaving it.
//!
//! Two characterizations coexist and are deliberately kept independent.
//! The survival factorization `F̄(s+t, w+u) = F̄(t, u)·F̄(s, w)` forces the
//! product-exponential form `exp(−λ₁t − λ₂u)` with per-state rates that
//! are supplied by the caller, never derived from the generator. For a
//! two-state chain, the renewal equations instead yield waiting densities
//! in the transform domain as ratios of resolvent entries, and those
//! originals depend on the product `t·u` only. The two families are not
//! consistent with one another; both are implemented as stated and
//! nothing here asserts their agreement.

use crate::chain::{GeneratorMatrix, QueryPoint};
use crate::inversion::{
    invert2d_scalar, EvalError, InversionConfig, InversionError, ScalarTransform, TransformPoint,
};
use crate::resolvent::resolvent_at;
use thiserror::Error;

/// Mass defect allowed for a density transform at the near-origin probe
/// point `(1e-6, 1e-6)`.
pub const MASS_CHECK_TOL: f64 = 1e-3;
/// Inverted CDF values in `(−CDF_CLAMP_TOL, 0)` are clamped to zero;
/// anything below `−CDF_CLAMP_TOL` or above `1 + CDF_CLAMP_TOL` is an
/// error rather than hidden noise.
pub const CDF_CLAMP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaitingError {
    #[error("rate ({lambda_t}, {lambda_u}) for state {state} must be finite and nonnegative")]
    InvalidRates {
        state: usize,
        lambda_t: f64,
        lambda_u: f64,
    },
    #[error("waiting-transform extraction is defined for 2-state chains, got {n} states")]
    UnsupportedStateCount { n: usize },
    #[error("density transform has mass {mass} at the origin probe (defect {defect:e})")]
    MassDefect { mass: f64, defect: f64 },
    #[error("inverted CDF value {value} lies outside [-1e-6, 1 + 1e-6]")]
    OutOfRange { value: f64 },
    #[error(transparent)]
    Inversion(#[from] InversionError),
}

/// Product-exponential waiting law for one state: survival
/// `exp(−λ₁t − λ₂u)`.
///
/// Rates are per time-unit and per usage-unit respectively. Both zero is
/// allowed and models an absorbing state (survival identically 1); for a
/// state the chain can actually leave, at least one rate should be
/// positive, which is the caller's modelling responsibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitingRegionRates {
    state: usize,
    lambda_t: f64,
    lambda_u: f64,
}

impl WaitingRegionRates {
    pub fn new(state: usize, lambda_t: f64, lambda_u: f64) -> Result<Self, WaitingError> {
        if !(lambda_t.is_finite() && lambda_u.is_finite() && lambda_t >= 0.0 && lambda_u >= 0.0) {
            return Err(WaitingError::InvalidRates {
                state,
                lambda_t,
                lambda_u,
            });
        }
        Ok(Self {
            state,
            lambda_t,
            lambda_u,
        })
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    pub fn lambda_u(&self) -> f64 {
        self.lambda_u
    }
}

/// Survival probability `P(τ > t, γ > u) = exp(−λ₁t − λ₂u)`.
pub fn survival(rates: &WaitingRegionRates, at: QueryPoint) -> f64 {
    (-rates.lambda_t * at.t - rates.lambda_u * at.u).exp()
}

/// `|F̄(p₁+p₂) − F̄(p₁)·F̄(p₂)|` — zero to machine precision for the
/// product-exponential law, strictly positive for anything else.
pub fn factorization_residual(
    rates: &WaitingRegionRates,
    p1: QueryPoint,
    p2: QueryPoint,
) -> f64 {
    let joint = QueryPoint {
        t: p1.t + p2.t,
        u: p1.u + p2.u,
    };
    (survival(rates, joint) - survival(rates, p1) * survival(rates, p2)).abs()
}

/// A waiting-region distribution in the transform domain: the density
/// transform and its CDF transform (density divided by `s₁s₂`).
#[derive(Debug, Clone)]
pub struct WaitingDistribution {
    from_state: usize,
    density: ScalarTransform,
    cdf: ScalarTransform,
}

impl WaitingDistribution {
    /// Build from a density transform, deriving the CDF transform.
    /// Construction probes the density at `(1e-6, 1e-6)`, where a unit
    /// total mass must show up as a value within [`MASS_CHECK_TOL`] of 1.
    pub fn new(from_state: usize, density: ScalarTransform) -> Result<Self, WaitingError> {
        let probe = TransformPoint::real(1e-6, 1e-6);
        let mass = density
            .eval(probe)
            .map_err(|source| WaitingError::Inversion(InversionError::Evaluation {
                entry: None,
                source,
            }))?
            .re;
        let defect = (mass - 1.0).abs();
        if defect > MASS_CHECK_TOL {
            return Err(WaitingError::MassDefect { mass, defect });
        }
        let inner = density.clone();
        let cdf = ScalarTransform::new(move |p| {
            let z = p.s1 * p.s2;
            if z.norm() < f64::MIN_POSITIVE {
                return Err(EvalError::at(p, "CDF transform pole at s1*s2 = 0"));
            }
            Ok(inner.eval(p)? / z)
        });
        Ok(Self {
            from_state,
            density,
            cdf,
        })
    }

    /// As [`new`](Self::new) but with an explicit CDF transform, for
    /// distributions given directly in closed form.
    pub fn with_cdf(
        from_state: usize,
        density: ScalarTransform,
        cdf: ScalarTransform,
    ) -> Result<Self, WaitingError> {
        let built = Self::new(from_state, density)?;
        Ok(Self { cdf, ..built })
    }

    pub fn from_state(&self) -> usize {
        self.from_state
    }

    pub fn density_transform(&self) -> &ScalarTransform {
        &self.density
    }

    pub fn cdf_transform(&self) -> &ScalarTransform {
        &self.cdf
    }
}

/// Extract the waiting-region distributions of a two-state chain from its
/// resolvent: the density transforms are the ratios
/// `f** = p₀₁**/p₁₁**` (state 0) and `g** = p₁₀**/p₀₀**` (state 1) coming
/// from the transform-domain renewal equations.
pub fn extract_waiting_transforms(
    gen: &GeneratorMatrix,
) -> Result<(WaitingDistribution, WaitingDistribution), WaitingError> {
    let n = gen.n();
    if n != 2 {
        return Err(WaitingError::UnsupportedStateCount { n });
    }
    let f_density = resolvent_ratio(gen.clone(), (0, 1), (1, 1));
    let g_density = resolvent_ratio(gen.clone(), (1, 0), (0, 0));
    Ok((
        WaitingDistribution::new(0, f_density)?,
        WaitingDistribution::new(1, g_density)?,
    ))
}

fn resolvent_ratio(
    gen: GeneratorMatrix,
    numerator: (usize, usize),
    denominator: (usize, usize),
) -> ScalarTransform {
    ScalarTransform::new(move |p| {
        let r = resolvent_at(&gen, p).map_err(|e| EvalError::at(p, e.to_string()))?;
        let num = r[[numerator.0, numerator.1]];
        let den = r[[denominator.0, denominator.1]];
        if den.norm() < 1e-14 * num.norm().max(1.0) {
            return Err(EvalError::at(
                p,
                format!("singular ratio: denominator entry {denominator:?} vanishes"),
            ));
        }
        Ok(num / den)
    })
}

/// Evaluate the waiting-region CDF at `(t, u)` by inverting its transform.
/// Inversion noise in `(−1e-6, 0)` is clamped to zero; larger excursions
/// outside `[0, 1]` surface as [`WaitingError::OutOfRange`].
pub fn waiting_cdf_at(
    dist: &WaitingDistribution,
    at: QueryPoint,
    cfg: &InversionConfig,
) -> Result<f64, WaitingError> {
    let value = invert2d_scalar(dist.cdf_transform(), at, cfg)?;
    if !(-CDF_CLAMP_TOL..=1.0 + CDF_CLAMP_TOL).contains(&value) {
        return Err(WaitingError::OutOfRange { value });
    }
    Ok(if value < 0.0 { 0.0 } else { value })
}
