//! Two-dimensional warranty policies and the expected-warranty-expense
//! computation.
//!
//! A policy is an ordered list of strictly nested rectangular coverage
//! regions over (time, usage), each with a servicing cost. Only the first
//! failure is covered (service restores the unit to better than new and
//! ends the warranty), so the expense is driven by the waiting-region CDF
//! `G` of the covered working state. Region k ≥ 2 is charged by the
//! corner-value difference `G(tₖ, uₖ) − G(tₖ₋₁, uₖ₋₁)`, not by the
//! probability of the L-shaped set difference of the rectangles; the two
//! agree only under extra assumptions, and the corner-difference
//! convention is the one implemented here.

use crate::chain::QueryPoint;
use crate::inversion::InversionConfig;
use crate::waiting::{waiting_cdf_at, WaitingDistribution, WaitingError};
use thiserror::Error;

/// Increments below this are treated as genuine negativity rather than
/// inversion noise.
pub const NEGATIVE_INCREMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WarrantyError {
    #[error("region {region} has a non-positive or non-finite limit")]
    NonPositiveLimit { region: usize },
    #[error("region {region} has cost {cost}, which is negative or not finite")]
    NegativeCost { region: usize, cost: f64 },
    #[error("region {region} does not strictly enclose its predecessor")]
    NotNested { region: usize },
    #[error("base cost {0} must be positive and finite")]
    NonPositiveBaseCost(f64),
    #[error("policy covers state {policy} but the distribution is for state {distribution}")]
    StateMismatch { policy: usize, distribution: usize },
    #[error("region {region} increment {value} is negative beyond tolerance")]
    NegativeIncrement { region: usize, value: f64 },
    #[error(transparent)]
    Waiting(#[from] WaitingError),
}

/// One rectangular coverage region `[0, t_limit] × [0, u_limit]` with its
/// servicing cost (same money unit as the policy's base cost).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRegion {
    pub t_limit: f64,
    pub u_limit: f64,
    pub cost: f64,
}

impl CoverageRegion {
    pub fn new(t_limit: f64, u_limit: f64, cost: f64) -> Self {
        Self {
            t_limit,
            u_limit,
            cost,
        }
    }
}

/// A validated warranty policy: strictly nested regions, nonnegative
/// costs, positive base cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WarrantyPolicy {
    from_state: usize,
    base_cost: f64,
    regions: Vec<CoverageRegion>,
}

impl WarrantyPolicy {
    /// Validate raw regions: every limit positive, limits strictly
    /// increasing along the list in both coordinates, costs nonnegative.
    pub fn validate(
        from_state: usize,
        base_cost: f64,
        regions: Vec<CoverageRegion>,
    ) -> Result<Self, WarrantyError> {
        if !(base_cost > 0.0 && base_cost.is_finite()) {
            return Err(WarrantyError::NonPositiveBaseCost(base_cost));
        }
        for (k, region) in regions.iter().enumerate() {
            if !(region.t_limit > 0.0
                && region.u_limit > 0.0
                && region.t_limit.is_finite()
                && region.u_limit.is_finite())
            {
                return Err(WarrantyError::NonPositiveLimit { region: k });
            }
            if !(region.cost >= 0.0 && region.cost.is_finite()) {
                return Err(WarrantyError::NegativeCost {
                    region: k,
                    cost: region.cost,
                });
            }
            if k > 0 {
                let previous = &regions[k - 1];
                if !(region.t_limit > previous.t_limit && region.u_limit > previous.u_limit) {
                    return Err(WarrantyError::NotNested { region: k });
                }
            }
        }
        Ok(Self {
            from_state,
            base_cost,
            regions,
        })
    }

    pub fn from_state(&self) -> usize {
        self.from_state
    }

    /// Unit cost of the machine; the reporting scale for the expense.
    pub fn base_cost(&self) -> f64 {
        self.base_cost
    }

    pub fn regions(&self) -> &[CoverageRegion] {
        &self.regions
    }
}

/// Expense breakdown: the total plus each region's first-failure
/// probability increment and cost contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpenseReport {
    pub ewe: f64,
    pub per_region_probabilities: Vec<f64>,
    pub per_region_contributions: Vec<f64>,
}

/// Expected warranty expense: `q₁ = G(t₁, u₁)`,
/// `qₖ = G(tₖ, uₖ) − G(tₖ₋₁, uₖ₋₁)` for k ≥ 2, and `EWE = Σ cₖ·qₖ`.
pub fn expected_warranty_expense(
    policy: &WarrantyPolicy,
    dist: &WaitingDistribution,
    cfg: &InversionConfig,
) -> Result<ExpenseReport, WarrantyError> {
    if policy.from_state() != dist.from_state() {
        return Err(WarrantyError::StateMismatch {
            policy: policy.from_state(),
            distribution: dist.from_state(),
        });
    }
    let mut corner_values = Vec::with_capacity(policy.regions().len());
    for region in policy.regions() {
        let at = QueryPoint {
            t: region.t_limit,
            u: region.u_limit,
        };
        corner_values.push(waiting_cdf_at(dist, at, cfg)?);
    }
    let mut probabilities = Vec::with_capacity(corner_values.len());
    let mut contributions = Vec::with_capacity(corner_values.len());
    let mut ewe = 0.0;
    for (k, region) in policy.regions().iter().enumerate() {
        let increment = if k == 0 {
            corner_values[0]
        } else {
            corner_values[k] - corner_values[k - 1]
        };
        if increment < -NEGATIVE_INCREMENT_TOL {
            return Err(WarrantyError::NegativeIncrement {
                region: k,
                value: increment,
            });
        }
        let contribution = region.cost * increment;
        ewe += contribution;
        probabilities.push(increment);
        contributions.push(contribution);
    }
    Ok(ExpenseReport {
        ewe,
        per_region_probabilities: probabilities,
        per_region_contributions: contributions,
    })
}
