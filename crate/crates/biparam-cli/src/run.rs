//! Per-subcommand computations. Query points are dispatched to a rayon
//! worker pool (capped by `BIPARAM_MAX_THREADS`); result assembly keeps
//! the input order.

use biparam::resolvent::{SERIES_DEFAULT_MAX_TERMS, SERIES_DEFAULT_REL_TOL};
use biparam::{
    expected_warranty_expense, extract_waiting_transforms, invert2d_matrix, marginal_distribution,
    series_transition, solve_goursat, survival, waiting_cdf_at, GoursatSide, QueryPoint,
    SolverKind, TransitionMatrix, WaitingDistribution,
};
use rayon::prelude::*;

use crate::config::ValidatedRun;
use crate::output::{
    CompareResult, MarginalResult, Results, TransitionResult, WaitingResult, WarrantyRegionResult,
    WarrantyResult,
};
use crate::CliError;

pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("BIPARAM_MAX_THREADS") {
        let cap: usize = value.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::config(format!(
                "BIPARAM_MAX_THREADS = `{value}` is not a positive thread count"
            ))
        })?;
        builder = builder.num_threads(cap);
    }
    builder
        .build()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::numerical(e.to_string())
}

fn compute_transition(
    run: &ValidatedRun,
    at: QueryPoint,
    method: SolverKind,
) -> Result<TransitionMatrix, CliError> {
    if at.on_boundary() {
        return Ok(TransitionMatrix::identity(run.generator.n(), at, method));
    }
    match method {
        SolverKind::Series => series_transition(
            &run.generator,
            at,
            SERIES_DEFAULT_MAX_TERMS,
            SERIES_DEFAULT_REL_TOL,
        )
        .map_err(numerical),
        SolverKind::Laplace2d => {
            invert2d_matrix(&run.generator, at, &run.inversion).map_err(numerical)
        }
        SolverKind::Pde => {
            let (nt, nu) = run
                .pde_grid
                .unwrap_or_else(|| biparam::pde::auto_grid_steps(&run.generator, at));
            let grid = solve_goursat(&run.generator, at.t, at.u, nt, nu, GoursatSide::Backward)
                .map_err(numerical)?;
            grid.lookup(at).map_err(numerical)
        }
    }
}

fn transition_result(p: &TransitionMatrix) -> TransitionResult {
    TransitionResult {
        t: p.at().t,
        u: p.at().u,
        method: p.method().to_string(),
        range_warning: p.range_warning(),
        row_sum_residual: p.max_row_sum_residual(),
        p: p
            .matrix()
            .rows()
            .into_iter()
            .map(|row| row.to_vec())
            .collect(),
    }
}

pub fn run_transition(run: &ValidatedRun, pool: &rayon::ThreadPool) -> Result<Results, CliError> {
    let rows = pool.install(|| {
        run.queries
            .par_iter()
            .map(|&at| compute_transition(run, at, run.method).map(|p| transition_result(&p)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut results = Results {
        transitions: Some(rows),
        ..Results::default()
    };
    if run.raw.compare {
        results.compare = Some(compare_rows(run, pool)?);
    }
    Ok(results)
}

pub fn run_marginal(run: &ValidatedRun, pool: &rayon::ThreadPool) -> Result<Results, CliError> {
    let initial = run.initial.as_ref().ok_or_else(|| {
        CliError::config("marginal requires an `initial` probability vector in the config")
    })?;
    let pairs = pool.install(|| {
        run.queries
            .par_iter()
            .map(|&at| {
                let p = compute_transition(run, at, run.method)?;
                let pi = marginal_distribution(initial, &p).map_err(numerical)?;
                Ok::<_, CliError>((
                    transition_result(&p),
                    MarginalResult {
                        t: at.t,
                        u: at.u,
                        method: p.method().to_string(),
                        range_warning: p.range_warning(),
                        pi: pi.entries().to_vec(),
                    },
                ))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let (transitions, marginals) = pairs.into_iter().unzip();
    let mut results = Results {
        transitions: Some(transitions),
        marginals: Some(marginals),
        ..Results::default()
    };
    if run.raw.compare {
        results.compare = Some(compare_rows(run, pool)?);
    }
    Ok(results)
}

fn two_state_distributions(
    run: &ValidatedRun,
) -> Result<(WaitingDistribution, WaitingDistribution), CliError> {
    extract_waiting_transforms(&run.generator).map_err(numerical)
}

pub fn run_waiting(run: &ValidatedRun, pool: &rayon::ThreadPool) -> Result<Results, CliError> {
    let has_rates = run.waiting_rates.is_some();
    let extracted = if run.generator.n() == 2 {
        Some(two_state_distributions(run)?)
    } else {
        None
    };
    if !has_rates && extracted.is_none() {
        return Err(CliError::config(
            "waiting requires `waitingRates` in the config or a 2-state generator",
        ));
    }
    let rows = pool.install(|| {
        run.queries
            .par_iter()
            .map(|&at| {
                let survival_by_state = run
                    .waiting_rates
                    .as_ref()
                    .map(|rates| rates.iter().map(|r| survival(r, at)).collect());
                let cdf_by_state = match &extracted {
                    Some((f, g)) => {
                        // The CDF vanishes on the axes: no mass at zero
                        // elapsed time or zero usage.
                        let value_of = |dist: &WaitingDistribution| {
                            if at.on_boundary() {
                                Ok(0.0)
                            } else {
                                waiting_cdf_at(dist, at, &run.inversion).map_err(numerical)
                            }
                        };
                        Some(vec![value_of(f)?, value_of(g)?])
                    }
                    None => None,
                };
                Ok::<_, CliError>(WaitingResult {
                    t: at.t,
                    u: at.u,
                    survival_by_state,
                    cdf_by_state,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(Results {
        waiting: Some(rows),
        ..Results::default()
    })
}

pub fn run_warranty(run: &ValidatedRun) -> Result<Results, CliError> {
    let policy = run.policy.as_ref().ok_or_else(|| {
        CliError::config("warranty requires a `policy` block in the config")
    })?;
    let (f, g) = two_state_distributions(run)?;
    let dist = match policy.from_state() {
        0 => f,
        1 => g,
        other => {
            return Err(CliError::config(format!(
                "policy.fromState {other} has no extracted waiting distribution (2-state chain)"
            )))
        }
    };
    let report = expected_warranty_expense(policy, &dist, &run.inversion).map_err(numerical)?;
    let regions = policy
        .regions()
        .iter()
        .zip(
            report
                .per_region_probabilities
                .iter()
                .zip(report.per_region_contributions.iter()),
        )
        .map(|(region, (&probability, &contribution))| WarrantyRegionResult {
            t_limit: region.t_limit,
            u_limit: region.u_limit,
            cost: region.cost,
            probability,
            contribution,
        })
        .collect();
    Ok(Results {
        warranty: Some(WarrantyResult {
            from_state: policy.from_state(),
            base_cost: policy.base_cost(),
            ewe: report.ewe,
            ewe_in_base_cost_units: report.ewe / policy.base_cost(),
            regions,
        }),
        ..Results::default()
    })
}

fn compare_rows(
    run: &ValidatedRun,
    pool: &rayon::ThreadPool,
) -> Result<Vec<CompareResult>, CliError> {
    pool.install(|| {
        run.queries
            .par_iter()
            .map(|&at| {
                let series = compute_transition(run, at, SolverKind::Series)?;
                let laplace = compute_transition(run, at, SolverKind::Laplace2d)?;
                let pde = compute_transition(run, at, SolverKind::Pde)?;
                let n = series.n();
                let mut deviation = vec![vec![0.0; n]; n];
                let mut max_deviation = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let a = series.matrix()[[i, j]];
                        let b = laplace.matrix()[[i, j]];
                        let c = pde.matrix()[[i, j]];
                        let spread =
                            (a - b).abs().max((a - c).abs()).max((b - c).abs());
                        deviation[i][j] = spread;
                        max_deviation = max_deviation.max(spread);
                    }
                }
                let rows = |p: &TransitionMatrix| {
                    p.matrix()
                        .rows()
                        .into_iter()
                        .map(|row| row.to_vec())
                        .collect::<Vec<_>>()
                };
                Ok::<_, CliError>(CompareResult {
                    t: at.t,
                    u: at.u,
                    max_deviation,
                    deviation,
                    p_series: rows(&series),
                    p_laplace2d: rows(&laplace),
                    p_pde: rows(&pde),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })
}

pub fn run_compare(run: &ValidatedRun, pool: &rayon::ThreadPool) -> Result<Results, CliError> {
    Ok(Results {
        compare: Some(compare_rows(run, pool)?),
        ..Results::default()
    })
}
