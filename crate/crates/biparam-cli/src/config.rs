//! Run configuration: the JSON document ingested by every subcommand,
//! plus its translation into validated domain types.

use biparam::{
    CoverageRegion, GeneratorMatrix, InversionConfig, InversionOrder, ProbabilityVector,
    QueryPoint, SolverKind, WaitingRegionRates, WarrantyPolicy,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::CliError;

/// On-disk configuration. Field names are fixed; unknown fields are
/// rejected so typos fail loudly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    /// State labels; index order defines the state indices used everywhere.
    pub states: Vec<String>,
    pub generator: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    /// Query points as `[t, u]` pairs.
    pub queries: Vec<[f64; 2]>,
    /// One of `series`, `laplace2d`, `pde`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<InversionSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde_grid: Option<[usize; 2]>,
    /// Optional per-state `[λ_time, λ_usage]` waiting-region rates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waiting_rates: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyConfig>,
    /// `csv` or `json`; overridable with `--output`.
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default)]
    pub compare: bool,
}

fn default_output() -> String {
    "json".to_string()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InversionSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_decimal_digits: Option<u32>,
    /// `s2-first` (default) or `s1-first`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_outer_order: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PolicyConfig {
    pub from_state: usize,
    pub base_cost: f64,
    pub regions: Vec<RegionConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RegionConfig {
    pub t_limit: f64,
    pub u_limit: f64,
    pub cost: f64,
}

/// Output format, after merging the config with command-line overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CliError::config(format!(
                "unknown output format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// Everything a run needs, validated and in domain form.
pub struct ValidatedRun {
    pub raw: RunConfig,
    pub generator: GeneratorMatrix,
    pub initial: Option<ProbabilityVector>,
    pub queries: Vec<QueryPoint>,
    pub method: SolverKind,
    pub inversion: InversionConfig,
    pub pde_grid: Option<(usize, usize)>,
    pub waiting_rates: Option<Vec<WaitingRegionRates>>,
    pub policy: Option<WarrantyPolicy>,
    pub output: OutputFormat,
}

pub fn load(path: &Path, digits_override: Option<u32>, output_override: Option<&str>) -> Result<ValidatedRun, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RunConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    validate(raw, digits_override, output_override)
}

pub fn validate(
    raw: RunConfig,
    digits_override: Option<u32>,
    output_override: Option<&str>,
) -> Result<ValidatedRun, CliError> {
    let generator = GeneratorMatrix::from_rows(&raw.generator)
        .map_err(|e| CliError::config(format!("generator: {e}")))?;
    let n = generator.n();
    if raw.states.len() != n {
        return Err(CliError::config(format!(
            "states lists {} labels but the generator has {n} states",
            raw.states.len()
        )));
    }

    let initial = match &raw.initial {
        Some(entries) => {
            let pi = ProbabilityVector::new(entries.clone())
                .map_err(|e| CliError::config(format!("initial: {e}")))?;
            if pi.len() != n {
                return Err(CliError::config(format!(
                    "initial has {} entries for {n} states",
                    pi.len()
                )));
            }
            Some(pi)
        }
        None => None,
    };

    let mut queries = Vec::with_capacity(raw.queries.len());
    for (idx, &[t, u]) in raw.queries.iter().enumerate() {
        queries.push(
            QueryPoint::new(t, u)
                .map_err(|e| CliError::config(format!("queries[{idx}]: {e}")))?,
        );
    }

    let method: SolverKind = raw
        .method
        .parse()
        .map_err(|e| CliError::config(format!("method: {e}")))?;

    let settings = raw.inversion.clone().unwrap_or_default();
    let defaults = InversionConfig::default();
    let order = match settings.inner_outer_order.as_deref() {
        None => defaults.order(),
        Some("s2-first") => InversionOrder::S2First,
        Some("s1-first") => InversionOrder::S1First,
        Some(other) => {
            return Err(CliError::config(format!(
                "inversion.innerOuterOrder: unknown order `{other}` (expected s2-first or s1-first)"
            )))
        }
    };
    let digits = digits_override
        .or(settings.target_decimal_digits)
        .unwrap_or_else(|| defaults.target_decimal_digits());
    let inversion = InversionConfig::new(
        settings.euler_terms.unwrap_or_else(|| defaults.euler_terms()),
        digits,
        order,
    )
    .map_err(|e| CliError::config(format!("inversion: {e}")))?;

    let pde_grid = match raw.pde_grid {
        Some([nt, nu]) => {
            if !(2..=100_000).contains(&nt) || !(2..=100_000).contains(&nu) {
                return Err(CliError::config(format!(
                    "pdeGrid: step counts ({nt}, {nu}) outside [2, 100000]"
                )));
            }
            Some((nt, nu))
        }
        None => None,
    };

    let waiting_rates = match &raw.waiting_rates {
        Some(rows) => {
            if rows.len() != n {
                return Err(CliError::config(format!(
                    "waitingRates lists {} states but the generator has {n}",
                    rows.len()
                )));
            }
            let mut rates = Vec::with_capacity(n);
            for (state, &[lt, lu]) in rows.iter().enumerate() {
                rates.push(
                    WaitingRegionRates::new(state, lt, lu)
                        .map_err(|e| CliError::config(format!("waitingRates[{state}]: {e}")))?,
                );
            }
            Some(rates)
        }
        None => None,
    };

    let policy = match &raw.policy {
        Some(p) => {
            if p.from_state >= n {
                return Err(CliError::config(format!(
                    "policy.fromState {} is not a state index (n = {n})",
                    p.from_state
                )));
            }
            let regions = p
                .regions
                .iter()
                .map(|r| CoverageRegion::new(r.t_limit, r.u_limit, r.cost))
                .collect();
            Some(
                WarrantyPolicy::validate(p.from_state, p.base_cost, regions)
                    .map_err(|e| CliError::config(format!("policy: {e}")))?,
            )
        }
        None => None,
    };

    let output = OutputFormat::parse(output_override.unwrap_or(&raw.output))?;

    Ok(ValidatedRun {
        raw,
        generator,
        initial,
        queries,
        method,
        inversion,
        pde_grid,
        waiting_rates,
        policy,
        output,
    })
}
