//! Result documents and their JSON/CSV renderings.
//!
//! The JSON document mirrors the run configuration with an added
//! `results` block, so a run is reproducible from its own output. CSV
//! emits one table per subcommand; the transition table has exactly the
//! columns `t,u,i,j,p,method,range_warning`, one row per (query, i, j).

use serde::Serialize;
use std::io::Write;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TransitionResult {
    pub t: f64,
    pub u: f64,
    pub method: String,
    pub range_warning: bool,
    pub row_sum_residual: f64,
    pub p: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MarginalResult {
    pub t: f64,
    pub u: f64,
    pub method: String,
    pub range_warning: bool,
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WaitingResult {
    pub t: f64,
    pub u: f64,
    /// `exp(−λ₁t − λ₂u)` per state, present when rates were configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survival_by_state: Option<Vec<f64>>,
    /// Waiting-region CDF per state from the two-state extraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cdf_by_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WarrantyRegionResult {
    pub t_limit: f64,
    pub u_limit: f64,
    pub cost: f64,
    pub probability: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WarrantyResult {
    pub from_state: usize,
    pub base_cost: f64,
    pub ewe: f64,
    /// The expense expressed in units of the base cost.
    pub ewe_in_base_cost_units: f64,
    pub regions: Vec<WarrantyRegionResult>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareResult {
    pub t: f64,
    pub u: f64,
    pub max_deviation: f64,
    pub deviation: Vec<Vec<f64>>,
    pub p_series: Vec<Vec<f64>>,
    pub p_laplace2d: Vec<Vec<f64>>,
    pub p_pde: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<TransitionResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Vec<MarginalResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waiting: Option<Vec<WaitingResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warranty: Option<WarrantyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<Vec<CompareResult>>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OutputDocument {
    #[serde(flatten)]
    pub config: RunConfig,
    pub results: Results,
}

pub fn write_json(doc: &OutputDocument, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::numerical(format!("serializing results: {e}")))?;
    writeln!(out, "{text}").map_err(|e| CliError::numerical(format!("writing results: {e}")))
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().from_writer(out)
}

pub fn write_csv(results: &Results, out: &mut dyn Write) -> Result<(), CliError> {
    let map_err = |e: csv::Error| CliError::numerical(format!("writing csv: {e}"));
    let mut w = csv_writer(out);
    if let Some(rows) = &results.transitions {
        w.write_record(["t", "u", "i", "j", "p", "method", "range_warning"])
            .map_err(map_err)?;
        for row in rows {
            for (i, matrix_row) in row.p.iter().enumerate() {
                for (j, value) in matrix_row.iter().enumerate() {
                    w.serialize((
                        row.t,
                        row.u,
                        i,
                        j,
                        value,
                        &row.method,
                        row.range_warning,
                    ))
                    .map_err(map_err)?;
                }
            }
        }
    } else if let Some(rows) = &results.compare {
        w.write_record(["t", "u", "i", "j", "p_series", "p_laplace2d", "p_pde", "max_deviation"])
            .map_err(map_err)?;
        for row in rows {
            for i in 0..row.p_series.len() {
                for j in 0..row.p_series[i].len() {
                    w.serialize((
                        row.t,
                        row.u,
                        i,
                        j,
                        row.p_series[i][j],
                        row.p_laplace2d[i][j],
                        row.p_pde[i][j],
                        row.deviation[i][j],
                    ))
                    .map_err(map_err)?;
                }
            }
        }
    } else if let Some(rows) = &results.marginals {
        w.write_record(["t", "u", "j", "pi", "method", "range_warning"])
            .map_err(map_err)?;
        for row in rows {
            for (j, value) in row.pi.iter().enumerate() {
                w.serialize((row.t, row.u, j, value, &row.method, row.range_warning))
                    .map_err(map_err)?;
            }
        }
    } else if let Some(rows) = &results.waiting {
        w.write_record(["t", "u", "state", "quantity", "value"])
            .map_err(map_err)?;
        for row in rows {
            if let Some(survival) = &row.survival_by_state {
                for (state, value) in survival.iter().enumerate() {
                    w.serialize((row.t, row.u, state, "survival", value))
                        .map_err(map_err)?;
                }
            }
            if let Some(cdf) = &row.cdf_by_state {
                for (state, value) in cdf.iter().enumerate() {
                    w.serialize((row.t, row.u, state, "cdf", value))
                        .map_err(map_err)?;
                }
            }
        }
    } else if let Some(report) = &results.warranty {
        w.write_record([
            "region",
            "t_limit",
            "u_limit",
            "cost",
            "probability",
            "contribution",
        ])
        .map_err(map_err)?;
        for (k, region) in report.regions.iter().enumerate() {
            w.serialize((
                k,
                region.t_limit,
                region.u_limit,
                region.cost,
                region.probability,
                region.contribution,
            ))
            .map_err(map_err)?;
        }
    }
    w.flush()
        .map_err(|e| CliError::numerical(format!("writing csv: {e}")))
}
