//! Relative error norms, cell averages and run reports.

use std::collections::BTreeMap;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use crate::coarse::CellAssignment;
use crate::error::{Error, Result};
use crate::io::{read_text, write_text};
use crate::netcore::Network;
use crate::solve::energy_norm;
use crate::sparse::{norm2, SparseOperator};

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(())
}

/// `100 ‖u_ref − u_test‖₂ / ‖u_ref‖₂`.
pub fn l2_error(u_ref: &[f64], u_test: &[f64]) -> Result<f64> {
    check_len(u_ref, u_test)?;
    let denom = norm2(u_ref);
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: Vec<f64> = u_ref.iter().zip(u_test).map(|(a, b)| a - b).collect();
    Ok(100.0 * norm2(&diff) / denom)
}

/// `100 ‖u_ref − u_test‖_L / ‖u_ref‖_L`.
pub fn energy_error(u_ref: &[f64], u_test: &[f64], l: &SparseOperator) -> Result<f64> {
    check_len(u_ref, u_test)?;
    let denom = energy_norm(l, u_ref)?;
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: Vec<f64> = u_ref.iter().zip(u_test).map(|(a, b)| a - b).collect();
    Ok(100.0 * energy_norm(l, &diff)? / denom)
}

/// Node weights used for cell averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CellAverage {
    /// Weighted by node capacity (node volume).
    #[default]
    Capacity,
    Unweighted,
}

impl CellAverage {
    pub fn weight(self, net: &Network, node: usize) -> f64 {
        match self {
            CellAverage::Capacity => net.nodes[node].capacity,
            CellAverage::Unweighted => 1.0,
        }
    }
}

/// Weighted mean of `u` over the nodes of each cell; `None` for empty cells.
pub fn cell_average(u: &[f64], assignment: &CellAssignment, net: &Network, mode: CellAverage) -> Vec<Option<f64>> {
    let mut empty = 0usize;
    let out = assignment
        .members
        .iter()
        .map(|nodes| {
            if nodes.is_empty() {
                empty += 1;
                return None;
            }
            let (mut num, mut den) = (0.0, 0.0);
            for &v in nodes {
                let w = mode.weight(net, v);
                num += w * u[v];
                den += w;
            }
            Some(num / den)
        })
        .collect();
    if empty > 0 {
        info!("{empty} empty cells excluded from cell averages");
    }
    out
}

/// Values of the nonempty cells, in cell order.
pub fn present(values: &[Option<f64>]) -> Vec<f64> {
    values.iter().flatten().copied().collect()
}

/// `l2_error` over cell-average vectors.
pub fn coarse_error(ubar_ref: &[f64], ubar_test: &[f64]) -> Result<f64> {
    l2_error(ubar_ref, ubar_test)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Errors {
    pub e1_h: f64,
    pub e2_h: f64,
    #[serde(rename = "e1_H")]
    pub e1_cap_h: f64,
}

/// The three error measures between a reference and a test state.
pub fn all_errors(
    u_ref: &[f64],
    u_test: &[f64],
    l: &SparseOperator,
    assignment: &CellAssignment,
    net: &Network,
    mode: CellAverage,
) -> Result<Errors> {
    let a = cell_average(u_ref, assignment, net, mode);
    let b = cell_average(u_test, assignment, net, mode);
    Ok(Errors {
        e1_h: l2_error(u_ref, u_test)?,
        e2_h: energy_error(u_ref, u_test, l)?,
        e1_cap_h: coarse_error(&present(&a), &present(&b))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepErrors {
    pub step: usize,
    pub errors: Errors,
}

/// Everything recorded about one comparison run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub method: String,
    #[serde(flatten)]
    pub errors: Errors,
    #[serde(rename = "DOF_h")]
    pub dof_fine: usize,
    #[serde(rename = "DOF_H")]
    pub dof_coarse: usize,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_step: Vec<StepErrors>,
}

impl ErrorSummary {
    /// Online solve time reported in tables.
    pub fn solve_time(&self) -> f64 {
        self.timings.get("online").copied().unwrap_or(0.0)
    }
}

pub fn write_report(path: &Path, summary: &ErrorSummary) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(summary)?)
}

pub fn read_report(path: &Path) -> Result<ErrorSummary> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn sorted_by_m(summaries: &[ErrorSummary]) -> Vec<&ErrorSummary> {
    let mut rows: Vec<&ErrorSummary> = summaries.iter().collect();
    rows.sort_by_key(|s| (s.m.unwrap_or(0), s.dof_coarse));
    rows
}

/// Aligned table with columns `DOF_H  M  e1_h  e2_h  t_sol`, ascending in M.
pub fn format_table(summaries: &[ErrorSummary]) -> String {
    let mut out = format!("{:>8} {:>4} {:>12} {:>12} {:>10}\n", "DOF_H", "M", "e1_h(%)", "e2_h(%)", "t_sol(s)");
    for s in sorted_by_m(summaries) {
        let m = s.m.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:>8} {:>4} {:>12.4} {:>12.4} {:>10.3}\n",
            s.dof_coarse,
            m,
            s.errors.e1_h,
            s.errors.e2_h,
            s.solve_time()
        ));
    }
    out
}

/// CSV of errors against M for external plotting.
pub fn plot_csv(summaries: &[ErrorSummary]) -> String {
    let mut out = String::from("M,DOF_H,e1_h,e2_h,e1_H\n");
    for s in sorted_by_m(summaries) {
        out.push_str(&format!(
            "{},{},{:.16e},{:.16e},{:.16e}\n",
            s.m.unwrap_or(0),
            s.dof_coarse,
            s.errors.e1_h,
            s.errors.e2_h,
            s.errors.e1_cap_h
        ));
    }
    out
}
