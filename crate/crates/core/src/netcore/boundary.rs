use log::warn;
use serde::{Deserialize, Serialize};

use super::Network;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Dirichlet data by node label. Labels earlier in the list take precedence
/// when a node carries several of them; unlisted labels are zero-flux.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub dirichlet: Vec<(String, f64)>,
}

impl BoundarySpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: &str, value: f64) -> Self {
        self.dirichlet.push((label.to_string(), value));
        self
    }

    /// Dirichlet value per node, `None` for free nodes.
    pub fn node_values(&self, net: &Network) -> Vec<Option<f64>> {
        net.nodes
            .iter()
            .map(|node| {
                self.dirichlet
                    .iter()
                    .find(|(label, _)| node.has_label(label))
                    .map(|&(_, g)| g)
            })
            .collect()
    }

    /// Labels that appear on no node.
    pub fn missing_labels(&self, net: &Network) -> Vec<String> {
        self.dirichlet
            .iter()
            .filter(|(label, _)| !net.nodes.iter().any(|n| n.has_label(label)))
            .map(|(label, _)| label.clone())
            .collect()
    }
}

/// Fine system restricted to the free (non-Dirichlet) nodes.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    /// Free index → global node index.
    pub free: Vec<usize>,
    /// Global node index → free index.
    pub global_to_free: Vec<Option<usize>>,
    pub l_free: SparseOperator,
    pub c_free: SparseOperator,
    /// Source restricted to free nodes.
    pub f_free: Vec<f64>,
    /// `Σ_{j ∈ Dirichlet, j∼i} w_ij g_j` per free node.
    pub rhs_bc: Vec<f64>,
    /// Full-length vector: `g` on Dirichlet nodes, 0 elsewhere.
    pub lift: Vec<f64>,
}

impl ReducedSystem {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn n_global(&self) -> usize {
        self.global_to_free.len()
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&g| full[g]).collect()
    }

    /// Free values re-embedded on top of the lift.
    pub fn embed(&self, free_values: &[f64]) -> Vec<f64> {
        let mut out = self.lift.clone();
        for (k, &g) in self.free.iter().enumerate() {
            out[g] = free_values[k];
        }
        out
    }

    /// Time-constant part of the right-hand side: `f_free + rhs_bc`.
    pub fn effective_rhs(&self) -> Vec<f64> {
        self.f_free.iter().zip(&self.rhs_bc).map(|(a, b)| a + b).collect()
    }

    pub fn is_dirichlet(&self, global: usize) -> bool {
        self.global_to_free[global].is_none()
    }
}

/// Eliminates Dirichlet nodes from `C du/dt + L u = f`. Boundary values are
/// constant in time, so only the `L` coupling enters the right-hand side.
pub fn reduce_dirichlet(
    l: &SparseOperator,
    c: &SparseOperator,
    f: &[f64],
    bc: &BoundarySpec,
    net: &Network,
) -> Result<ReducedSystem> {
    let n = net.n_nodes();
    if l.n_rows() != n || c.n_rows() != n || f.len() != n {
        return Err(Error::Dimension(format!(
            "reduce_dirichlet: network has {n} nodes, L {}, C {}, f {}",
            l.n_rows(),
            c.n_rows(),
            f.len()
        )));
    }
    for label in bc.missing_labels(net) {
        warn!("boundary label {label:?} matches no node");
    }
    let values = bc.node_values(net);
    let mut free = Vec::new();
    let mut global_to_free = vec![None; n];
    let mut lift = vec![0.0; n];
    for (i, v) in values.iter().enumerate() {
        match v {
            Some(g) => lift[i] = *g,
            None => {
                global_to_free[i] = Some(free.len());
                free.push(i);
            }
        }
    }
    if free.is_empty() {
        return Err(Error::Boundary("every node is a Dirichlet node".into()));
    }
    let l_free = l.select(&free, &global_to_free, free.len());
    let c_free = c.select(&free, &global_to_free, free.len());
    let rhs_bc = free
        .iter()
        .map(|&i| {
            let (cols, vals) = l.row(i);
            cols.iter()
                .zip(vals)
                .filter(|(&j, _)| global_to_free[j].is_none())
                .map(|(&j, &v)| -v * lift[j])
                .sum()
        })
        .collect();
    Ok(ReducedSystem {
        f_free: free.iter().map(|&i| f[i]).collect(),
        free,
        global_to_free,
        l_free,
        c_free,
        rhs_bc,
        lift,
    })
}
