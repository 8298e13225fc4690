//! Flux-averaging upscaling: effective face conductances from local
//! steady flow problems on pairs of cells, summed cell capacities, and a
//! coarse finite-volume solver on the resulting cell network.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::{CellAssignment, CoarseGrid};
use crate::error::{Error, Result};
use crate::generate::face_labels;
use crate::linsolve::{pcg, CgOptions};
use crate::metrics::CellAverage;
use crate::netcore::{components_from_edges, laplacian_from_edges, BoundarySpec, EdgeRecord, Network, NodeRecord};
use crate::solve::{TimeGrid, Trajectory};
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpscaleConfig {
    /// Inflow/outflow layer thickness as a fraction of the cell size.
    pub delta_fraction: f64,
    pub average: CellAverage,
    pub rtol: f64,
}

impl Default for UpscaleConfig {
    fn default() -> Self {
        Self {
            delta_fraction: 0.1,
            average: CellAverage::Capacity,
            rtol: 1e-12,
        }
    }
}

/// Local flow domain of one face: two neighboring cells, or one cell next to
/// a Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceDomain {
    pub axis: usize,
    /// Cell on the inflow side.
    pub lower: usize,
    /// Cell on the outflow side; `None` for boundary faces.
    pub upper: Option<usize>,
    /// Union of the cells' nodes, ascending.
    pub nodes: Vec<usize>,
    pub inflow: Vec<usize>,
    pub outflow: Vec<usize>,
}

fn layer(net: &Network, nodes: &[usize], axis: usize, plane: f64, delta: f64) -> Vec<usize> {
    nodes
        .iter()
        .copied()
        .filter(|&v| (net.nodes[v].coords[axis] - plane).abs() <= delta * (1.0 + 1e-9))
        .collect()
}

/// Interior faces ordered by axis, then by lower cell index.
pub fn face_domains(grid: &CoarseGrid, assignment: &CellAssignment, net: &Network, cfg: &UpscaleConfig) -> Vec<FaceDomain> {
    let mut out = Vec::new();
    for axis in 0..grid.dim() {
        let delta = cfg.delta_fraction * grid.h[axis];
        for lower in 0..grid.n_cells() {
            let mut idx = grid.cell_multi(lower);
            if idx[axis] + 1 >= grid.cells[axis] {
                continue;
            }
            let lo_plane = idx[axis] as f64 * grid.h[axis];
            idx[axis] += 1;
            let upper = grid.cell_index(&idx);
            let hi_plane = (idx[axis] + 1) as f64 * grid.h[axis];
            let mut nodes: Vec<usize> = assignment.members[lower]
                .iter()
                .chain(&assignment.members[upper])
                .copied()
                .collect();
            nodes.sort_unstable();
            out.push(FaceDomain {
                axis,
                lower,
                upper: Some(upper),
                inflow: layer(net, &nodes, axis, lo_plane, delta),
                outflow: layer(net, &nodes, axis, hi_plane, delta),
                nodes,
            });
        }
    }
    out
}

/// Faces between a Dirichlet-labeled box side and its adjacent cells. The
/// labeled nodes are the inflow; the layer at the opposite cell face is the
/// outflow.
pub fn boundary_domains(
    grid: &CoarseGrid,
    assignment: &CellAssignment,
    net: &Network,
    label: &str,
    cfg: &UpscaleConfig,
) -> Vec<FaceDomain> {
    let faces = face_labels(grid.dim());
    let Some((axis, upper_side)) = faces.iter().enumerate().find_map(|(k, (lo, hi))| {
        if *lo == label {
            Some((k, false))
        } else if *hi == label {
            Some((k, true))
        } else {
            None
        }
    }) else {
        return Vec::new();
    };
    let delta = cfg.delta_fraction * grid.h[axis];
    let mut out = Vec::new();
    for cell in 0..grid.n_cells() {
        let idx = grid.cell_multi(cell);
        let at_side = if upper_side { idx[axis] + 1 == grid.cells[axis] } else { idx[axis] == 0 };
        if !at_side {
            continue;
        }
        let nodes = assignment.members[cell].clone();
        let inflow: Vec<usize> = nodes.iter().copied().filter(|&v| net.nodes[v].has_label(label)).collect();
        if inflow.is_empty() {
            continue;
        }
        let opposite = if upper_side { idx[axis] } else { idx[axis] + 1 } as f64 * grid.h[axis];
        let outflow = layer(net, &nodes, axis, opposite, delta)
            .into_iter()
            .filter(|v| inflow.binary_search(v).is_err())
            .collect();
        out.push(FaceDomain {
            axis,
            lower: cell,
            upper: None,
            nodes,
            inflow,
            outflow,
        });
    }
    out
}

/// Steady local flow: `u = 1` on inflow, `0` on outflow, no flux elsewhere.
/// Nodes in components without Dirichlet nodes are left as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFlow {
    /// Values aligned with `FaceDomain::nodes`.
    pub values: Vec<Option<f64>>,
    /// Local `(i, j, w)` edges of the face subnetwork.
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn local_flow_solve(face: &FaceDomain, net: &Network, adjacency: &[Vec<(usize, usize)>], rtol: f64) -> Result<LocalFlow> {
    let local = |g: usize| face.nodes.binary_search(&g).ok();
    let n = face.nodes.len();
    let mut picked = Vec::new();
    for (li, &g) in face.nodes.iter().enumerate() {
        for &(nb, e) in &adjacency[g] {
            if let Some(lj) = local(nb) {
                if li < lj {
                    picked.push((e, li, lj));
                }
            }
        }
    }
    picked.sort_unstable();
    let edges: Vec<(usize, usize, f64)> = picked.into_iter().map(|(e, i, j)| (i, j, net.edges[e].weight)).collect();

    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &g in &face.inflow {
        fixed[local(g).expect("inflow inside domain")] = Some(1.0);
    }
    for &g in &face.outflow {
        let l = local(g).expect("outflow inside domain");
        if fixed[l].is_some() {
            return Err(Error::Boundary(format!("node {g} is both inflow and outflow")));
        }
        fixed[l] = Some(0.0);
    }
    let comps = components_from_edges(n, edges.iter().map(|&(i, j, _)| (i, j)));
    let mut has_in = vec![false; comps.count()];
    let mut has_out = vec![false; comps.count()];
    for (l, f) in fixed.iter().enumerate() {
        match f {
            Some(v) if *v == 1.0 => has_in[comps.id[l]] = true,
            Some(_) => has_out[comps.id[l]] = true,
            None => {}
        }
    }
    if !(0..comps.count()).any(|c| has_in[c] && has_out[c]) {
        return Err(Error::Boundary("inflow and outflow are not connected".into()));
    }

    let mut values: Vec<Option<f64>> = fixed.clone();
    let mut free = Vec::new();
    let mut to_free = vec![None; n];
    for l in 0..n {
        if fixed[l].is_some() {
            continue;
        }
        let c = comps.id[l];
        if has_in[c] && has_out[c] {
            to_free[l] = Some(free.len());
            free.push(l);
        } else if has_in[c] {
            values[l] = Some(1.0);
        } else if has_out[c] {
            values[l] = Some(0.0);
        }
    }
    if !free.is_empty() {
        let lap = laplacian_from_edges(n, edges.iter().copied())?;
        let a = lap.select(&free, &to_free, free.len());
        let b: Vec<f64> = free
            .iter()
            .map(|&l| {
                let (cols, vals) = lap.row(l);
                cols.iter()
                    .zip(vals)
                    .filter(|(&j, _)| to_free[j].is_none())
                    .map(|(&j, &v)| -v * fixed[j].unwrap_or(0.0))
                    .sum()
            })
            .collect();
        let mut x = vec![0.5; free.len()];
        // Aim two digits below `rtol` so effective weights are reproducible
        // to about `rtol`; the final iterate only has to meet `rtol` itself.
        let opts = CgOptions {
            rtol: 1e-2 * rtol,
            max_iter: (10 * free.len()).max(1000),
        };
        match pcg(&a, &b, &mut x, &opts) {
            Ok(_) => {}
            Err(Error::NotConverged { .. }) => {
                let ax = a.mul_vec(&x);
                let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                let bn: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt();
                if res > rtol * bn {
                    return Err(Error::NotConverged {
                        step: 0,
                        iterations: opts.max_iter,
                        residual: res / bn,
                    });
                }
            }
            Err(e) => return Err(e),
        }
        for (k, &l) in free.iter().enumerate() {
            values[l] = Some(x[k]);
        }
    }
    Ok(LocalFlow { values, edges })
}

fn weighted_mean(net: &Network, face: &FaceDomain, flow: &LocalFlow, nodes: &[usize], mode: CellAverage) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for &g in nodes {
        let l = face.nodes.binary_search(&g).ok()?;
        if let Some(u) = flow.values[l] {
            let w = mode.weight(net, g);
            num += w * u;
            den += w;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Effective conductance `q̄ / (ū_i − ū_j)`; `None` when degenerate.
pub fn effective_weight(
    face: &FaceDomain,
    flow: &LocalFlow,
    assignment: &CellAssignment,
    net: &Network,
    mode: CellAverage,
) -> Option<f64> {
    let owner = |l: usize| assignment.owner[face.nodes[l]];
    let value = |l: usize| flow.values[l];
    let (flux, u_lo, u_hi) = match face.upper {
        Some(upper) => {
            let mut q = 0.0;
            for &(i, j, w) in &flow.edges {
                let (a, b) = if owner(i) == face.lower && owner(j) == upper {
                    (i, j)
                } else if owner(j) == face.lower && owner(i) == upper {
                    (j, i)
                } else {
                    continue;
                };
                if let (Some(ua), Some(ub)) = (value(a), value(b)) {
                    q += w * (ua - ub);
                }
            }
            let lo = weighted_mean(net, face, flow, &assignment.members[face.lower], mode)?;
            let hi = weighted_mean(net, face, flow, &assignment.members[upper], mode)?;
            (q, lo, hi)
        }
        None => {
            // flux leaving the labeled nodes; the boundary value is 1
            let inflow: Vec<usize> = face.inflow.iter().filter_map(|g| face.nodes.binary_search(g).ok()).collect();
            let is_in = |l: usize| inflow.binary_search(&l).is_ok();
            let mut q = 0.0;
            for &(i, j, w) in &flow.edges {
                let (a, b) = match (is_in(i), is_in(j)) {
                    (true, false) => (i, j),
                    (false, true) => (j, i),
                    _ => continue,
                };
                if let (Some(ua), Some(ub)) = (value(a), value(b)) {
                    q += w * (ua - ub);
                }
            }
            let cell = weighted_mean(net, face, flow, &assignment.members[face.lower], mode)?;
            (q, 1.0, cell)
        }
    };
    let du = u_lo - u_hi;
    if du.abs() < 1e-14 {
        return None;
    }
    let w = flux / du;
    (w.is_finite() && w >= 0.0).then_some(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpscaledFace {
    pub axis: usize,
    pub lower: usize,
    pub upper: usize,
    pub weight: f64,
    pub solvable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFace {
    pub cell: usize,
    pub axis: usize,
    pub label: String,
    pub weight: f64,
    pub solvable: bool,
}

/// Coarse cell network with effective coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpscaledModel {
    pub grid: CoarseGrid,
    pub capacity: Vec<f64>,
    pub faces: Vec<UpscaledFace>,
    pub boundary: Vec<BoundaryFace>,
}

pub fn effective_capacity(assignment: &CellAssignment, net: &Network) -> Vec<f64> {
    assignment
        .members
        .iter()
        .map(|nodes| nodes.iter().map(|&v| net.nodes[v].capacity).sum())
        .collect()
}

fn solve_face(face: &FaceDomain, net: &Network, adj: &[Vec<(usize, usize)>], assignment: &CellAssignment, cfg: &UpscaleConfig) -> Option<f64> {
    if face.inflow.is_empty() || face.outflow.is_empty() {
        return None;
    }
    let flow = local_flow_solve(face, net, adj, cfg.rtol).ok()?;
    effective_weight(face, &flow, assignment, net, cfg.average)
}

/// Builds the upscaled model: one local solve per interior face and per
/// Dirichlet boundary face, run in parallel.
pub fn upscale(
    net: &Network,
    grid: &CoarseGrid,
    assignment: &CellAssignment,
    bc: &BoundarySpec,
    cfg: &UpscaleConfig,
) -> Result<UpscaledModel> {
    let adj = net.adjacency();
    let interior = face_domains(grid, assignment, net, cfg);
    let weights: Vec<Option<f64>> = interior
        .par_iter()
        .map(|f| solve_face(f, net, &adj, assignment, cfg))
        .collect();
    let mut faces = Vec::with_capacity(interior.len());
    for (f, w) in interior.iter().zip(weights) {
        let upper = f.upper.expect("interior face");
        if w.is_none() && !(assignment.members[f.lower].is_empty() || assignment.members[upper].is_empty()) {
            warn!("face between cells {} and {upper} is unsolvable; using zero conductance", f.lower);
        }
        faces.push(UpscaledFace {
            axis: f.axis,
            lower: f.lower,
            upper,
            weight: w.unwrap_or(0.0),
            solvable: w.is_some(),
        });
    }
    let mut boundary = Vec::new();
    for (label, _) in &bc.dirichlet {
        let domains = boundary_domains(grid, assignment, net, label, cfg);
        let weights: Vec<Option<f64>> = domains
            .par_iter()
            .map(|f| solve_face(f, net, &adj, assignment, cfg))
            .collect();
        for (f, w) in domains.iter().zip(weights) {
            if w.is_none() {
                warn!("boundary face {label:?} of cell {} is unsolvable; using zero conductance", f.lower);
            }
            boundary.push(BoundaryFace {
                cell: f.lower,
                axis: f.axis,
                label: label.clone(),
                weight: w.unwrap_or(0.0),
                solvable: w.is_some(),
            });
        }
    }
    let capacity = effective_capacity(assignment, net);
    for (c, cap) in capacity.iter().enumerate() {
        if *cap == 0.0 {
            warn!("cell {c} owns no nodes and is excluded from the coarse model");
        }
    }
    Ok(UpscaledModel {
        grid: grid.clone(),
        capacity,
        faces,
        boundary,
    })
}

impl UpscaledModel {
    pub fn active_cells(&self) -> Vec<usize> {
        (0..self.capacity.len()).filter(|&c| self.capacity[c] > 0.0).collect()
    }

    /// Cell network (cells as nodes at their centers, positive-weight faces
    /// as edges) for export with the fine-network tooling.
    pub fn to_network(&self) -> Result<Network> {
        let active = self.active_cells();
        let mut map = vec![usize::MAX; self.capacity.len()];
        for (k, &c) in active.iter().enumerate() {
            map[c] = k;
        }
        let nodes = active
            .iter()
            .map(|&c| {
                let (lo, hi) = self.grid.cell_bounds(c);
                let mut p = [0.0; 3];
                for k in 0..lo.len() {
                    p[k] = 0.5 * (lo[k] + hi[k]);
                }
                NodeRecord::new(p, self.capacity[c])
            })
            .collect();
        let edges = self
            .faces
            .iter()
            .filter(|f| f.weight > 0.0 && map[f.lower] != usize::MAX && map[f.upper] != usize::MAX)
            .map(|f| {
                let mut e = EdgeRecord::new(map[f.lower], map[f.upper], f.weight);
                e.length = Some(self.grid.h[f.axis]);
                e
            })
            .collect();
        Network::new(self.grid.dim(), self.grid.box_lengths.clone(), nodes, edges)
    }

    /// Implicit Euler on the cell network:
    /// `c̄ (ū^n − ū^{n−1})/τ + Σ w̄ (ū^n_i − ū^n_j) + Σ w̄_b (ū^n_i − g) = f̄`.
    /// `source` and `u0` are per cell; empty cells stay at zero.
    pub fn solve(&self, bc: &BoundarySpec, source: &[f64], u0: &[f64], tg: &TimeGrid, save_every: Option<usize>) -> Result<Trajectory> {
        let n_cells = self.capacity.len();
        if source.len() != n_cells || u0.len() != n_cells {
            return Err(Error::Dimension(format!(
                "{n_cells} cells, source {}, initial state {}",
                source.len(),
                u0.len()
            )));
        }
        let active = self.active_cells();
        let mut map = vec![None; n_cells];
        for (k, &c) in active.iter().enumerate() {
            map[c] = Some(k);
        }
        let n = active.len();
        let edges: Vec<(usize, usize, f64)> = self
            .faces
            .iter()
            .filter(|f| f.weight > 0.0)
            .filter_map(|f| Some((map[f.lower]?, map[f.upper]?, f.weight)))
            .collect();
        let comps = components_from_edges(n, edges.iter().map(|&(i, j, _)| (i, j)));
        if comps.count() > 1 {
            return Err(Error::InvalidNetwork(format!(
                "upscaled cell network has {} disconnected parts",
                comps.count()
            )));
        }
        let values: BTreeMap<&str, f64> = bc.dirichlet.iter().map(|(l, v)| (l.as_str(), *v)).collect();
        let mut bdiag = vec![0.0; n];
        let mut brhs = vec![0.0; n];
        for b in &self.boundary {
            if let (Some(k), Some(g)) = (map[b.cell], values.get(b.label.as_str())) {
                bdiag[k] += b.weight;
                brhs[k] += b.weight * g;
            }
        }
        let lap = laplacian_from_edges(n, edges)?;
        let tau = tg.tau;
        let cap: Vec<f64> = active.iter().map(|&c| self.capacity[c]).collect();
        let diag: Vec<f64> = cap.iter().zip(&bdiag).map(|(c, b)| c + tau * b).collect();
        let a = SparseOperator::diagonal(&diag).linear_combination(1.0, &lap, tau)?;
        let f: Vec<f64> = active.iter().zip(&brhs).map(|(&c, b)| source[c] + b).collect();

        let embed = |u: &[f64]| {
            let mut full = vec![0.0; n_cells];
            for (k, &c) in active.iter().enumerate() {
                full[c] = u[k];
            }
            full
        };
        let mut u: Vec<f64> = active.iter().map(|&c| u0[c]).collect();
        let mut traj = Trajectory {
            steps: Vec::new(),
            snapshots: Vec::new(),
            last: embed(&u),
        };
        if save_every.is_some() {
            traj.steps.push(0);
            traj.snapshots.push(embed(&u));
        }
        let opts = CgOptions {
            rtol: 1e-12,
            max_iter: 100_000,
        };
        for step in 1..=tg.n_steps {
            let b: Vec<f64> = (0..n).map(|k| cap[k] * u[k] + tau * f[k]).collect();
            pcg(&a, &b, &mut u, &opts)?;
            if save_every.is_some_and(|s| step % s.max(1) == 0 || step == tg.n_steps) {
                traj.steps.push(step);
                traj.snapshots.push(embed(&u));
            }
        }
        traj.last = embed(&u);
        Ok(traj)
    }
}

/// Every fine node takes its cell's value.
pub fn prolong_piecewise_constant(ubar: &[f64], assignment: &CellAssignment) -> Vec<f64> {
    assignment.owner.iter().map(|&c| ubar[c]).collect()
}

/// Cell sums of a nodal quantity (e.g. the source term).
pub fn cell_sums(values: &[f64], assignment: &CellAssignment) -> Vec<f64> {
    assignment
        .members
        .iter()
        .map(|nodes| nodes.iter().map(|&v| values[v]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::assign_nodes_to_cells;

    /// Five-node chain along x at height y, weight 2.
    fn chain(y: f64) -> Network {
        let nodes = (0..5).map(|i| NodeRecord::new([0.25 * i as f64, y, 0.0], 1.0)).collect();
        let edges = (0..4).map(|i| EdgeRecord::new(i, i + 1, 2.0)).collect();
        Network::new(2, vec![1.0, 1.0], nodes, edges).unwrap()
    }

    #[test]
    fn chain_face() {
        let net = chain(0.25);
        let grid = CoarseGrid::new(&[1.0, 1.0], &[2, 2]).unwrap();
        let a = assign_nodes_to_cells(&net, &grid);
        let cfg = UpscaleConfig::default();
        let faces = face_domains(&grid, &a, &net, &cfg);
        assert_eq!(faces.len(), 4);
        let face = faces.iter().find(|f| f.axis == 0 && f.lower == 0).unwrap();
        assert_eq!(face.inflow, vec![0]);
        assert_eq!(face.outflow, vec![4]);
        let flow = local_flow_solve(face, &net, &net.adjacency(), 1e-12).unwrap();
        let u: Vec<f64> = flow.values.iter().map(|v| v.unwrap()).collect();
        for (got, want) in u.iter().zip([1.0, 0.75, 0.5, 0.25, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let w = effective_weight(face, &flow, &a, &net, CellAverage::Capacity).unwrap();
        assert!((w - 0.8).abs() < 1e-12);
    }

    #[test]
    fn disconnected_face_is_unsolvable() {
        let nodes = vec![
            NodeRecord::new([0.0, 0.25, 0.0], 1.0),
            NodeRecord::new([0.25, 0.25, 0.0], 1.0),
            NodeRecord::new([0.75, 0.25, 0.0], 1.0),
            NodeRecord::new([1.0, 0.25, 0.0], 1.0),
        ];
        let edges = vec![EdgeRecord::new(0, 1, 1.0), EdgeRecord::new(2, 3, 1.0)];
        let net = Network::new(2, vec![1.0, 1.0], nodes, edges).unwrap();
        let grid = CoarseGrid::new(&[1.0, 1.0], &[2, 2]).unwrap();
        let a = assign_nodes_to_cells(&net, &grid);
        let face = face_domains(&grid, &a, &net, &UpscaleConfig::default())
            .into_iter()
            .find(|f| f.axis == 0 && f.lower == 0)
            .unwrap();
        assert!(local_flow_solve(&face, &net, &net.adjacency(), 1e-12).is_err());
    }

    #[test]
    fn prolongation() {
        let a = CellAssignment {
            owner: vec![0, 1, 1, 0],
            members: vec![vec![0, 3], vec![1, 2]],
            capacity: vec![2.0, 2.0],
        };
        assert_eq!(prolong_piecewise_constant(&[1.0, 0.0], &a), vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(cell_sums(&[1.0, 2.0, 3.0, 4.0], &a), vec![5.0, 5.0]);
    }
}
