//! Tensor coarse grid, node-to-cell assignment, coarse-node patches and the
//! multilinear partition of unity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{Network, Point};

/// Uniform tensor grid of `Π m_k` cells and `Π (m_k + 1)` coarse nodes.
/// Cells and coarse nodes are numbered with the first axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGrid {
    pub box_lengths: Vec<f64>,
    pub cells: Vec<usize>,
    pub h: Vec<f64>,
}

impl CoarseGrid {
    pub fn new(box_lengths: &[f64], cells: &[usize]) -> Result<Self> {
        if box_lengths.len() != cells.len() {
            return Err(Error::Dimension(format!(
                "box has {} axes, coarse grid {}",
                box_lengths.len(),
                cells.len()
            )));
        }
        if !(2..=3).contains(&cells.len()) {
            return Err(Error::Dimension(format!("coarse grid dimension {} not in {{2, 3}}", cells.len())));
        }
        if let Some(&m) = cells.iter().find(|&&m| m < 2) {
            return Err(Error::Config(format!("coarse grid needs at least 2 cells per axis, got {m}")));
        }
        Ok(Self {
            box_lengths: box_lengths.to_vec(),
            cells: cells.to_vec(),
            h: box_lengths.iter().zip(cells).map(|(l, &m)| l / m as f64).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn n_coarse_nodes(&self) -> usize {
        self.cells.iter().map(|m| m + 1).product()
    }

    fn flatten(idx: &[usize], extent: impl Fn(usize) -> usize) -> usize {
        idx.iter().enumerate().rev().fold(0, |acc, (k, &i)| acc * extent(k) + i)
    }

    fn unflatten(mut flat: usize, dim: usize, extent: impl Fn(usize) -> usize) -> Vec<usize> {
        (0..dim)
            .map(|k| {
                let i = flat % extent(k);
                flat /= extent(k);
                i
            })
            .collect()
    }

    pub fn cell_index(&self, idx: &[usize]) -> usize {
        Self::flatten(idx, |k| self.cells[k])
    }

    pub fn cell_multi(&self, cell: usize) -> Vec<usize> {
        Self::unflatten(cell, self.dim(), |k| self.cells[k])
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        Self::flatten(idx, |k| self.cells[k] + 1)
    }

    pub fn node_multi(&self, node: usize) -> Vec<usize> {
        Self::unflatten(node, self.dim(), |k| self.cells[k] + 1)
    }

    pub fn node_coords(&self, node: usize) -> Point {
        let mut y = [0.0; 3];
        for (k, i) in self.node_multi(node).into_iter().enumerate() {
            y[k] = i as f64 * self.h[k];
        }
        y
    }

    /// Half-open cell rule `floor(x_k / H_k)`, with the last cell closed.
    pub fn cell_of(&self, x: &Point) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|k| {
                let i = (x[k] / self.h[k]).floor();
                if i < 0.0 {
                    0
                } else {
                    (i as usize).min(self.cells[k] - 1)
                }
            })
            .collect();
        self.cell_index(&idx)
    }

    /// Lower and upper corner of a cell.
    pub fn cell_bounds(&self, cell: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.cell_multi(cell);
        let lo: Vec<f64> = idx.iter().zip(&self.h).map(|(&i, h)| i as f64 * h).collect();
        let hi: Vec<f64> = idx.iter().zip(&self.h).map(|(&i, h)| (i + 1) as f64 * h).collect();
        (lo, hi)
    }

    /// Cells having the coarse node as a corner, ascending.
    pub fn incident_cells(&self, node: usize) -> Vec<usize> {
        let idx = self.node_multi(node);
        let dim = self.dim();
        let mut out = Vec::new();
        for corner in 0..(1usize << dim) {
            let mut cell = Vec::with_capacity(dim);
            for (k, &i) in idx.iter().enumerate() {
                let shift = (corner >> k) & 1;
                // cell index along k is node index minus 1 or node index
                if shift == 0 {
                    if i == 0 {
                        break;
                    }
                    cell.push(i - 1);
                } else {
                    if i == self.cells[k] {
                        break;
                    }
                    cell.push(i);
                }
            }
            if cell.len() == dim {
                out.push(self.cell_index(&cell));
            }
        }
        out.sort_unstable();
        out
    }

    /// Multilinear hat centered at coarse node `node`.
    pub fn hat(&self, node: usize, x: &Point) -> f64 {
        let y = self.node_coords(node);
        (0..self.dim())
            .map(|k| (1.0 - (x[k] - y[k]).abs() / self.h[k]).max(0.0))
            .product()
    }
}

pub fn build_coarse_grid(box_lengths: &[f64], cells: &[usize]) -> Result<CoarseGrid> {
    CoarseGrid::new(box_lengths, cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAssignment {
    pub owner: Vec<usize>,
    /// Fine nodes of each cell, ascending.
    pub members: Vec<Vec<usize>>,
    pub capacity: Vec<f64>,
}

impl CellAssignment {
    pub fn n_cells(&self) -> usize {
        self.members.len()
    }
}

pub fn assign_nodes_to_cells(net: &Network, grid: &CoarseGrid) -> CellAssignment {
    let mut members = vec![Vec::new(); grid.n_cells()];
    let mut capacity = vec![0.0; grid.n_cells()];
    let owner: Vec<usize> = net
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let c = grid.cell_of(&n.coords);
            members[c].push(i);
            capacity[c] += n.capacity;
            c
        })
        .collect();
    CellAssignment {
        owner,
        members,
        capacity,
    }
}

/// Neighborhood `ω_i` of a coarse node: the union of its incident cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub index: usize,
    pub cells: Vec<usize>,
    /// Global fine node indices, ascending.
    pub nodes: Vec<usize>,
    /// Partition-of-unity value at each member node.
    pub chi: Vec<f64>,
}

impl Patch {
    pub fn is_active(&self) -> bool {
        !self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn local_of(&self, global: usize) -> Option<usize> {
        self.nodes.binary_search(&global).ok()
    }
}

/// One patch per coarse node, with its partition-of-unity values filled in.
pub fn build_patches(grid: &CoarseGrid, assignment: &CellAssignment, net: &Network) -> Vec<Patch> {
    (0..grid.n_coarse_nodes())
        .map(|i| {
            let cells = grid.incident_cells(i);
            let mut nodes: Vec<usize> = cells
                .iter()
                .flat_map(|&c| assignment.members[c].iter().copied())
                .collect();
            nodes.sort_unstable();
            let chi = nodes.iter().map(|&v| grid.hat(i, &net.nodes[v].coords)).collect();
            Patch {
                index: i,
                cells,
                nodes,
                chi,
            }
        })
        .collect()
}

/// χ values per patch, aligned with each patch's node list.
pub fn partition_of_unity(grid: &CoarseGrid, patches: &[Patch], net: &Network) -> Vec<Vec<f64>> {
    patches
        .iter()
        .map(|p| p.nodes.iter().map(|&v| grid.hat(p.index, &net.nodes[v].coords)).collect())
        .collect()
}

/// Coarse grid together with its node assignment and patches.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    pub grid: CoarseGrid,
    pub assignment: CellAssignment,
    pub patches: Vec<Patch>,
}

impl CoarseSpace {
    pub fn new(net: &Network, cells: &[usize]) -> Result<Self> {
        if cells.len() != net.dim {
            return Err(Error::Dimension(format!(
                "coarse grid has {} axes, network dimension is {}",
                cells.len(),
                net.dim
            )));
        }
        let grid = CoarseGrid::new(&net.box_lengths, cells)?;
        let assignment = assign_nodes_to_cells(net, &grid);
        let patches = build_patches(&grid, &assignment, net);
        Ok(Self {
            grid,
            assignment,
            patches,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::NodeRecord;

    #[test]
    fn grid_counts() {
        let g = CoarseGrid::new(&[1.0, 1.0], &[5, 5]).unwrap();
        assert_eq!((g.n_cells(), g.n_coarse_nodes()), (25, 36));
        let g = CoarseGrid::new(&[1.0, 1.0, 1.0], &[5, 5, 5]).unwrap();
        assert_eq!((g.n_cells(), g.n_coarse_nodes()), (125, 216));
        assert!(CoarseGrid::new(&[1.0, 1.0], &[1, 3]).is_err());
        assert!(CoarseGrid::new(&[1.0, 1.0], &[3, 3, 3]).is_err());
    }

    #[test]
    fn half_open_cells() {
        let g = CoarseGrid::new(&[2.0, 2.0], &[2, 2]).unwrap();
        assert_eq!(g.h, vec![1.0, 1.0]);
        assert_eq!(g.cell_bounds(0), (vec![0.0, 0.0], vec![1.0, 1.0]));
        assert_eq!(g.cell_of(&[0.5, 0.5, 0.0]), 0);
        assert_eq!(g.cell_of(&[1.0, 0.5, 0.0]), 1);
        assert_eq!(g.cell_of(&[2.0, 2.0, 0.0]), 3);
    }

    #[test]
    fn incident_cell_counts() {
        let g = CoarseGrid::new(&[1.0, 1.0], &[5, 5]).unwrap();
        assert_eq!(g.incident_cells(g.node_index(&[2, 3])).len(), 4);
        assert_eq!(g.incident_cells(0), vec![0]);
        assert_eq!(g.incident_cells(g.node_index(&[5, 5])), vec![24]);
        assert_eq!(g.incident_cells(g.node_index(&[0, 2])).len(), 2);
        let g3 = CoarseGrid::new(&[1.0, 1.0, 1.0], &[3, 3, 3]).unwrap();
        assert_eq!(g3.incident_cells(g3.node_index(&[1, 1, 1])).len(), 8);
        for node in 0..g3.n_coarse_nodes() {
            let y = g3.node_coords(node);
            for c in g3.incident_cells(node) {
                let (lo, hi) = g3.cell_bounds(c);
                assert!((0..3).all(|k| lo[k] - 1e-12 <= y[k] && y[k] <= hi[k] + 1e-12));
            }
        }
    }

    #[test]
    fn hat_values() {
        let g = CoarseGrid::new(&[1.0, 1.0], &[2, 2]).unwrap();
        let y = g.node_coords(4);
        assert_eq!(y, [0.5, 0.5, 0.0]);
        assert_eq!(g.hat(4, &y), 1.0);
        for i in (0..9).filter(|&i| i != 4) {
            assert_eq!(g.hat(i, &y), 0.0);
        }
        let center = [0.25, 0.25, 0.0];
        for i in [0, 1, 3, 4] {
            assert!((g.hat(i, &center) - 0.25).abs() < 1e-15);
        }
    }

    fn cloud(n: usize, dim: usize) -> Network {
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let nodes = (0..n)
            .map(|_| {
                let mut p = [0.0; 3];
                for k in 0..dim {
                    p[k] = next() * [1.0, 2.0, 0.5][k];
                }
                NodeRecord::new(p, 1.0)
            })
            .collect();
        Network::new(dim, vec![1.0, 2.0, 0.5][..dim].to_vec(), nodes, Vec::new()).unwrap()
    }

    #[test]
    fn partition_of_unity_sums_to_one() {
        for (dim, cells) in [(2, vec![4, 3]), (3, vec![2, 3, 2])] {
            let net = cloud(1000, dim);
            let space = CoarseSpace::new(&net, &cells).unwrap();
            let mut sum = vec![0.0; net.n_nodes()];
            let mut cover = vec![0usize; net.n_nodes()];
            for p in &space.patches {
                for (&v, &chi) in p.nodes.iter().zip(&p.chi) {
                    assert!((0.0..=1.0).contains(&chi));
                    sum[v] += chi;
                    cover[v] += 1;
                }
            }
            assert!(sum.iter().all(|s| (s - 1.0).abs() <= 1e-12));
            assert!(cover.iter().all(|&c| c >= 1 && c <= 1 << dim));
            // hat is zero on nodes outside the patch
            for p in &space.patches {
                for v in 0..net.n_nodes() {
                    if p.local_of(v).is_none() {
                        assert_eq!(space.grid.hat(p.index, &net.nodes[v].coords), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn assignment_is_partition() {
        let net = cloud(500, 2);
        let grid = CoarseGrid::new(&net.box_lengths, &[5, 5]).unwrap();
        let a = assign_nodes_to_cells(&net, &grid);
        assert_eq!(a.members.iter().map(Vec::len).sum::<usize>(), 500);
        for (c, m) in a.members.iter().enumerate() {
            assert!(m.iter().all(|&v| a.owner[v] == c));
            let cap: f64 = m.iter().map(|&v| net.nodes[v].capacity).sum();
            assert_eq!(cap, a.capacity[c]);
        }
    }
}
