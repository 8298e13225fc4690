//! Offline stage: per-patch subnetworks, main clusters, local spectral
//! problems `L φ = λ D φ`, multiscale basis functions and the projection `R`.

use std::collections::BTreeMap;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::{CoarseSpace, Patch};
use crate::eigen::{dense_smallest, lanczos_smallest, EigenPairs, LanczosOptions};
use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_index, parse_real, read_text, write_text};
use crate::netcore::{components_from_edges, laplacian_from_edges, Network};
use crate::sparse::SparseOperator;

pub const BASIS_VERSION: u32 = 1;
pub const BASIS_FILE: &str = "basis.json";
pub const COO_FILE: &str = "R.coo";

#[derive(Debug, Clone, PartialEq)]
pub struct BasisConfig {
    /// Eigenfunctions per patch.
    pub m: usize,
    /// Per-patch counts replacing `m`.
    pub overrides: BTreeMap<usize, usize>,
    /// Use every eigenfunction of each main cluster.
    pub full: bool,
    /// Largest cluster handled by the dense eigensolver.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl BasisConfig {
    pub fn uniform(m: usize) -> Self {
        Self {
            m,
            overrides: BTreeMap::new(),
            full: false,
            dense_limit: 300,
            lanczos: LanczosOptions::default(),
        }
    }

    pub fn full() -> Self {
        Self {
            full: true,
            ..Self::uniform(0)
        }
    }

    pub fn requested(&self, patch: usize) -> usize {
        self.overrides.get(&patch).copied().unwrap_or(self.m)
    }
}

/// Patch-local graph: edges with both endpoints inside the patch.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSubnetwork {
    pub patch: usize,
    /// Global node indices, ascending.
    pub nodes: Vec<usize>,
    /// Local `(i, j, w)` triples in global edge order.
    pub edges: Vec<(usize, usize, f64)>,
    /// Main-cluster membership per local node.
    pub cluster: Vec<bool>,
    /// Indicator of nodes outside the main cluster.
    pub eta: Vec<f64>,
}

impl LocalSubnetwork {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cluster_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.cluster[i]).collect()
    }

    pub fn has_satellites(&self) -> bool {
        self.eta.iter().any(|&e| e != 0.0)
    }

    pub fn laplacian(&self) -> Result<SparseOperator> {
        laplacian_from_edges(self.len(), self.edges.iter().copied())
    }
}

/// Subnetwork of a patch given the global adjacency (`Network::adjacency`).
pub fn extract_subnetwork(net: &Network, adjacency: &[Vec<(usize, usize)>], patch: &Patch) -> LocalSubnetwork {
    let mut picked: Vec<(usize, usize, usize)> = Vec::new();
    for (li, &g) in patch.nodes.iter().enumerate() {
        for &(nb, e) in &adjacency[g] {
            if let Some(lj) = patch.local_of(nb) {
                if li < lj {
                    picked.push((e, li, lj));
                }
            }
        }
    }
    picked.sort_unstable();
    let n = patch.nodes.len();
    LocalSubnetwork {
        patch: patch.index,
        nodes: patch.nodes.clone(),
        edges: picked.into_iter().map(|(e, i, j)| (i, j, net.edges[e].weight)).collect(),
        cluster: vec![true; n],
        eta: vec![0.0; n],
    }
}

/// Marks the largest local component (lowest component id on ties) as the
/// main cluster; `η = 1` elsewhere.
pub fn main_cluster(mut sub: LocalSubnetwork) -> LocalSubnetwork {
    let comps = components_from_edges(sub.len(), sub.edges.iter().map(|&(i, j, _)| (i, j)));
    if sub.is_empty() {
        return sub;
    }
    let main = comps.largest();
    sub.cluster = comps.id.iter().map(|&c| c == main).collect();
    sub.eta = sub.cluster.iter().map(|&m| if m { 0.0 } else { 1.0 }).collect();
    sub
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalEigenSet {
    pub patch: usize,
    pub requested: usize,
    pub values: Vec<f64>,
    /// Eigenvectors over all local nodes, zero off the main cluster.
    pub vectors: Vec<Vec<f64>>,
}

/// Makes the largest-magnitude entry positive (lowest index on ties).
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Smallest `m` eigenpairs of `L φ = λ D φ` on the main cluster, through the
/// symmetric form `D^{-1/2} L D^{-1/2}`; `φ` is `D`-orthonormal.
pub fn local_eigensolve(sub: &LocalSubnetwork, m: usize, cfg: &BasisConfig) -> Result<LocalEigenSet> {
    let cluster = sub.cluster_nodes();
    let s = cluster.len();
    if s == 0 {
        return Err(Error::Eigen {
            patch: sub.patch,
            reason: "empty main cluster".into(),
        });
    }
    let mut k = m;
    if k > s {
        if !cfg.full {
            warn!("patch {}: {m} eigenfunctions requested, main cluster has {s} nodes", sub.patch);
        }
        k = s;
    }
    let mut to_cluster = vec![usize::MAX; sub.len()];
    for (c, &l) in cluster.iter().enumerate() {
        to_cluster[l] = c;
    }
    let embed = |phi: &[f64]| {
        let mut full = vec![0.0; sub.len()];
        for (c, &l) in cluster.iter().enumerate() {
            full[l] = phi[c];
        }
        full
    };
    if s == 1 {
        return Ok(LocalEigenSet {
            patch: sub.patch,
            requested: m,
            values: vec![0.0; k],
            vectors: vec![embed(&[1.0]); k],
        });
    }

    let edges: Vec<(usize, usize, f64)> = sub
        .edges
        .iter()
        .filter(|&&(i, _, _)| sub.cluster[i])
        .map(|&(i, j, w)| (to_cluster[i], to_cluster[j], w))
        .collect();
    let mut degree = vec![0.0; s];
    for &(i, j, w) in &edges {
        degree[i] += w;
        degree[j] += w;
    }
    let scale: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * edges.len() + s);
    for &(i, j, w) in &edges {
        let a = -w * scale[i] * scale[j];
        triplets.push((i, j, a));
        triplets.push((j, i, a));
    }
    triplets.extend((0..s).map(|i| (i, i, 1.0)));
    let a_hat = SparseOperator::from_triplets(s, s, triplets)?;

    let pairs: EigenPairs = if s <= cfg.dense_limit {
        dense_smallest(a_hat.to_dense(), k)
    } else {
        lanczos_smallest(&a_hat, k, 2.0, &cfg.lanczos).map_err(|e| Error::Eigen {
            patch: sub.patch,
            reason: e.to_string(),
        })?
    };
    let values = pairs.values.iter().map(|&l| l.max(0.0)).collect();
    let vectors = pairs
        .vectors
        .iter()
        .map(|v| {
            let mut phi: Vec<f64> = v.iter().zip(&scale).map(|(x, s)| x * s).collect();
            fix_sign(&mut phi);
            embed(&phi)
        })
        .collect();
    Ok(LocalEigenSet {
        patch: sub.patch,
        requested: m,
        values,
        vectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Indicator,
    Eigen,
}

/// Origin of one row of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub patch: usize,
    /// Position within the patch (0 is the indicator when present).
    pub index: usize,
    pub kind: BasisKind,
}

/// One basis function as sparse `(global node, value)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    pub meta: RowMeta,
    pub entries: Vec<(usize, f64)>,
}

/// `ψ_1 = χ η` (only when `η ≠ 0`) followed by `ψ_{r+1} = χ φ_r`.
pub fn build_basis(patch: &Patch, sub: &LocalSubnetwork, eig: &LocalEigenSet) -> Vec<BasisFunction> {
    let product = |values: &[f64]| -> Vec<(usize, f64)> {
        patch
            .nodes
            .iter()
            .zip(&patch.chi)
            .zip(values)
            .map(|((&g, &chi), &v)| (g, chi * v))
            .filter(|&(_, v)| v != 0.0)
            .collect()
    };
    let mut out = Vec::new();
    if sub.has_satellites() {
        out.push(BasisFunction {
            meta: RowMeta {
                patch: patch.index,
                index: 0,
                kind: BasisKind::Indicator,
            },
            entries: product(&sub.eta),
        });
    }
    for phi in &eig.vectors {
        out.push(BasisFunction {
            meta: RowMeta {
                patch: patch.index,
                index: out.len(),
                kind: BasisKind::Eigen,
            },
            entries: product(phi),
        });
    }
    out
}

/// Projection `R` (coarse DOFs × free fine nodes) with row origins.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub r: SparseOperator,
    pub rows: Vec<RowMeta>,
}

impl Projection {
    pub fn n_coarse(&self) -> usize {
        self.r.n_rows()
    }

    pub fn n_free(&self) -> usize {
        self.r.n_cols()
    }
}

/// Stacks basis functions into `R`, keeping only free-node columns; rows left
/// empty by the restriction are dropped.
pub fn assemble_projection(
    bases: &[BasisFunction],
    global_to_free: &[Option<usize>],
    n_free: usize,
) -> Result<Projection> {
    let mut rows = Vec::new();
    let mut meta = Vec::new();
    let mut dropped = 0usize;
    for b in bases {
        let row: Vec<(usize, f64)> = b
            .entries
            .iter()
            .filter_map(|&(g, v)| global_to_free[g].map(|f| (f, v)))
            .collect();
        if row.is_empty() {
            dropped += 1;
            continue;
        }
        rows.push(row);
        meta.push(b.meta);
    }
    if dropped > 0 {
        info!("{dropped} basis functions vanish on the free nodes and were dropped");
    }
    if rows.is_empty() {
        return Err(Error::Config("multiscale space is empty".into()));
    }
    Ok(Projection {
        r: SparseOperator::from_rows(n_free, rows),
        rows: meta,
    })
}

/// Everything the offline stage produces.
#[derive(Debug, Clone)]
pub struct MultiscaleBasis {
    pub projection: Projection,
    pub eigensets: Vec<Option<LocalEigenSet>>,
    pub subnetworks: Vec<Option<LocalSubnetwork>>,
}

impl MultiscaleBasis {
    /// Eigenfunction count actually used per patch (0 for inactive patches).
    pub fn eigen_counts(&self) -> Vec<usize> {
        self.eigensets.iter().map(|e| e.as_ref().map_or(0, |e| e.vectors.len())).collect()
    }
}

/// Runs the offline stage over all active patches in parallel; the result
/// does not depend on scheduling.
type PatchBasis = (LocalSubnetwork, LocalEigenSet, Vec<BasisFunction>);

pub fn build_multiscale_basis(
    net: &Network,
    space: &CoarseSpace,
    cfg: &BasisConfig,
    global_to_free: &[Option<usize>],
    n_free: usize,
) -> Result<MultiscaleBasis> {
    let adjacency = net.adjacency();
    let local: Vec<Result<Option<PatchBasis>>> = space
        .patches
        .par_iter()
        .map(|patch| {
            if !patch.is_active() {
                return Ok(None);
            }
            let sub = main_cluster(extract_subnetwork(net, &adjacency, patch));
            let m = if cfg.full { sub.len() } else { cfg.requested(patch.index) };
            let eig = local_eigensolve(&sub, m, cfg)?;
            let bases = build_basis(patch, &sub, &eig);
            Ok(Some((sub, eig, bases)))
        })
        .collect();
    let mut eigensets = Vec::with_capacity(local.len());
    let mut subnetworks = Vec::with_capacity(local.len());
    let mut bases = Vec::new();
    for item in local {
        match item? {
            Some((sub, eig, b)) => {
                subnetworks.push(Some(sub));
                eigensets.push(Some(eig));
                bases.extend(b);
            }
            None => {
                subnetworks.push(None);
                eigensets.push(None);
            }
        }
    }
    let projection = assemble_projection(&bases, global_to_free, n_free)?;
    Ok(MultiscaleBasis {
        projection,
        eigensets,
        subnetworks,
    })
}

/// `basis.json` contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisHeader {
    pub version: u32,
    #[serde(rename = "box")]
    pub box_lengths: Vec<f64>,
    pub grid: Vec<usize>,
    pub eigen_counts: Vec<usize>,
    pub dirichlet_labels: Vec<String>,
    pub network_hash: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub rows: Vec<RowMeta>,
}

impl BasisHeader {
    pub fn new(
        space: &CoarseSpace,
        basis: &MultiscaleBasis,
        dirichlet_labels: Vec<String>,
        network_hash: String,
    ) -> Self {
        let r = &basis.projection.r;
        Self {
            version: BASIS_VERSION,
            box_lengths: space.grid.box_lengths.clone(),
            grid: space.grid.cells.clone(),
            eigen_counts: basis.eigen_counts(),
            dirichlet_labels,
            network_hash,
            n_rows: r.n_rows(),
            n_cols: r.n_cols(),
            nnz: r.nnz(),
            rows: basis.projection.rows.clone(),
        }
    }
}

pub fn save_basis(dir: &Path, header: &BasisHeader, projection: &Projection) -> Result<()> {
    let r = &projection.r;
    let mut coo = String::with_capacity(r.nnz() * 40);
    for i in 0..r.n_rows() {
        let (cols, vals) = r.row(i);
        for (c, v) in cols.iter().zip(vals) {
            coo.push_str(&format!("{i} {c} {}\n", fmt_real(*v)));
        }
    }
    write_text(&dir.join(COO_FILE), &coo)?;
    let json = serde_json::to_string_pretty(header)?;
    write_text(&dir.join(BASIS_FILE), &json)
}

pub fn load_basis(dir: &Path) -> Result<(BasisHeader, Projection)> {
    let header_path = dir.join(BASIS_FILE);
    let header: BasisHeader = serde_json::from_str(&read_text(&header_path)?)?;
    if header.version != BASIS_VERSION {
        return Err(Error::Format(format!(
            "{}: basis format version {} is not supported (expected {BASIS_VERSION})",
            header_path.display(),
            header.version
        )));
    }
    if header.rows.len() != header.n_rows {
        return Err(Error::Format(format!(
            "{}: {} row records for {} rows",
            header_path.display(),
            header.rows.len(),
            header.n_rows
        )));
    }
    let path = dir.join(COO_FILE);
    let text = read_text(&path)?;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); header.n_rows];
    let mut count = 0usize;
    let mut last: Option<(usize, usize)> = None;
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(&path, lineno, format!("expected `row col value`, got {line:?}")));
        }
        let i = parse_index(&path, lineno, fields[0], "row")?;
        let j = parse_index(&path, lineno, fields[1], "column")?;
        let v = parse_real(&path, lineno, fields[2], "value")?;
        if i >= header.n_rows || j >= header.n_cols {
            return Err(Error::parse(&path, lineno, format!("entry ({i}, {j}) outside {}×{}", header.n_rows, header.n_cols)));
        }
        if last.is_some_and(|p| p >= (i, j)) {
            return Err(Error::parse(&path, lineno, "entries not sorted by (row, col)"));
        }
        last = Some((i, j));
        rows[i].push((j, v));
        count += 1;
    }
    if count != header.nnz {
        return Err(Error::Format(format!(
            "{}: {count} entries, header declares {}",
            path.display(),
            header.nnz
        )));
    }
    let r = SparseOperator::from_rows(header.n_cols, rows);
    let rows = header.rows.clone();
    Ok((header, Projection { r, rows }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{EdgeRecord, NodeRecord};
    use nalgebra::DMatrix;

    fn graph(coords: &[[f64; 2]], edges: &[(usize, usize, f64)]) -> Network {
        let nodes = coords.iter().map(|c| NodeRecord::new([c[0], c[1], 0.0], 1.0)).collect();
        let edges = edges.iter().map(|&(i, j, w)| EdgeRecord::new(i, j, w)).collect();
        Network::new(2, vec![1.0, 1.0], nodes, edges).unwrap()
    }

    fn whole_patch(net: &Network) -> Patch {
        Patch {
            index: 0,
            cells: vec![0],
            nodes: (0..net.n_nodes()).collect(),
            chi: vec![1.0; net.n_nodes()],
        }
    }

    #[test]
    fn two_node_cluster() {
        let net = graph(&[[0.2, 0.5], [0.8, 0.5]], &[(0, 1, 1.0)]);
        let p = whole_patch(&net);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &p));
        let eig = local_eigensolve(&sub, 2, &BasisConfig::uniform(2)).unwrap();
        assert!(eig.values[0].abs() < 1e-14);
        assert!((eig.values[1] - 2.0).abs() < 1e-14);
        assert!((eig.vectors[0][0] - eig.vectors[0][1]).abs() < 1e-14);
        assert!(eig.vectors[0][0] > 0.0);
    }

    #[test]
    fn triangle_generalized_spectrum() {
        let net = graph(&[[0.1, 0.1], [0.9, 0.1], [0.5, 0.9]], &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let p = whole_patch(&net);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &p));
        let eig = local_eigensolve(&sub, 3, &BasisConfig::uniform(3)).unwrap();
        // oracle: D^{-1} L eigenvalues from a dense nonsymmetric decomposition
        let dinv_l = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0]);
        let mut oracle: Vec<f64> = dinv_l.complex_eigenvalues().iter().map(|c| c.re).collect();
        oracle.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((eig.values[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn satellite_gets_indicator() {
        // 4-node path plus an isolated 3-node path
        let coords = [[0.1, 0.1], [0.2, 0.1], [0.3, 0.1], [0.4, 0.1], [0.7, 0.7], [0.8, 0.7], [0.9, 0.7]];
        let net = graph(&coords, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (4, 5, 1.0), (5, 6, 1.0)]);
        let p = whole_patch(&net);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &p));
        assert_eq!(sub.eta, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let eig = local_eigensolve(&sub, 2, &BasisConfig::uniform(2)).unwrap();
        let bases = build_basis(&p, &sub, &eig);
        assert_eq!(bases.len(), 3);
        assert_eq!(bases[0].meta.kind, BasisKind::Indicator);
        assert_eq!(bases[0].entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![4, 5, 6]);
        assert!(bases[1].entries.iter().all(|&(g, _)| g < 4));
    }

    #[test]
    fn tie_broken_by_lowest_component() {
        let coords = [[0.1, 0.1], [0.2, 0.1], [0.7, 0.7], [0.8, 0.7]];
        let net = graph(&coords, &[(2, 3, 1.0), (0, 1, 1.0)]);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &whole_patch(&net)));
        assert_eq!(sub.cluster, vec![true, true, false, false]);
    }

    #[test]
    fn patch_without_edges() {
        let net = graph(&[[0.1, 0.1], [0.9, 0.9]], &[]);
        let p = whole_patch(&net);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &p));
        let eig = local_eigensolve(&sub, 3, &BasisConfig::uniform(3)).unwrap();
        assert_eq!(eig.values, vec![0.0]);
        assert_eq!(build_basis(&p, &sub, &eig).len(), 2);
    }

    #[test]
    fn single_row_for_one_patch() {
        let net = graph(&[[0.1, 0.1], [0.5, 0.1], [0.9, 0.1]], &[(0, 1, 2.0), (1, 2, 3.0)]);
        let p = whole_patch(&net);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &p));
        let eig = local_eigensolve(&sub, 1, &BasisConfig::uniform(1)).unwrap();
        let bases = build_basis(&p, &sub, &eig);
        let map: Vec<Option<usize>> = (0..3).map(Some).collect();
        let proj = assemble_projection(&bases, &map, 3).unwrap();
        assert_eq!(proj.n_coarse(), 1);
        let row = proj.r.to_dense();
        assert!((row[(0, 0)] - row[(0, 2)]).abs() < 1e-14 && (row[(0, 0)] - row[(0, 1)]).abs() < 1e-14);
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        let n = 60;
        let coords: Vec<[f64; 2]> = (0..n).map(|i| [(i as f64 + 0.5) / n as f64, 0.5]).collect();
        let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0 + (i % 3) as f64)).collect();
        let net = graph(&coords, &edges);
        let sub = main_cluster(extract_subnetwork(&net, &net.adjacency(), &whole_patch(&net)));
        let dense = local_eigensolve(&sub, 4, &BasisConfig::uniform(4)).unwrap();
        let cfg = BasisConfig {
            dense_limit: 10,
            ..BasisConfig::uniform(4)
        };
        let iter = local_eigensolve(&sub, 4, &cfg).unwrap();
        for r in 0..4 {
            assert!((dense.values[r] - iter.values[r]).abs() < 1e-9);
            let diff: f64 = dense.vectors[r].iter().zip(&iter.vectors[r]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-6, "vector {r} differs by {diff}");
        }
    }
}
