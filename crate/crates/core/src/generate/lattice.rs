use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netcore::{connected_components, EdgeRecord, Network, NodeRecord, Point};

/// Node spacing along each axis of a cell-centered lattice.
pub fn lattice_spacing(box_lengths: &[f64], shape: &[usize]) -> Vec<f64> {
    box_lengths.iter().zip(shape).map(|(l, &n)| l / n as f64).collect()
}

/// Cell-centered lattice: node `(i, j, k)` at `((i + ½)h₁, (j + ½)h₂, (k + ½)h₃)`,
/// numbered with the first axis fastest, nearest-neighbor edges only.
pub(crate) fn regular_lattice(box_lengths: &[f64], shape: &[usize]) -> Result<Network> {
    let dim = shape.len();
    if dim != 2 && dim != 3 {
        return Err(Error::Config(format!("lattice dimension {dim} not in {{2, 3}}")));
    }
    if box_lengths.len() != dim {
        return Err(Error::Config("box and lattice shape dimensions differ".into()));
    }
    if let Some(&n) = shape.iter().find(|&&n| n < 2) {
        return Err(Error::Config(format!("lattice needs at least 2 nodes per axis, got {n}")));
    }
    let h = lattice_spacing(box_lengths, shape);
    let n3 = if dim == 3 { shape[2] } else { 1 };
    let (n1, n2) = (shape[0], shape[1]);
    let index = |i: usize, j: usize, k: usize| i + n1 * (j + n2 * k);

    let mut nodes = Vec::with_capacity(n1 * n2 * n3);
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                let mut p: Point = [(i as f64 + 0.5) * h[0], (j as f64 + 0.5) * h[1], 0.0];
                if dim == 3 {
                    p[2] = (k as f64 + 0.5) * h[2];
                }
                nodes.push(NodeRecord::new(p, 1.0));
            }
        }
    }
    let mut edges = Vec::new();
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                let a = index(i, j, k);
                let mut push = |b: usize, len: f64| {
                    let mut e = EdgeRecord::new(a, b, 1.0);
                    e.length = Some(len);
                    edges.push(e);
                };
                if i + 1 < n1 {
                    push(index(i + 1, j, k), h[0]);
                }
                if j + 1 < n2 {
                    push(index(i, j + 1, k), h[1]);
                }
                if dim == 3 && k + 1 < n3 {
                    push(index(i, j, k + 1), h[2]);
                }
            }
        }
    }
    Network::new(dim, box_lengths.to_vec(), nodes, edges)
}

/// Closed-form lattice edge count `Σ_k (n_k − 1) Π_{m≠k} n_m`.
pub fn lattice_edge_count(shape: &[usize]) -> usize {
    (0..shape.len())
        .map(|k| {
            (shape[k] - 1)
                * shape
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, &n)| n)
                    .product::<usize>()
        })
        .sum()
}

/// Random edge removal, then random node removal, then the largest component.
pub(crate) fn thin_lattice(lattice: Network, removal_prob: f64, rng: &mut ChaCha8Rng) -> Result<Network> {
    if !(0.0..1.0).contains(&removal_prob) {
        return Err(Error::Config(format!("removal probability {removal_prob} not in [0, 1)")));
    }
    let keep_edge: Vec<bool> = lattice
        .edges
        .iter()
        .map(|_| rng.gen::<f64>() >= removal_prob)
        .collect();
    let keep_node: Vec<bool> = lattice
        .nodes
        .iter()
        .map(|_| rng.gen::<f64>() >= removal_prob)
        .collect();
    let mut thinned = lattice;
    let edges = std::mem::take(&mut thinned.edges);
    thinned.edges = edges
        .into_iter()
        .zip(&keep_edge)
        .filter(|(_, &k)| k)
        .map(|(e, _)| e)
        .collect();
    let survivors: Vec<usize> = (0..thinned.n_nodes()).filter(|&i| keep_node[i]).collect();
    let thinned = thinned.induced(&survivors);
    let comps = connected_components(&thinned);
    let main = comps.largest();
    if comps.sizes.get(main).copied().unwrap_or(0) < 10 {
        return Err(Error::Generator(format!(
            "main component has fewer than 10 nodes; lower removal_prob (now {removal_prob})"
        )));
    }
    Ok(thinned.induced(&comps.members(main)))
}
