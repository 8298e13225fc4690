use super::Network;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Graph Laplacian of `n` nodes from `(i, j, w)` edges. Off-diagonals are
/// assembled first and the diagonal is set to the negated off-diagonal row
/// sum, so `L·1 = 0` holds exactly in floating point.
pub fn laplacian_from_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
) -> Result<SparseOperator> {
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (e, (i, j, w)) in edges.into_iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::BadWeight { index: e, weight: w });
        }
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidNetwork(format!("edge {e}: bad endpoints ({i}, {j})")));
        }
        rows[i].push((j, -w));
        rows[j].push((i, -w));
    }
    let off = SparseOperator::from_rows(n, rows);
    let rows = (0..n)
        .map(|i| {
            let (cols, vals) = off.row(i);
            let diag: f64 = -vals.iter().sum::<f64>();
            let mut row: Vec<(usize, f64)> = cols.iter().copied().zip(vals.iter().copied()).collect();
            row.push((i, diag));
            row
        })
        .collect();
    Ok(SparseOperator::from_rows(n, rows))
}

pub fn assemble_laplacian(net: &Network) -> Result<SparseOperator> {
    laplacian_from_edges(
        net.n_nodes(),
        net.edges.iter().map(|e| (e.head, e.tail, e.weight)),
    )
}

/// Diagonal capacity matrix `C = diag(c)`.
pub fn assemble_mass(net: &Network) -> Result<SparseOperator> {
    for (i, node) in net.nodes.iter().enumerate() {
        if !(node.capacity > 0.0 && node.capacity.is_finite()) {
            return Err(Error::BadCapacity {
                index: i,
                capacity: node.capacity,
            });
        }
    }
    Ok(SparseOperator::diagonal(&net.capacities()))
}

/// Degree matrix `D = diag(Σ_j w_ij)`. Isolated nodes get a zero entry.
pub fn degree_matrix(net: &Network) -> SparseOperator {
    let mut d = vec![0.0; net.n_nodes()];
    for e in &net.edges {
        d[e.head] += e.weight;
        d[e.tail] += e.weight;
    }
    SparseOperator::diagonal(&d)
}

/// Degree matrix read off the Laplacian diagonal.
pub fn degree_from_laplacian(l: &SparseOperator) -> SparseOperator {
    SparseOperator::diagonal(&l.diagonal_values())
}

/// Vertex-edge incidence `B` (+1 at the head, −1 at the tail of each column)
/// and the diagonal edge-weight matrix `M`, with `B M Bᵀ = L`.
pub fn incidence_factorization(net: &Network) -> Result<(SparseOperator, SparseOperator)> {
    let triplets = net
        .edges
        .iter()
        .enumerate()
        .flat_map(|(e, edge)| [(edge.head, e, 1.0), (edge.tail, e, -1.0)]);
    let b = SparseOperator::from_triplets(net.n_nodes(), net.n_edges(), triplets)?;
    let m = SparseOperator::diagonal(&net.edges.iter().map(|e| e.weight).collect::<Vec<_>>());
    Ok((b, m))
}
