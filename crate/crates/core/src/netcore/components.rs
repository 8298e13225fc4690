use super::Network;

/// Connected-component labeling. Ids are contiguous from 0 and ordered by the
/// lowest node index each component contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub id: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Largest component; ties go to the lowest id.
    pub fn largest(&self) -> usize {
        let mut best = 0;
        for (c, &s) in self.sizes.iter().enumerate() {
            if s > self.sizes[best] {
                best = c;
            }
        }
        best
    }

    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.id.len()).filter(|&i| self.id[i] == component).collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Components of the graph on `n` nodes with the given undirected edges.
/// The labeling does not depend on edge order.
pub fn components_from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Components {
    let mut parent: Vec<usize> = (0..n).collect();
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            // smaller root wins so roots are the minimal member
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut root_id = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_id[r] == usize::MAX {
            root_id[r] = sizes.len();
            sizes.push(0);
        }
        id[i] = root_id[r];
        sizes[id[i]] += 1;
    }
    Components { id, sizes }
}

pub fn connected_components(net: &Network) -> Components {
    components_from_edges(net.n_nodes(), net.edges.iter().map(|e| (e.head, e.tail)))
}

/// Components of the subgraph induced by `subset` (global indices, ascending).
/// The returned labeling is indexed by position in `subset`.
pub fn subset_components(net: &Network, subset: &[usize]) -> Components {
    let mut local = vec![usize::MAX; net.n_nodes()];
    for (k, &g) in subset.iter().enumerate() {
        local[g] = k;
    }
    components_from_edges(
        subset.len(),
        net.edges
            .iter()
            .filter(|e| local[e.head] != usize::MAX && local[e.tail] != usize::MAX)
            .map(|e| (local[e.head], local[e.tail])),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_triangles() {
        let edges = vec![(3, 4), (4, 5), (5, 3), (0, 1), (1, 2), (2, 0)];
        let c = components_from_edges(6, edges);
        assert_eq!(c.count(), 2);
        assert_eq!(c.sizes, vec![3, 3]);
        assert_eq!(c.id[0], 0);
        assert_eq!(c.id[3], 1);
        assert_eq!(c.largest(), 0);
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let c = components_from_edges(4, vec![(1, 3)]);
        assert_eq!(c.id, vec![0, 1, 2, 1]);
        assert_eq!(c.largest(), 1);
    }

    proptest! {
        #[test]
        fn labeling_invariant_under_edge_permutation(
            raw in proptest::collection::vec((0usize..30, 0usize..30), 0..60),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let a = components_from_edges(30, raw.clone());
            let mut shuffled = raw;
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled: Vec<_> = shuffled.into_iter().map(|(x, y)| (y, x)).collect();
            let b = components_from_edges(30, shuffled);
            prop_assert_eq!(a, b);
        }
    }
}
