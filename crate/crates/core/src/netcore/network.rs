use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// Node coordinates; components beyond `dim` are zero.
pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub coords: Point,
    /// Time-derivative coefficient `c_i` (pore volume).
    pub capacity: f64,
    pub radius: Option<f64>,
    pub labels: BTreeSet<String>,
}

impl NodeRecord {
    pub fn new(coords: Point, capacity: f64) -> Self {
        Self {
            coords,
            capacity,
            radius: None,
            labels: BTreeSet::new(),
        }
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub head: usize,
    pub tail: usize,
    /// Conductance `w_ij`.
    pub weight: f64,
    pub length: Option<f64>,
    pub radius: Option<f64>,
}

impl EdgeRecord {
    pub fn new(head: usize, tail: usize, weight: f64) -> Self {
        Self {
            head,
            tail,
            weight,
            length: None,
            radius: None,
        }
    }
}

/// Weighted undirected graph embedded in the box `[0, L_1] × … × [0, L_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub dim: usize,
    pub box_lengths: Vec<f64>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl Network {
    /// Builds and validates a network (everything except connectivity).
    pub fn new(
        dim: usize,
        box_lengths: Vec<f64>,
        nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
    ) -> Result<Self> {
        let net = Self {
            dim,
            box_lengths,
            nodes,
            edges,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidNetwork(format!("dimension {} not in {{2, 3}}", self.dim)));
        }
        if self.box_lengths.len() != self.dim
            || self.box_lengths.iter().any(|&l| !(l > 0.0 && l.is_finite()))
        {
            return Err(Error::InvalidNetwork(format!(
                "box lengths {:?} must be {} positive reals",
                self.box_lengths, self.dim
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for k in 0..3 {
                let x = node.coords[k];
                let upper = if k < self.dim { self.box_lengths[k] } else { 0.0 };
                if !(x >= 0.0 && x <= upper) {
                    return Err(Error::InvalidNetwork(format!(
                        "node {i}: coordinate {k} = {x} outside [0, {upper}]"
                    )));
                }
            }
            if !(node.capacity > 0.0 && node.capacity.is_finite()) {
                return Err(Error::BadCapacity {
                    index: i,
                    capacity: node.capacity,
                });
            }
        }
        let mut seen = HashSet::with_capacity(self.edges.len());
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.head >= self.nodes.len() || edge.tail >= self.nodes.len() {
                return Err(Error::InvalidNetwork(format!("edge {e}: endpoint out of range")));
            }
            if edge.head == edge.tail {
                return Err(Error::InvalidNetwork(format!("edge {e}: self-loop at node {}", edge.head)));
            }
            if !(edge.weight > 0.0 && edge.weight.is_finite()) {
                return Err(Error::BadWeight {
                    index: e,
                    weight: edge.weight,
                });
            }
            let key = (edge.head.min(edge.tail), edge.head.max(edge.tail));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge {
                    index: e,
                    head: edge.head,
                    tail: edge.tail,
                });
            }
        }
        Ok(())
    }

    pub fn check_connected(&self) -> Result<()> {
        let comps = super::connected_components(self);
        if comps.count() > 1 {
            return Err(Error::InvalidNetwork(format!(
                "network has {} connected components",
                comps.count()
            )));
        }
        Ok(())
    }

    /// Per-node incident `(neighbor, edge index)` lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            adj[edge.head].push((edge.tail, e));
            adj[edge.tail].push((edge.head, e));
        }
        adj
    }

    /// Induced subnetwork on `keep` (ascending global indices), renumbered
    /// consecutively in that order. Edge order is preserved.
    pub fn induced(&self, keep: &[usize]) -> Network {
        let mut map = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let nodes = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.head] != usize::MAX && map[e.tail] != usize::MAX)
            .map(|e| EdgeRecord {
                head: map[e.head],
                tail: map[e.tail],
                ..e.clone()
            })
            .collect();
        Network {
            dim: self.dim,
            box_lengths: self.box_lengths.clone(),
            nodes,
            edges,
        }
    }

    /// Restriction to the largest connected component.
    pub fn largest_component(&self) -> Network {
        let comps = super::connected_components(self);
        if comps.count() <= 1 {
            return self.clone();
        }
        let keep = comps.members(comps.largest());
        self.induced(&keep)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (&self.nodes[a].coords, &self.nodes[b].coords);
        (0..self.dim).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.capacity).collect()
    }

    /// Indices of nodes carrying `label`, ascending.
    pub fn labeled(&self, label: &str) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].has_label(label))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> (Vec<NodeRecord>, Vec<EdgeRecord>) {
        (
            vec![
                NodeRecord::new([0.0, 0.0, 0.0], 1.0),
                NodeRecord::new([1.0, 1.0, 0.0], 1.0),
            ],
            vec![EdgeRecord::new(0, 1, 1.0)],
        )
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        let (nodes, _) = pair();
        let err = Network::new(2, vec![1.0, 1.0], nodes.clone(), vec![EdgeRecord::new(0, 0, 1.0)]);
        assert!(err.is_err());
        let err = Network::new(
            2,
            vec![1.0, 1.0],
            nodes,
            vec![EdgeRecord::new(0, 1, 1.0), EdgeRecord::new(1, 0, 2.0)],
        );
        assert!(matches!(err, Err(Error::DuplicateEdge { index: 1, .. })));
    }

    #[test]
    fn rejects_outside_box_and_bad_weight() {
        let (mut nodes, edges) = pair();
        nodes[1].coords[0] = 1.5;
        assert!(Network::new(2, vec![1.0, 1.0], nodes, edges).is_err());
        let (nodes, mut edges) = pair();
        edges[0].weight = -1.0;
        assert!(matches!(
            Network::new(2, vec![1.0, 1.0], nodes, edges),
            Err(Error::BadWeight { index: 0, .. })
        ));
    }

    #[test]
    fn induced_renumbers() {
        let nodes = (0..4).map(|i| NodeRecord::new([i as f64, 0.0, 0.0], 1.0)).collect();
        let edges = vec![EdgeRecord::new(0, 1, 1.0), EdgeRecord::new(2, 3, 2.0)];
        let net = Network::new(2, vec![4.0, 1.0], nodes, edges).unwrap();
        let sub = net.induced(&[2, 3]);
        assert_eq!(sub.n_nodes(), 2);
        assert_eq!(sub.edges, vec![EdgeRecord::new(0, 1, 2.0)]);
    }
}
