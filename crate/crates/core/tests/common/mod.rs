#![allow(dead_code)]

use gmsnet::generate::{build_network, GeneratorConfig, PropertyConfig, PropertyMode};
use gmsnet::netcore::{EdgeRecord, Network, NodeRecord};

/// Nodes at `x = i/(n-1)` on `[0, 1]` joined by weight-`w` edges.
pub fn chain(n: usize, w: f64) -> Network {
    let nodes = (0..n)
        .map(|i| NodeRecord::new([i as f64 / (n - 1) as f64, 0.25, 0.0], 1.0))
        .collect();
    let edges = (0..n - 1).map(|i| EdgeRecord::new(i, i + 1, w)).collect();
    Network::new(2, vec![1.0, 0.5], nodes, edges).unwrap()
}

/// 2D lattice on the unit square with per-edge weights and per-node
/// capacities taken cyclically from the given slices.
pub fn weighted_lattice(nx: usize, ny: usize, weights: &[f64], caps: &[f64]) -> Network {
    let mut nodes = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let x = (i as f64 + 0.5) / nx as f64;
            let y = (j as f64 + 0.5) / ny as f64;
            let mut n = NodeRecord::new([x, y, 0.0], caps[nodes.len() % caps.len()]);
            if j == ny - 1 {
                n.labels.insert("top".into());
            }
            if j == 0 {
                n.labels.insert("bottom".into());
            }
            nodes.push(n);
        }
    }
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = j * nx + i;
            if i + 1 < nx {
                edges.push(EdgeRecord::new(v, v + 1, weights[edges.len() % weights.len()]));
            }
            if j + 1 < ny {
                edges.push(EdgeRecord::new(v, v + nx, weights[edges.len() % weights.len()]));
            }
        }
    }
    Network::new(2, vec![1.0, 1.0], nodes, edges).unwrap()
}

pub fn poiseuille(gen: &GeneratorConfig, seed: u64) -> Network {
    let props = PropertyConfig {
        seed,
        ..PropertyConfig::default()
    };
    build_network(gen, &props).unwrap()
}

/// Constant coefficients: every pore and throat gets the same diameter.
pub fn homogeneous(gen: &GeneratorConfig) -> Network {
    let props = PropertyConfig {
        mode: PropertyMode::HighContrast,
        ..PropertyConfig::default()
    };
    build_network(gen, &props).unwrap()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den
}
