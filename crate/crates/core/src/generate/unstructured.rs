use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netcore::{EdgeRecord, Network, NodeRecord, Point};

const MAX_REDRAWS: usize = 1000;

fn dist2(a: &Point, b: &Point) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Uniform points in the box; a point coinciding with an earlier one is
/// redrawn (bounded number of attempts).
pub(crate) fn random_points(
    box_lengths: &[f64],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let dim = box_lengths.len();
    let mut seen = BTreeSet::new();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let mut accepted = false;
        for _ in 0..MAX_REDRAWS {
            let mut p = [0.0; 3];
            for k in 0..dim {
                p[k] = rng.gen::<f64>() * box_lengths[k];
            }
            if seen.insert(p.map(f64::to_bits)) {
                points.push(p);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::Generator("could not draw distinct points".into()));
        }
    }
    Ok(points)
}

/// Uniform bucket grid for nearest-neighbor queries.
struct Buckets {
    dim: usize,
    cells: [usize; 3],
    size: [f64; 3],
    members: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(points: &[Point], box_lengths: &[f64], per_bucket: usize) -> Self {
        let dim = box_lengths.len();
        let n = points.len().max(1);
        let target = (n as f64 / per_bucket.max(1) as f64).max(1.0);
        let side = target.powf(1.0 / dim as f64).floor().max(1.0) as usize;
        let mut cells = [1usize; 3];
        let mut size = [1.0; 3];
        for k in 0..dim {
            cells[k] = side;
            size[k] = box_lengths[k] / side as f64;
        }
        let mut members = vec![Vec::new(); cells.iter().product()];
        let mut buckets = Self {
            dim,
            cells,
            size,
            members: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            members[buckets.flat(buckets.cell_of(p))].push(i);
        }
        buckets.members = members;
        buckets
    }

    fn cell_of(&self, p: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for k in 0..self.dim {
            c[k] = ((p[k] / self.size[k]).floor() as usize).min(self.cells[k] - 1);
        }
        c
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        c[0] + self.cells[0] * (c[1] + self.cells[1] * c[2])
    }

    /// Indices of the `k` nearest other points to `points[q]`, ties broken by index.
    fn knn(&self, points: &[Point], q: usize, k: usize) -> Vec<usize> {
        let home = self.cell_of(&points[q]);
        let max_ring = (0..self.dim).map(|a| self.cells[a]).max().unwrap_or(1);
        let min_size = (0..self.dim).map(|a| self.size[a]).fold(f64::INFINITY, f64::min);
        let mut cand: Vec<(f64, usize)> = Vec::new();
        for ring in 0..=max_ring {
            self.visit_ring(home, ring, |b| {
                for &j in &self.members[b] {
                    if j != q {
                        cand.push((dist2(&points[q], &points[j]), j));
                    }
                }
            });
            if cand.len() >= k {
                cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
                // points beyond this ring are at least ring·min_size away
                let reach = ring as f64 * min_size;
                if cand[k - 1].0 <= reach * reach {
                    break;
                }
            }
        }
        cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cand.truncate(k);
        cand.into_iter().map(|(_, j)| j).collect()
    }

    fn visit_ring(&self, home: [usize; 3], ring: usize, mut f: impl FnMut(usize)) {
        let r = ring as isize;
        let lo = |k: usize| if k < self.dim { -r } else { 0 };
        let hi = |k: usize| if k < self.dim { r } else { 0 };
        for dz in lo(2)..=hi(2) {
            for dy in lo(1)..=hi(1) {
                for dx in lo(0)..=hi(0) {
                    let d = [dx, dy, dz];
                    if d.iter().map(|v| v.abs()).max().unwrap() != r {
                        continue;
                    }
                    let mut c = [0usize; 3];
                    let mut inside = true;
                    for k in 0..3 {
                        let v = home[k] as isize + d[k];
                        if v < 0 || v >= self.cells[k] as isize {
                            inside = false;
                            break;
                        }
                        c[k] = v as usize;
                    }
                    if inside {
                        f(self.flat(c));
                    }
                }
            }
        }
    }
}

/// Symmetrized k-nearest-neighbor graph: `{i, j}` is an edge when either lists
/// the other among its `k` nearest. Edges are sorted by `(min, max)`.
pub(crate) fn knn_graph(box_lengths: &[f64], points: Vec<Point>, knn: usize) -> Result<Network> {
    let n = points.len();
    let k = knn.min(n.saturating_sub(1));
    let buckets = Buckets::new(&points, box_lengths, knn.max(1));
    let mut pairs = BTreeSet::new();
    for q in 0..n {
        for j in buckets.knn(&points, q, k) {
            pairs.insert((q.min(j), q.max(j)));
        }
    }
    let nodes = points.into_iter().map(|p| NodeRecord::new(p, 1.0)).collect::<Vec<_>>();
    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            let len = dist2(&nodes[a].coords, &nodes[b].coords).sqrt();
            let mut e = EdgeRecord::new(a, b, 1.0);
            e.length = Some(len);
            e
        })
        .collect();
    Network::new(box_lengths.len(), box_lengths.to_vec(), nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bucket_knn_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2usize, 3] {
            let box_lengths = vec![1.0, 2.0, 0.5][..dim].to_vec();
            let pts = random_points(&box_lengths, 300, &mut rng).unwrap();
            let b = Buckets::new(&pts, &box_lengths, 6);
            for q in (0..300).step_by(7) {
                let mut brute: Vec<(f64, usize)> = (0..300)
                    .filter(|&j| j != q)
                    .map(|j| (dist2(&pts[q], &pts[j]), j))
                    .collect();
                brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let want: Vec<usize> = brute[..6].iter().map(|&(_, j)| j).collect();
                assert_eq!(b.knn(&pts, q, 6), want);
            }
        }
    }
}
