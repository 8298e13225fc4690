//! Smallest eigenpairs of symmetric matrices: dense decomposition for small
//! problems, thick-restart Lanczos for large sparse ones.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseOperator};

/// Eigenpairs sorted by ascending eigenvalue; `vectors[r]` is unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The `k` smallest eigenpairs of a dense symmetric matrix.
pub fn dense_smallest(a: DMatrix<f64>, k: usize) -> EigenPairs {
    let n = a.nrows();
    let k = k.min(n);
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    EigenPairs { values, vectors }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Residual bound `‖A x − λ x‖₂` for accepted pairs.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_restarts: 500,
            seed: 0x5eed,
        }
    }
}

/// Orthogonalizes `w` against `basis` twice; returns the accumulated
/// projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coef = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, v) in coef.iter_mut().zip(basis) {
            let p = dot(v, w);
            *c += p;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= p * vi;
            }
        }
    }
    coef
}

fn random_unit(n: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..10 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        orthogonalize(basis, &mut v);
        let nv = norm2(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// The `k` smallest eigenpairs of a symmetric operator whose spectrum lies in
/// `[0, shift]`. Lanczos runs on `shift·I − A` so the wanted pairs are the
/// dominant ones; the Krylov basis is kept fully orthogonal and thick
/// restarts retain the best Ritz vectors.
pub fn lanczos_smallest(a: &SparseOperator, k: usize, shift: f64, opts: &LanczosOptions) -> Result<EigenPairs> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::Dimension("eigenproblem matrix is not square".into()));
    }
    let k = k.min(n);
    if k == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let m = n.min((4 * k).max(k + 40));
    let keep = (k + 10).min(m - 1).max(k.min(m - 1));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let apply = |x: &[f64], y: &mut [f64]| {
        a.mul_vec_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = shift * xi - *yi;
        }
    };

    let mut basis: Vec<Vec<f64>> = vec![random_unit(n, &[], &mut rng).expect("nonempty space")];
    let mut h = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut next = 0usize;
    let mut w = vec![0.0; n];

    for _restart in 0..=opts.max_restarts {
        // expand to m vectors
        let mut beta = 0.0;
        while next < m {
            apply(&basis[next], &mut w);
            let coef = orthogonalize(&basis, &mut w);
            for (i, c) in coef.iter().enumerate() {
                h[(i, next)] = *c;
                h[(next, i)] = *c;
            }
            beta = norm2(&w);
            next += 1;
            if next == m {
                break;
            }
            let v = if beta > 1e-12 * shift.max(1.0) {
                w.iter().map(|x| x / beta).collect()
            } else {
                beta = 0.0;
                match random_unit(n, &basis, &mut rng) {
                    Some(v) => v,
                    None => break,
                }
            };
            h[(next, next - 1)] = beta;
            h[(next - 1, next)] = beta;
            basis.push(v);
        }
        let size = basis.len();
        let sub = h.view((0, 0), (size, size)).into_owned();
        let eig = SymmetricEigen::new(sub);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));

        let ritz = |col: usize| -> Vec<f64> {
            let y = eig.eigenvectors.column(col);
            let mut x = vec![0.0; n];
            for (v, yi) in basis.iter().zip(y.iter()) {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += yi * vi;
                }
            }
            x
        };
        let est = |col: usize| (beta * eig.eigenvectors[(size - 1, col)]).abs();
        let exhausted = size == n || beta == 0.0;
        if exhausted || order[..k].iter().all(|&c| est(c) <= 0.5 * opts.tol) {
            let mut pairs = Vec::with_capacity(k);
            let mut y = vec![0.0; n];
            let mut ok = true;
            for &c in &order[..k.min(size)] {
                let mut x = ritz(c);
                let nx = norm2(&x);
                x.iter_mut().for_each(|v| *v /= nx);
                let lam = dot(&x, &a.mul_vec(&x));
                a.mul_vec_into(&x, &mut y);
                let res = y.iter().zip(&x).map(|(yi, xi)| (yi - lam * xi).powi(2)).sum::<f64>().sqrt();
                if res > opts.tol && !exhausted {
                    ok = false;
                    break;
                }
                pairs.push((lam, x));
            }
            if ok {
                pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
                return Ok(EigenPairs {
                    values: pairs.iter().map(|p| p.0).collect(),
                    vectors: pairs.into_iter().map(|p| p.1).collect(),
                });
            }
        }

        // thick restart: keep the best Ritz vectors plus the residual direction
        let kept: Vec<usize> = order[..keep.min(size)].to_vec();
        let new_basis: Vec<Vec<f64>> = kept
            .iter()
            .map(|&c| {
                let mut x = ritz(c);
                let nx = norm2(&x);
                x.iter_mut().for_each(|v| *v /= nx);
                x
            })
            .collect();
        let resid = if beta > 0.0 {
            let mut r: Vec<f64> = w.iter().map(|x| x / beta).collect();
            orthogonalize(&new_basis, &mut r);
            let nr = norm2(&r);
            (nr > 1e-8).then(|| r.into_iter().map(|x| x / nr).collect())
        } else {
            None
        };
        let restart_vec = resid.or_else(|| random_unit(n, &new_basis, &mut rng));
        h.fill(0.0);
        for (i, &c) in kept.iter().enumerate() {
            h[(i, i)] = eig.eigenvalues[c];
        }
        basis = new_basis;
        next = basis.len();
        if let Some(v) = restart_vec {
            basis.push(v);
        }
    }
    Err(Error::NotConverged {
        step: 0,
        iterations: opts.max_restarts,
        residual: f64::NAN,
    })
}
