//! Linear solvers: Jacobi-preconditioned conjugate gradients for the sparse
//! SPD systems, dense Cholesky and LU for small systems and oracles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual `‖b − A x‖ / ‖b‖` at which iteration stops.
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Solves `A x = b` for SPD `A`, starting from the contents of `x`.
pub fn pcg(a: &SparseOperator, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<CgStats> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n || x.len() != n {
        return Err(Error::Dimension(format!(
            "pcg: matrix {}×{}, rhs {}, guess {}",
            n,
            a.n_cols(),
            b.len(),
            x.len()
        )));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal_values()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = norm2(&r) / bnorm;
    if rel <= opts.rtol {
        return Ok(CgStats {
            iterations: 0,
            rel_residual: rel,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.is_nan() || pap <= 0.0 {
            return Err(Error::NotPsd(pap));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= opts.rtol {
            return Ok(CgStats {
                iterations: it,
                rel_residual: rel,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        step: 0,
        iterations: opts.max_iter,
        residual: rel,
    })
}

/// Cholesky factor of a dense SPD matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl DenseCholesky {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let factor = nalgebra::Cholesky::new(a).ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
        Ok(Self { factor })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(&DVector::from_column_slice(b)).iter().copied().collect()
    }
}

pub fn dense_cholesky_solve(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    Ok(DenseCholesky::new(a.to_dense())?.solve(b))
}

/// Dense LU solve, used as an independent reference.
pub fn dense_lu_solve(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    a.to_dense()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::Singular("LU factorization is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64 * 0.01));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseOperator::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn pcg_matches_lu() {
        let a = tridiag(80);
        let b: Vec<f64> = (0..80).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let mut x = vec![0.0; 80];
        let stats = pcg(&a, &b, &mut x, &CgOptions::default()).unwrap();
        assert!(stats.rel_residual <= 1e-10);
        let lu = dense_lu_solve(&a, &b).unwrap();
        let ch = dense_cholesky_solve(&a, &b).unwrap();
        for i in 0..80 {
            assert!((x[i] - lu[i]).abs() < 1e-8);
            assert!((ch[i] - lu[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_and_warm_start() {
        let a = tridiag(10);
        let mut x = vec![1.0; 10];
        assert_eq!(pcg(&a, &[0.0; 10], &mut x, &CgOptions::default()).unwrap().iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
        let b = a.mul_vec(&[1.0; 10]);
        let mut x = vec![1.0; 10];
        assert_eq!(pcg(&a, &b, &mut x, &CgOptions::default()).unwrap().iterations, 0);
    }

    #[test]
    fn indefinite_rejected() {
        let a = SparseOperator::diagonal(&[1.0, -1.0]);
        let mut x = vec![0.0; 2];
        assert!(pcg(&a, &[0.0, 1.0], &mut x, &CgOptions::default()).is_err());
        assert!(DenseCholesky::new(a.to_dense()).is_err());
    }
}
