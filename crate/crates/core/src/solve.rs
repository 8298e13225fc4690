//! Online stage: implicit Euler on the fine network, Galerkin projection onto
//! the multiscale space, coarse time stepping and reconstruction.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsolve::{pcg, CgOptions, DenseCholesky};
use crate::netcore::ReducedSystem;
use crate::sparse::{norm2, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tau: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, n_steps: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("time step {tau} must be positive")));
        }
        if n_steps == 0 {
            return Err(Error::Config("at least one time step is required".into()));
        }
        Ok(Self { tau, n_steps })
    }

    /// Grid with `n_steps` steps ending at `t_end`.
    pub fn from_final_time(t_end: f64, n_steps: usize) -> Result<Self> {
        Self::new(t_end / n_steps.max(1) as f64, n_steps)
    }

    pub fn final_time(&self) -> f64 {
        self.tau * self.n_steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    ConjugateGradient,
    DenseCholesky,
    DenseLuOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolverConfig {
    pub method: SolverMethod,
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for LinearSolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::ConjugateGradient,
            rtol: 1e-10,
            max_iter: 20_000,
        }
    }
}

impl LinearSolverConfig {
    pub fn with_method(method: SolverMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Solution snapshots at selected steps; `last` is the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<usize>,
    pub snapshots: Vec<Vec<f64>>,
    pub last: Vec<f64>,
}

impl Trajectory {
    fn new(save_every: Option<usize>, initial: &[f64]) -> Self {
        let mut t = Self {
            steps: Vec::new(),
            snapshots: Vec::new(),
            last: initial.to_vec(),
        };
        if save_every.is_some() {
            t.steps.push(0);
            t.snapshots.push(initial.to_vec());
        }
        t
    }

    fn record(&mut self, step: usize, n_steps: usize, save_every: Option<usize>, state: &[f64]) {
        if let Some(k) = save_every {
            if step.is_multiple_of(k.max(1)) || step == n_steps {
                self.steps.push(step);
                self.snapshots.push(state.to_vec());
            }
        }
        if step == n_steps {
            self.last = state.to_vec();
        }
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Trajectory {
        Trajectory {
            steps: self.steps.clone(),
            snapshots: self.snapshots.iter().map(|s| f(s)).collect(),
            last: f(&self.last),
        }
    }
}

enum Factor {
    Cg(SparseOperator, CgOptions),
    Cholesky(DenseCholesky),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(a: SparseOperator, cfg: &LinearSolverConfig) -> Result<Self> {
        if !(cfg.rtol > 0.0 && cfg.rtol < 1.0) {
            return Err(Error::Config(format!("solver rtol {} not in (0, 1)", cfg.rtol)));
        }
        Ok(match cfg.method {
            SolverMethod::ConjugateGradient => Factor::Cg(
                a,
                CgOptions {
                    rtol: cfg.rtol,
                    max_iter: cfg.max_iter,
                },
            ),
            SolverMethod::DenseCholesky => Factor::Cholesky(DenseCholesky::new(a.to_dense())?),
            SolverMethod::DenseLuOracle => Factor::Lu(a.to_dense().lu()),
        })
    }

    fn solve(&self, b: &[f64], x: &mut [f64], step: usize) -> Result<()> {
        match self {
            Factor::Cg(a, opts) => {
                let stats = pcg(a, b, x, opts).map_err(|e| match e {
                    Error::NotConverged { iterations, residual, .. } => Error::NotConverged {
                        step,
                        iterations,
                        residual,
                    },
                    other => other,
                })?;
                debug!("step {step}: {} CG iterations, residual {:.2e}", stats.iterations, stats.rel_residual);
            }
            Factor::Cholesky(ch) => x.copy_from_slice(&ch.solve(b)),
            Factor::Lu(lu) => {
                let sol = lu
                    .solve(&DVector::from_column_slice(b))
                    .ok_or_else(|| Error::Singular("LU factorization is singular".into()))?;
                x.copy_from_slice(sol.as_slice());
            }
        }
        Ok(())
    }
}

/// Implicit Euler on the reduced fine system with time-constant forcing.
pub fn fine_solve(
    reduced: &ReducedSystem,
    u0: &[f64],
    tg: &TimeGrid,
    cfg: &LinearSolverConfig,
    save_every: Option<usize>,
) -> Result<Trajectory> {
    let rhs = reduced.effective_rhs();
    fine_solve_forced(reduced, u0, tg, cfg, save_every, |_| rhs.clone())
}

/// Implicit Euler where `forcing(n)` returns the free-node right-hand side
/// `f^n_free + rhs_bc` of step `n`.
pub fn fine_solve_forced(
    reduced: &ReducedSystem,
    u0: &[f64],
    tg: &TimeGrid,
    cfg: &LinearSolverConfig,
    save_every: Option<usize>,
    forcing: impl Fn(usize) -> Vec<f64>,
) -> Result<Trajectory> {
    if u0.len() != reduced.n_global() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, network {}",
            u0.len(),
            reduced.n_global()
        )));
    }
    let tau = tg.tau;
    let a = reduced.c_free.linear_combination(1.0, &reduced.l_free, tau)?;
    let factor = Factor::new(a, cfg)?;
    let mut u = reduced.restrict(u0);
    let mut traj = Trajectory::new(save_every, &reduced.embed(&u));
    let mut b = vec![0.0; u.len()];
    for n in 1..=tg.n_steps {
        let f = forcing(n);
        reduced.c_free.mul_vec_into(&u, &mut b);
        for (bi, fi) in b.iter_mut().zip(&f) {
            *bi += tau * fi;
        }
        factor.solve(&b, &mut u, n)?;
        let full = if save_every.is_some() || n == tg.n_steps {
            reduced.embed(&u)
        } else {
            Vec::new()
        };
        traj.record(n, tg.n_steps, save_every, &full);
    }
    Ok(traj)
}

/// Projected operators `C_H = R C Rᵀ`, `L_H = R L Rᵀ` and load `F_H = R F`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseSystem {
    pub c_h: SparseOperator,
    pub l_h: SparseOperator,
    pub f_h: Vec<f64>,
}

fn triple_product(r: &SparseOperator, rt: &SparseOperator, a: &SparseOperator) -> Result<SparseOperator> {
    let p = r.matmul(&a.matmul(rt)?)?;
    // average with the transpose so the result is exactly symmetric
    p.linear_combination(0.5, &p.transpose(), 0.5)
}

pub fn galerkin_project(r: &SparseOperator, c: &SparseOperator, l: &SparseOperator, rhs: &[f64]) -> Result<CoarseSystem> {
    if r.n_cols() != c.n_rows() || r.n_cols() != l.n_rows() || rhs.len() != r.n_cols() {
        return Err(Error::Dimension(format!(
            "projection has {} columns; C {}, L {}, rhs {}",
            r.n_cols(),
            c.n_rows(),
            l.n_rows(),
            rhs.len()
        )));
    }
    let rt = r.transpose();
    Ok(CoarseSystem {
        c_h: triple_product(r, &rt, c)?,
        l_h: triple_product(r, &rt, l)?,
        f_h: r.mul_vec(rhs),
    })
}

/// Solver for the time-invariant coarse matrix: Cholesky, or a spectral
/// pseudo-inverse when the coarse functions are linearly dependent.
pub struct CoarseFactor {
    inner: CoarseInner,
}

enum CoarseInner {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Pseudo { vectors: DMatrix<f64>, inv: Vec<f64> },
}

impl CoarseFactor {
    pub fn new(a: &SparseOperator) -> Result<Self> {
        let dense = a.to_dense();
        let scale = dense.diagonal().iter().cloned().fold(0.0, f64::max);
        if scale <= 0.0 {
            return Err(Error::Singular("coarse matrix has no positive diagonal entry".into()));
        }
        if let Some(ch) = nalgebra::Cholesky::new(dense.clone()) {
            // a tiny pivot means the coarse functions are numerically dependent
            let min_pivot = ch.l_dirty().diagonal().iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
            if min_pivot > 1e-10 * scale {
                return Ok(Self {
                    inner: CoarseInner::Cholesky(ch),
                });
            }
        }
        let eig = SymmetricEigen::new(dense);
        let lam_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let cutoff = 1e-12 * lam_max * eig.eigenvalues.len() as f64;
        let kept = eig.eigenvalues.iter().filter(|&&l| l > cutoff).count();
        warn!(
            "coarse matrix is rank deficient ({kept} of {} directions); using a pseudo-inverse",
            eig.eigenvalues.len()
        );
        let inv = eig.eigenvalues.iter().map(|&l| if l > cutoff { 1.0 / l } else { 0.0 }).collect();
        Ok(Self {
            inner: CoarseInner::Pseudo {
                vectors: eig.eigenvectors,
                inv,
            },
        })
    }

    pub fn is_pseudo_inverse(&self) -> bool {
        matches!(self.inner, CoarseInner::Pseudo { .. })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.inner {
            CoarseInner::Cholesky(ch) => ch.solve(&DVector::from_column_slice(b)).iter().copied().collect(),
            CoarseInner::Pseudo { vectors, inv } => {
                let mut y = vectors.tr_mul(&DVector::from_column_slice(b));
                for (yi, s) in y.iter_mut().zip(inv) {
                    *yi *= s;
                }
                (vectors * y).iter().copied().collect()
            }
        }
    }
}

/// Coarse implicit Euler: `(C_H + τ L_H) u_H^n = τ F_H + C_H u_H^{n−1}`.
pub fn ms_solve(sys: &CoarseSystem, u_h0: &[f64], tg: &TimeGrid, save_every: Option<usize>) -> Result<Trajectory> {
    let n = sys.c_h.n_rows();
    if u_h0.len() != n || sys.f_h.len() != n {
        return Err(Error::Dimension(format!(
            "coarse system has {n} unknowns, initial state {}, load {}",
            u_h0.len(),
            sys.f_h.len()
        )));
    }
    let tau = tg.tau;
    let a = sys.c_h.linear_combination(1.0, &sys.l_h, tau)?;
    let factor = CoarseFactor::new(&a)?;
    let mut u = u_h0.to_vec();
    let mut traj = Trajectory::new(save_every, &u);
    let mut b = vec![0.0; n];
    for step in 1..=tg.n_steps {
        sys.c_h.mul_vec_into(&u, &mut b);
        for (bi, fi) in b.iter_mut().zip(&sys.f_h) {
            *bi += tau * fi;
        }
        u = factor.solve(&b);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(format!("coarse solve produced non-finite values at step {step}")));
        }
        traj.record(step, tg.n_steps, save_every, &u);
    }
    Ok(traj)
}

/// `u_ms = Rᵀ u_H` on free nodes and the boundary values elsewhere.
pub fn reconstruct(r: &SparseOperator, u_h: &[f64], reduced: &ReducedSystem) -> Vec<f64> {
    let free = r.transpose().mul_vec(u_h);
    reduced.embed(&free)
}

/// `√(uᵀ L u)`, with round-off negatives clamped to zero.
pub fn energy_norm(l: &SparseOperator, u: &[f64]) -> Result<f64> {
    let q = l.quad_form(u);
    let n2 = norm2(u).powi(2);
    if q < -1e-12 * n2 {
        return Err(Error::NotPsd(q));
    }
    Ok(q.max(0.0).sqrt())
}

/// Full online stage: project, step the coarse system from `R u0`, and
/// reconstruct every stored state.
pub fn multiscale_solve(
    r: &SparseOperator,
    reduced: &ReducedSystem,
    u0: &[f64],
    tg: &TimeGrid,
    save_every: Option<usize>,
) -> Result<(CoarseSystem, Trajectory, Trajectory)> {
    let sys = galerkin_project(r, &reduced.c_free, &reduced.l_free, &reduced.effective_rhs())?;
    let u_h0 = r.mul_vec(&reduced.restrict(u0));
    let coarse = ms_solve(&sys, &u_h0, tg, save_every)?;
    let fine = coarse.map(|u_h| reconstruct(r, u_h, reduced));
    Ok((sys, coarse, fine))
}
