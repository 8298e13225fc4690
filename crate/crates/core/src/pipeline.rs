//! End-to-end runs on one problem: fine reference, multiscale solve and
//! upscaled solve, with stage timings.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::coarse::CoarseSpace;
use crate::error::Result;
use crate::metrics::cell_average;
use crate::msbasis::{build_multiscale_basis, BasisConfig, MultiscaleBasis};
use crate::netcore::{assemble_laplacian, assemble_mass, reduce_dirichlet, BoundarySpec, Network, ReducedSystem};
use crate::solve::{fine_solve, multiscale_solve, CoarseSystem, LinearSolverConfig, TimeGrid, Trajectory};
use crate::sparse::SparseOperator;
use crate::upscale::{cell_sums, prolong_piecewise_constant, upscale, UpscaleConfig, UpscaledModel};

pub type Timings = BTreeMap<String, f64>;

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// A network with its operators and the data of one diffusion problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub net: Network,
    pub bc: BoundarySpec,
    pub source: Vec<f64>,
    pub u0: Vec<f64>,
    pub l: SparseOperator,
    pub c: SparseOperator,
    pub reduced: ReducedSystem,
}

impl Problem {
    pub fn new(net: Network, bc: BoundarySpec, source: Vec<f64>, u0: Vec<f64>) -> Result<Self> {
        let l = assemble_laplacian(&net)?;
        let c = assemble_mass(&net)?;
        let reduced = reduce_dirichlet(&l, &c, &source, &bc, &net)?;
        Ok(Self {
            net,
            bc,
            source,
            u0,
            l,
            c,
            reduced,
        })
    }

    /// Zero source and zero initial state.
    pub fn homogeneous(net: Network, bc: BoundarySpec) -> Result<Self> {
        let n = net.n_nodes();
        Self::new(net, bc, vec![0.0; n], vec![0.0; n])
    }

    pub fn fine(&self, tg: &TimeGrid, solver: &LinearSolverConfig, save_every: Option<usize>) -> Result<Trajectory> {
        fine_solve(&self.reduced, &self.u0, tg, solver, save_every)
    }

    /// Offline stage on the given coarse grid.
    pub fn basis(&self, space: &CoarseSpace, cfg: &BasisConfig) -> Result<MultiscaleBasis> {
        build_multiscale_basis(&self.net, space, cfg, &self.reduced.global_to_free, self.reduced.n_free())
    }

    pub fn multiscale(&self, cells: &[usize], cfg: &BasisConfig, tg: &TimeGrid, save_every: Option<usize>) -> Result<MultiscaleRun> {
        let t = Instant::now();
        let space = CoarseSpace::new(&self.net, cells)?;
        let basis = self.basis(&space, cfg)?;
        let offline = seconds(t);
        let t = Instant::now();
        let (system, coarse, fine) = multiscale_solve(&basis.projection.r, &self.reduced, &self.u0, tg, save_every)?;
        let online = seconds(t);
        Ok(MultiscaleRun {
            space,
            basis,
            system,
            coarse,
            fine,
            timings: BTreeMap::from([("offline".into(), offline), ("online".into(), online)]),
        })
    }

    pub fn upscaled(&self, cells: &[usize], cfg: &UpscaleConfig, tg: &TimeGrid, save_every: Option<usize>) -> Result<UpscaledRun> {
        let t = Instant::now();
        let space = CoarseSpace::new(&self.net, cells)?;
        let model = upscale(&self.net, &space.grid, &space.assignment, &self.bc, cfg)?;
        let offline = seconds(t);
        let t = Instant::now();
        let source = cell_sums(&self.source, &space.assignment);
        let u0: Vec<f64> = cell_average(&self.u0, &space.assignment, &self.net, cfg.average)
            .into_iter()
            .map(|v| v.unwrap_or(0.0))
            .collect();
        let cells_traj = model.solve(&self.bc, &source, &u0, tg, save_every)?;
        let fine = cells_traj.map(|ubar| self.prolong(ubar, &space));
        let online = seconds(t);
        Ok(UpscaledRun {
            space,
            model,
            cells: cells_traj,
            fine,
            timings: BTreeMap::from([("offline".into(), offline), ("online".into(), online)]),
        })
    }

    /// Piecewise-constant prolongation with the known boundary values
    /// restored on Dirichlet nodes.
    pub fn prolong(&self, ubar: &[f64], space: &CoarseSpace) -> Vec<f64> {
        let mut u = prolong_piecewise_constant(ubar, &space.assignment);
        for (g, v) in u.iter_mut().enumerate() {
            if self.reduced.is_dirichlet(g) {
                *v = self.reduced.lift[g];
            }
        }
        u
    }
}

#[derive(Debug, Clone)]
pub struct MultiscaleRun {
    pub space: CoarseSpace,
    pub basis: MultiscaleBasis,
    pub system: CoarseSystem,
    /// Coarse coefficients `u_H`.
    pub coarse: Trajectory,
    /// Reconstructed fine-length states.
    pub fine: Trajectory,
    pub timings: Timings,
}

impl MultiscaleRun {
    pub fn dof_coarse(&self) -> usize {
        self.basis.projection.n_coarse()
    }
}

#[derive(Debug, Clone)]
pub struct UpscaledRun {
    pub space: CoarseSpace,
    pub model: UpscaledModel,
    /// Cell values.
    pub cells: Trajectory,
    /// Prolonged fine-length states.
    pub fine: Trajectory,
    pub timings: Timings,
}

impl UpscaledRun {
    pub fn dof_coarse(&self) -> usize {
        self.model.active_cells().len()
    }
}

/// The Dirichlet setup used throughout: value 1 on the top face.
pub fn top_dirichlet(value: f64) -> BoundarySpec {
    BoundarySpec::new().with("top", value)
}
