mod common;

use gmsnet::coarse::CoarseSpace;
use gmsnet::generate::GeneratorConfig;
use gmsnet::metrics::l2_error;
use gmsnet::msbasis::BasisConfig;
use gmsnet::netcore::BoundarySpec;
use gmsnet::pipeline::{top_dirichlet, Problem};
use gmsnet::solve::{
    energy_norm, fine_solve, galerkin_project, ms_solve, multiscale_solve, LinearSolverConfig, SolverMethod, TimeGrid,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use common::{rel_diff, weighted_lattice};

/// Implicit Euler written out with a dense LU solve per step.
fn dense_euler(p: &Problem, tg: &TimeGrid) -> Vec<f64> {
    let r = &p.reduced;
    let c = r.c_free.to_dense();
    let a = &c + r.l_free.to_dense() * tg.tau;
    let lu = a.lu();
    let f = DVector::from_vec(r.effective_rhs());
    let mut u = DVector::from_vec(r.restrict(&p.u0));
    for _ in 0..tg.n_steps {
        let b = &c * &u + &f * tg.tau;
        u = lu.solve(&b).unwrap();
    }
    r.embed(u.as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_never_increases_without_forcing(
        nx in 3usize..8, ny in 3usize..8,
        w in prop::collection::vec(1e-2..10.0f64, 1..30),
        c in prop::collection::vec(1e-2..5.0f64, 1..30),
        u0 in prop::collection::vec(-1.0..1.0f64, 64),
        log_tau in -3.0..3.0f64,
    ) {
        let net = weighted_lattice(nx, ny, &w, &c);
        let n = net.n_nodes();
        let mut u0 = u0[..n].to_vec();
        for v in net.labeled("top") {
            u0[v] = 0.0;
        }
        let p = Problem::new(net, top_dirichlet(0.0), vec![0.0; n], u0).unwrap();
        let tg = TimeGrid::new(10f64.powf(log_tau), 12).unwrap();
        let cfg = LinearSolverConfig::with_method(SolverMethod::DenseCholesky);
        let traj = fine_solve(&p.reduced, &p.u0, &tg, &cfg, Some(1)).unwrap();
        let norms: Vec<f64> = traj.snapshots.iter().map(|u| energy_norm(&p.l, u).unwrap()).collect();
        for k in 1..norms.len() {
            prop_assert!(norms[k] <= norms[k - 1] * (1.0 + 1e-12) + 1e-300);
        }
        // Coarse energy on a two-function-per-patch space.
        let space = CoarseSpace::new(&p.net, &[2, 2]).unwrap();
        let basis = p.basis(&space, &BasisConfig::uniform(2)).unwrap();
        let r = &basis.projection.r;
        let sys = galerkin_project(r, &p.reduced.c_free, &p.reduced.l_free, &p.reduced.effective_rhs()).unwrap();
        let u_h0 = r.mul_vec(&p.reduced.restrict(&p.u0));
        let coarse = ms_solve(&sys, &u_h0, &tg, Some(1)).unwrap();
        let cn: Vec<f64> = coarse.snapshots.iter().map(|u| energy_norm(&sys.l_h, u).unwrap()).collect();
        for k in 1..cn.len() {
            prop_assert!(cn[k] <= cn[k - 1] * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn solvers_agree_with_dense_euler(
        nx in 3usize..9, ny in 3usize..9,
        w in prop::collection::vec(1e-2..10.0f64, 1..30),
        log_tau in -2.0..2.0f64,
        g in 0.5..2.0f64,
    ) {
        let net = weighted_lattice(nx, ny, &w, &[0.3, 1.0, 2.0]);
        let p = Problem::homogeneous(net, top_dirichlet(g)).unwrap();
        let tg = TimeGrid::new(10f64.powf(log_tau), 8).unwrap();
        let oracle = dense_euler(&p, &tg);
        for method in [SolverMethod::ConjugateGradient, SolverMethod::DenseCholesky, SolverMethod::DenseLuOracle] {
            let u = p.fine(&tg, &LinearSolverConfig::with_method(method), None).unwrap().last;
            prop_assert!(rel_diff(&oracle, &u) <= 1e-8, "{:?}", method);
        }
    }
}

#[test]
fn complete_local_bases_recover_the_fine_solution() {
    for gen in [GeneratorConfig::regular(&[12, 12]), GeneratorConfig::irregular(&[14, 14], 0.2, 6)] {
        let net = common::poiseuille(&gen, 6);
        let p = Problem::homogeneous(net, top_dirichlet(1.0)).unwrap();
        let tg = TimeGrid::from_final_time(2.0, 20).unwrap();
        let fine = p.fine(&tg, &LinearSolverConfig::with_method(SolverMethod::DenseCholesky), None).unwrap();
        let ms = p.multiscale(&[3, 3], &BasisConfig::full(), &tg, None).unwrap();
        assert!(l2_error(&fine.last, &ms.fine.last).unwrap() <= 1e-8);
    }
}

#[test]
fn chain_relaxes_to_the_linear_steady_profile() {
    // Dirichlet 1 at x = 0 and 0 at x = 1: the steady state is 1 − x.
    let mut net = common::chain(11, 3.0);
    net.nodes[0].labels.insert("left".into());
    net.nodes[10].labels.insert("right".into());
    let bc = BoundarySpec::new().with("left", 1.0).with("right", 0.0);
    let p = Problem::homogeneous(net, bc).unwrap();
    let tg = TimeGrid::new(1e6, 5).unwrap();
    let u = p.fine(&tg, &LinearSolverConfig::default(), None).unwrap().last;
    for (i, v) in u.iter().enumerate() {
        assert!((v - (1.0 - i as f64 / 10.0)).abs() < 1e-8);
    }
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let net = common::poiseuille(&GeneratorConfig::regular(&[10, 10]), 1);
    let p = Problem::homogeneous(net, top_dirichlet(0.0)).unwrap();
    let tg = TimeGrid::new(0.1, 5).unwrap();
    let fine = p.fine(&tg, &LinearSolverConfig::default(), Some(1)).unwrap();
    assert!(fine.snapshots.iter().flatten().all(|&v| v == 0.0));
    let space = CoarseSpace::new(&p.net, &[2, 2]).unwrap();
    let basis = p.basis(&space, &BasisConfig::uniform(3)).unwrap();
    let (_, coarse, _) = multiscale_solve(&basis.projection.r, &p.reduced, &p.u0, &tg, Some(1)).unwrap();
    assert!(coarse.snapshots.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn coarse_matrices_are_galerkin_products() {
    let net = common::poiseuille(&GeneratorConfig::irregular(&[10, 10], 0.2, 3), 3);
    let p = Problem::homogeneous(net, top_dirichlet(1.0)).unwrap();
    let space = CoarseSpace::new(&p.net, &[2, 2]).unwrap();
    let basis = p.basis(&space, &BasisConfig::uniform(3)).unwrap();
    let r = basis.projection.r.to_dense();
    let sys = galerkin_project(&basis.projection.r, &p.reduced.c_free, &p.reduced.l_free, &p.reduced.effective_rhs())
        .unwrap();
    let c: DMatrix<f64> = &r * p.reduced.c_free.to_dense() * r.transpose();
    let l: DMatrix<f64> = &r * p.reduced.l_free.to_dense() * r.transpose();
    let f = &r * DVector::from_vec(p.reduced.effective_rhs());
    assert!((sys.c_h.to_dense() - c).amax() <= 1e-12);
    assert!((sys.l_h.to_dense() - l).amax() <= 1e-12);
    assert!((DVector::from_vec(sys.f_h.clone()) - f).amax() <= 1e-12);
    assert!(sys.c_h.is_symmetric() && sys.l_h.is_symmetric());
}
