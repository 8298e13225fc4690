mod common;

use gmsnet::coarse::CoarseSpace;
use gmsnet::generate::GeneratorConfig;
use gmsnet::metrics::{cell_average, CellAverage};
use gmsnet::netcore::{BoundarySpec, Network};
use gmsnet::pipeline::Problem;
use gmsnet::solve::{LinearSolverConfig, TimeGrid};
use gmsnet::upscale::{
    effective_capacity, effective_weight, face_domains, local_flow_solve, prolong_piecewise_constant, upscale,
    UpscaleConfig,
};

fn model_for(net: &Network, cells: &[usize], bc: &BoundarySpec) -> gmsnet::upscale::UpscaledModel {
    let space = CoarseSpace::new(net, cells).unwrap();
    upscale(net, &space.grid, &space.assignment, bc, &UpscaleConfig::default()).unwrap()
}

#[test]
fn chain_face_weight_matches_hand_computation() {
    let net = common::chain(5, 2.0);
    let space = CoarseSpace::new(&net, &[2, 2]).unwrap();
    let cfg = UpscaleConfig::default();
    let mut faces = face_domains(&space.grid, &space.assignment, &net, &cfg);
    assert_eq!(faces.len(), 4);
    faces.retain(|f| f.nodes.len() == 5);
    assert_eq!(faces.len(), 1);
    assert_eq!(faces[0].nodes, vec![0, 1, 2, 3, 4]);
    assert_eq!((faces[0].inflow.as_slice(), faces[0].outflow.as_slice()), (&[0][..], &[4][..]));
    let flow = local_flow_solve(&faces[0], &net, &net.adjacency(), cfg.rtol).unwrap();
    let expected = [1.0, 0.75, 0.5, 0.25, 0.0];
    for (v, e) in flow.values.iter().zip(expected) {
        assert!((v.unwrap() - e).abs() < 1e-12);
    }
    let w = effective_weight(&faces[0], &flow, &space.assignment, &net, CellAverage::Capacity).unwrap();
    assert!((w - 0.8).abs() < 1e-12, "w̄ = {w}");
}

#[test]
fn homogeneous_lattice_faces_share_one_weight_per_orientation() {
    let net = common::homogeneous(&GeneratorConfig::regular(&[40, 40]));
    let model = model_for(&net, &[4, 4], &BoundarySpec::new());
    assert_eq!(model.faces.len(), 2 * 4 * 3);
    let all: Vec<f64> = model.faces.iter().map(|f| f.weight).collect();
    let (lo, hi) = all.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &w| (a.min(w), b.max(w)));
    assert!(lo > 0.0);
    assert!((hi - lo) / hi <= 1e-10, "spread {}", (hi - lo) / hi);
}

#[test]
fn face_weights_scale_linearly_with_fine_weights() {
    let net = common::poiseuille(&GeneratorConfig::regular(&[30, 30]), 12);
    let base = model_for(&net, &[3, 3], &BoundarySpec::new());
    for s in [4.0, 3.0, 0.1] {
        let mut scaled = net.clone();
        scaled.edges.iter_mut().for_each(|e| e.weight *= s);
        let m = model_for(&scaled, &[3, 3], &BoundarySpec::new());
        for (a, b) in base.faces.iter().zip(&m.faces) {
            assert!(a.solvable && b.solvable);
            assert!((b.weight - s * a.weight).abs() <= 1e-12 * s * a.weight, "s = {s}: {:e}", (b.weight - s * a.weight).abs() / (s * a.weight));
        }
    }
}

#[test]
fn cell_capacities_partition_the_total() {
    let net = common::poiseuille(&GeneratorConfig::unstructured(2, 700, 6, 4), 4);
    let space = CoarseSpace::new(&net, &[5, 5]).unwrap();
    let cbar = effective_capacity(&space.assignment, &net);
    for (c, members) in cbar.iter().zip(&space.assignment.members) {
        let direct: f64 = members.iter().map(|&v| net.nodes[v].capacity).sum();
        assert_eq!(*c, direct);
    }
    let total: f64 = net.capacities().iter().sum();
    let sum: f64 = cbar.iter().sum();
    assert!((sum - total).abs() <= 1e-14 * total);
}

#[test]
fn steady_coarse_state_is_linear_between_dirichlet_faces() {
    let net = common::homogeneous(&GeneratorConfig::regular(&[40, 40]));
    let bc = BoundarySpec::new().with("top", 1.0).with("bottom", 0.0);
    let p = Problem::homogeneous(net, bc).unwrap();
    let tg = TimeGrid::new(1e8, 3).unwrap();
    let run = p.upscaled(&[4, 4], &UpscaleConfig::default(), &tg, None).unwrap();
    let fine = p.fine(&tg, &LinearSolverConfig::default(), None).unwrap();
    let exact = cell_average(&fine.last, &run.space.assignment, &p.net, CellAverage::Capacity);
    let ubar = &run.cells.last;
    for (c, e) in ubar.iter().zip(&exact) {
        assert!((c - e.unwrap()).abs() < 1e-8, "{c} vs {e:?}");
    }
    // Rows of cells are constant and equally spaced in value.
    let layer = |j: usize| ubar[j * 4];
    let step = layer(1) - layer(0);
    for j in 0..4 {
        for i in 0..4 {
            assert!((ubar[j * 4 + i] - layer(j)).abs() < 1e-8);
        }
        if j > 0 {
            assert!((layer(j) - layer(j - 1) - step).abs() < 1e-8);
        }
    }
}

#[test]
fn prolongation_is_inverted_by_cell_averaging() {
    let net = common::poiseuille(&GeneratorConfig::irregular(&[20, 20], 0.2, 2), 2);
    let space = CoarseSpace::new(&net, &[4, 4]).unwrap();
    let ubar: Vec<f64> = (0..16).map(|c| c as f64 * 0.37 - 1.0).collect();
    let fine = prolong_piecewise_constant(&ubar, &space.assignment);
    for mode in [CellAverage::Capacity, CellAverage::Unweighted] {
        let back = cell_average(&fine, &space.assignment, &net, mode);
        for (c, b) in back.iter().enumerate() {
            if let Some(b) = b {
                assert!((b - ubar[c]).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn zero_data_stays_zero_on_the_cell_network() {
    let net = common::homogeneous(&GeneratorConfig::regular(&[20, 20]));
    let p = Problem::homogeneous(net, BoundarySpec::new().with("top", 0.0)).unwrap();
    let run = p
        .upscaled(&[4, 4], &UpscaleConfig::default(), &TimeGrid::new(0.5, 4).unwrap(), Some(1))
        .unwrap();
    assert!(run.cells.snapshots.iter().flatten().all(|&v| v == 0.0));
}
