//! Network families (regular lattice, thinned lattice, k-nearest-neighbor
//! geometric graph), coefficient assignment and boundary labels.
//!
//! All randomness comes from seeded ChaCha streams, so a configuration fully
//! determines its network.

mod lattice;
mod properties;
mod unstructured;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::Network;

pub use lattice::{lattice_edge_count, lattice_spacing};
pub use properties::{
    assign_high_contrast, assign_poiseuille, harmonic_mean, load_coefficient_field, poiseuille_conductance,
    sphere_volume, ContrastBox, FieldMode, PropertyConfig, PropertyMode, RasterField, ThroatRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    StructuredRegular,
    StructuredIrregular,
    Unstructured,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::StructuredRegular => "structured_regular",
            Family::StructuredIrregular => "structured_irregular",
            Family::Unstructured => "unstructured",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub family: Family,
    pub box_lengths: Vec<f64>,
    /// Lattice nodes per axis (lattice families).
    pub shape: Vec<usize>,
    /// Point count (unstructured family).
    pub points: usize,
    pub removal_prob: f64,
    pub knn: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn regular(shape: &[usize]) -> Self {
        Self {
            family: Family::StructuredRegular,
            box_lengths: vec![1.0; shape.len()],
            shape: shape.to_vec(),
            points: 0,
            removal_prob: 0.0,
            knn: 0,
            seed: 0,
        }
    }

    pub fn irregular(shape: &[usize], removal_prob: f64, seed: u64) -> Self {
        Self {
            family: Family::StructuredIrregular,
            removal_prob,
            seed,
            ..Self::regular(shape)
        }
    }

    pub fn unstructured(dim: usize, points: usize, knn: usize, seed: u64) -> Self {
        Self {
            family: Family::Unstructured,
            box_lengths: vec![1.0; dim],
            shape: Vec::new(),
            points,
            removal_prob: 0.0,
            knn,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.box_lengths.len()
    }
}

fn topology_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficient stream, independent of the topology stream for the same seed.
pub(crate) fn property_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn finish(net: Network) -> Result<Network> {
    net.validate()?;
    net.check_connected()?;
    Ok(net)
}

pub fn gen_structured_regular(cfg: &GeneratorConfig) -> Result<Network> {
    finish(lattice::regular_lattice(&cfg.box_lengths, &cfg.shape)?)
}

/// Lattice with independent edge removals, then node removals, then the
/// largest connected component.
pub fn gen_structured_irregular(cfg: &GeneratorConfig) -> Result<Network> {
    let base = lattice::regular_lattice(&cfg.box_lengths, &cfg.shape)?;
    let mut rng = topology_rng(cfg.seed);
    finish(lattice::thin_lattice(base, cfg.removal_prob, &mut rng)?)
}

/// Symmetrized kNN graph over uniform random points, largest component kept.
pub fn gen_unstructured(cfg: &GeneratorConfig) -> Result<Network> {
    let dim = cfg.dim();
    if dim != 2 && dim != 3 {
        return Err(Error::Config(format!("dimension {dim} not in {{2, 3}}")));
    }
    if cfg.points < 8 || cfg.knn < 4 {
        return Err(Error::Config(format!(
            "unstructured networks need at least 8 points and knn ≥ 4 (got {} and {})",
            cfg.points, cfg.knn
        )));
    }
    let mut rng = topology_rng(cfg.seed);
    let points = unstructured::random_points(&cfg.box_lengths, cfg.points, &mut rng)?;
    let net = unstructured::knn_graph(&cfg.box_lengths, points, cfg.knn)?;
    finish(net.largest_component())
}

pub fn generate(cfg: &GeneratorConfig) -> Result<Network> {
    match cfg.family {
        Family::StructuredRegular => gen_structured_regular(cfg),
        Family::StructuredIrregular => gen_structured_irregular(cfg),
        Family::Unstructured => gen_unstructured(cfg),
    }
}

/// Face label names per axis, `(lower, upper)`. The last axis is always
/// bottom/top.
pub fn face_labels(dim: usize) -> Vec<(&'static str, &'static str)> {
    if dim == 3 {
        vec![("left", "right"), ("front", "back"), ("bottom", "top")]
    } else {
        vec![("left", "right"), ("bottom", "top")]
    }
}

/// Labels nodes within `tol` of each box face. Returns the labels that no node
/// received.
pub fn label_boundaries(net: &mut Network, tol: f64) -> Result<Vec<String>> {
    let tols = vec![tol; net.dim];
    label_boundaries_per_axis(net, &tols)
}

/// Like [`label_boundaries`] with a separate tolerance per axis.
pub fn label_boundaries_per_axis(net: &mut Network, tols: &[f64]) -> Result<Vec<String>> {
    if tols.len() != net.dim {
        return Err(Error::Dimension(format!("{} label tolerances for dimension {}", tols.len(), net.dim)));
    }
    if let Some(t) = tols.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(Error::Config(format!("label tolerance {t} must be positive")));
    }
    let faces = face_labels(net.dim);
    let mut hit = vec![[false; 2]; net.dim];
    for node in &mut net.nodes {
        for (k, (lo, hi)) in faces.iter().enumerate() {
            if node.coords[k] <= tols[k] {
                node.labels.insert((*lo).to_string());
                hit[k][0] = true;
            }
            if node.coords[k] >= net.box_lengths[k] - tols[k] {
                node.labels.insert((*hi).to_string());
                hit[k][1] = true;
            }
        }
    }
    let mut empty = Vec::new();
    for (k, (lo, hi)) in faces.iter().enumerate() {
        for (side, name) in [(0, lo), (1, hi)] {
            if !hit[k][side] {
                warn!("no node within {} of face {name:?}", tols[k]);
                empty.push((*name).to_string());
            }
        }
    }
    Ok(empty)
}

/// Mean node spacing `(|Ω| / N)^(1/d)`.
pub fn spacing_estimate(net: &Network) -> f64 {
    let vol: f64 = net.box_lengths.iter().product();
    (vol / net.n_nodes().max(1) as f64).powf(1.0 / net.dim as f64)
}

/// Per-axis boundary-layer tolerance: half the lattice spacing on lattices
/// (exactly one node layer), the mean spacing for point clouds.
pub fn default_label_tol(cfg: &GeneratorConfig, net: &Network) -> Vec<f64> {
    match cfg.family {
        Family::StructuredRegular | Family::StructuredIrregular => lattice_spacing(&cfg.box_lengths, &cfg.shape)
            .iter()
            .map(|h| 0.5 * h * (1.0 + 1e-6))
            .collect(),
        Family::Unstructured => vec![spacing_estimate(net); net.dim],
    }
}

pub fn assign_properties(net: Network, cfg: &PropertyConfig) -> Result<Network> {
    match cfg.mode {
        PropertyMode::PoiseuilleRandom => assign_poiseuille(net, cfg),
        PropertyMode::HighContrast => assign_high_contrast(net, cfg),
        PropertyMode::ExternalField => {
            let path = cfg
                .field_path
                .as_ref()
                .ok_or_else(|| Error::Config("external_field mode needs a field file".into()))?;
            let field = RasterField::parse(std::path::Path::new(path))?;
            load_coefficient_field(net, &field, cfg.field_mode)
        }
    }
}

/// Builds a labeled network with coefficients in one call.
pub fn build_network(gen: &GeneratorConfig, props: &PropertyConfig) -> Result<Network> {
    let net = generate(gen)?;
    let mut net = assign_properties(net, props)?;
    let tol = default_label_tol(gen, &net);
    label_boundaries_per_axis(&mut net, &tol)?;
    Ok(net)
}
