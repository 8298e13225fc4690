//! Heterogeneous coefficients: Hagen-Poiseuille pores and throats,
//! high-contrast subdomains, and raster-sampled fields.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{parse_index, parse_real, read_text};
use crate::netcore::{Network, Point};

/// Pore (sphere) volume `4/3 π R³`.
pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

/// Hagen-Poiseuille conductance of a cylindrical throat, `π R⁴ / (8 μ L)`.
pub fn poiseuille_conductance(radius: f64, viscosity: f64, length: f64) -> f64 {
    PI * radius.powi(4) / (8.0 * viscosity * length)
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThroatRule {
    /// Uniform in `[d_min, min(d_i, d_j)]`.
    RandomUniform,
    /// `2 d_i d_j / (d_i + d_j)`.
    HarmonicOfPores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ContrastBox {
    pub fn contains(&self, p: &Point) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .enumerate()
            .all(|(k, (&lo, &hi))| p[k] >= lo && p[k] <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyMode {
    PoiseuilleRandom,
    HighContrast,
    ExternalField,
}

/// Which raster blocks are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    #[default]
    Both,
    CapacityOnly,
    WeightOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyConfig {
    pub mode: PropertyMode,
    pub d_min: f64,
    pub d_max: f64,
    pub throat_rule: ThroatRule,
    pub viscosity: f64,
    pub boxes: Vec<ContrastBox>,
    pub d_in: f64,
    pub d_out: f64,
    pub field_path: Option<String>,
    pub field_mode: FieldMode,
    pub seed: u64,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            mode: PropertyMode::PoiseuilleRandom,
            d_min: 0.1,
            d_max: 1.0,
            throat_rule: ThroatRule::RandomUniform,
            viscosity: 1.0,
            boxes: Vec::new(),
            d_in: 10.0,
            d_out: 1.0,
            field_path: None,
            field_mode: FieldMode::Both,
            seed: 0,
        }
    }
}

fn throat_length(net: &Network, e: usize) -> Result<f64> {
    let edge = &net.edges[e];
    let floor = 1e-12 * net.box_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let len = net.distance(edge.head, edge.tail).max(floor);
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::Generator(format!("edge {e}: zero throat length")));
    }
    Ok(len)
}

/// Sets `c_i`, `w_ij`, radii and lengths from pore and throat diameters.
fn apply_diameters(net: &mut Network, pore_d: &[f64], throat_d: &[f64], viscosity: f64) -> Result<()> {
    for (node, &d) in net.nodes.iter_mut().zip(pore_d) {
        let r = d / 2.0;
        node.radius = Some(r);
        node.capacity = sphere_volume(r);
    }
    for (e, &d) in throat_d.iter().enumerate() {
        let len = throat_length(net, e)?;
        let r = d / 2.0;
        let edge = &mut net.edges[e];
        edge.length = Some(len);
        edge.radius = Some(r);
        edge.weight = poiseuille_conductance(r, viscosity, len);
    }
    net.validate()
}

fn check_diameters(cfg: &PropertyConfig) -> Result<()> {
    if !(cfg.d_min > 0.0 && cfg.d_max >= cfg.d_min && cfg.viscosity > 0.0) {
        return Err(Error::Config(format!(
            "need 0 < d_min ≤ d_max and μ > 0 (d_min {}, d_max {}, μ {})",
            cfg.d_min, cfg.d_max, cfg.viscosity
        )));
    }
    Ok(())
}

/// Random pore diameters in `[d_min, d_max]` and throats per `throat_rule`.
pub fn assign_poiseuille(mut net: Network, cfg: &PropertyConfig) -> Result<Network> {
    check_diameters(cfg)?;
    let mut rng = super::property_rng(cfg.seed);
    let pore_d: Vec<f64> = (0..net.n_nodes())
        .map(|_| if cfg.d_max > cfg.d_min { rng.gen_range(cfg.d_min..=cfg.d_max) } else { cfg.d_min })
        .collect();
    let throat_d = throat_diameters(&net, &pore_d, cfg, &mut rng);
    apply_diameters(&mut net, &pore_d, &throat_d, cfg.viscosity)?;
    Ok(net)
}

fn throat_diameters(net: &Network, pore_d: &[f64], cfg: &PropertyConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    net.edges
        .iter()
        .map(|e| {
            let (a, b) = (pore_d[e.head], pore_d[e.tail]);
            match cfg.throat_rule {
                ThroatRule::HarmonicOfPores => harmonic_mean(a, b),
                ThroatRule::RandomUniform => {
                    let hi = a.min(b);
                    if hi > cfg.d_min {
                        rng.gen_range(cfg.d_min..=hi)
                    } else {
                        hi
                    }
                }
            }
        })
        .collect()
}

/// Pore diameter `d_in` inside any contrast box and `d_out` elsewhere, with
/// harmonic-mean throats.
pub fn assign_high_contrast(mut net: Network, cfg: &PropertyConfig) -> Result<Network> {
    if !(cfg.d_in > 0.0 && cfg.d_out > 0.0 && cfg.viscosity > 0.0) {
        return Err(Error::Config("contrast diameters and viscosity must be positive".into()));
    }
    for (b, cbox) in cfg.boxes.iter().enumerate() {
        let ok = cbox.lo.len() == net.dim
            && cbox.hi.len() == net.dim
            && (0..net.dim).all(|k| 0.0 <= cbox.lo[k] && cbox.lo[k] <= cbox.hi[k] && cbox.hi[k] <= net.box_lengths[k]);
        if !ok {
            return Err(Error::Config(format!("contrast box {b} is not inside the domain")));
        }
    }
    let pore_d: Vec<f64> = net
        .nodes
        .iter()
        .map(|n| if cfg.boxes.iter().any(|b| b.contains(&n.coords)) { cfg.d_in } else { cfg.d_out })
        .collect();
    let throat_d: Vec<f64> = net
        .edges
        .iter()
        .map(|e| harmonic_mean(pore_d[e.head], pore_d[e.tail]))
        .collect();
    apply_diameters(&mut net, &pore_d, &throat_d, cfg.viscosity)?;
    Ok(net)
}

/// Piecewise-constant raster over the box with `capacity` and `weight_scale`
/// blocks. Values are row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterField {
    pub counts: Vec<usize>,
    pub box_lengths: Vec<f64>,
    pub capacity: Vec<f64>,
    pub weight_scale: Vec<f64>,
}

impl RasterField {
    pub fn parse(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty raster file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let dim = head
            .first()
            .map(|f| parse_index(path, 1, f, "dimension"))
            .transpose()?
            .unwrap_or(0);
        if !(dim == 2 || dim == 3) || head.len() != dim + 1 {
            return Err(Error::parse(path, 1, "expected `dim n1 n2 [n3]`"));
        }
        let counts = head[1..]
            .iter()
            .map(|f| parse_index(path, 1, f, "cell count"))
            .collect::<Result<Vec<_>>>()?;
        if counts.contains(&0) {
            return Err(Error::parse(path, 1, "cell counts must be positive"));
        }
        let (k, box_line) = lines.next().ok_or_else(|| Error::parse(path, 2, "missing box line"))?;
        let box_lengths = box_line
            .split_whitespace()
            .map(|f| parse_real(path, k + 1, f, "box length"))
            .collect::<Result<Vec<_>>>()?;
        if box_lengths.len() != dim {
            return Err(Error::parse(path, k + 1, format!("expected {dim} box lengths")));
        }
        let n_cells: usize = counts.iter().product();
        let values = lines
            .map(|(k, l)| parse_real(path, k + 1, l, "field value"))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 2 * n_cells {
            return Err(Error::Format(format!(
                "{}: expected {} values ({} cells × 2 blocks), found {}",
                path.display(),
                2 * n_cells,
                n_cells,
                values.len()
            )));
        }
        let (capacity, weight_scale) = values.split_at(n_cells);
        Ok(Self {
            counts,
            box_lengths,
            capacity: capacity.to_vec(),
            weight_scale: weight_scale.to_vec(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}", self.counts.len());
        for c in &self.counts {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
        let boxes: Vec<String> = self.box_lengths.iter().map(|&l| crate::io::fmt_real(l)).collect();
        out.push_str(&boxes.join(" "));
        out.push('\n');
        for v in self.capacity.iter().chain(&self.weight_scale) {
            out.push_str(&crate::io::fmt_real(*v));
            out.push('\n');
        }
        out
    }

    /// Cell containing `p` (half-open cells, last cell closed).
    pub fn cell_of(&self, p: &Point) -> Option<usize> {
        let mut flat = 0;
        for (k, (&n, &len)) in self.counts.iter().zip(&self.box_lengths).enumerate() {
            if !(p[k] >= 0.0 && p[k] <= len) {
                return None;
            }
            let idx = ((p[k] / len * n as f64).floor() as usize).min(n - 1);
            flat = flat * n + idx;
        }
        Some(flat)
    }
}

/// Samples a raster at node positions: `c_i` from the capacity block and
/// `w_ij = harmonic(s_i, s_j) · area / length` from the weight-scale block
/// (unit area when the throat has no radius).
pub fn load_coefficient_field(mut net: Network, field: &RasterField, mode: FieldMode) -> Result<Network> {
    if field.counts.len() != net.dim {
        return Err(Error::Config(format!(
            "raster dimension {} differs from network dimension {}",
            field.counts.len(),
            net.dim
        )));
    }
    for (a, b) in field.box_lengths.iter().zip(&net.box_lengths) {
        if (a - b).abs() > 1e-12 * b.abs() {
            return Err(Error::Config(format!(
                "raster box {:?} differs from network box {:?}",
                field.box_lengths, net.box_lengths
            )));
        }
    }
    let cells = net
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            field
                .cell_of(&n.coords)
                .ok_or_else(|| Error::Config(format!("node {i} lies outside the raster")))
        })
        .collect::<Result<Vec<_>>>()?;
    if mode != FieldMode::WeightOnly {
        for (node, &c) in net.nodes.iter_mut().zip(&cells) {
            node.capacity = field.capacity[c];
        }
    }
    if mode != FieldMode::CapacityOnly {
        for e in 0..net.n_edges() {
            let len = match net.edges[e].length {
                Some(l) if l > 0.0 => l,
                _ => throat_length(&net, e)?,
            };
            let edge = &mut net.edges[e];
            let area = edge.radius.map(|r| PI * r * r).unwrap_or(1.0);
            let scale = harmonic_mean(field.weight_scale[cells[edge.head]], field.weight_scale[cells[edge.tail]]);
            edge.length = Some(len);
            edge.weight = scale * area / len;
        }
    }
    net.validate()?;
    Ok(net)
}
