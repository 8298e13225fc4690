//! TOML run configuration. Every field is optional; command-line flags take
//! precedence over file values, which take precedence over defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use gmsnet::generate::{ContrastBox, FieldMode, PropertyMode, ThroatRule};
use gmsnet::metrics::CellAverage;
use gmsnet::solve::SolverMethod;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub properties: PropertiesSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub coarse: CoarseSection,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub upscale: UpscaleSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub family: Option<String>,
    pub dims: Option<Vec<usize>>,
    #[serde(rename = "box")]
    pub box_lengths: Option<Vec<f64>>,
    pub dim: Option<usize>,
    pub points: Option<usize>,
    pub knn: Option<usize>,
    pub removal_prob: Option<f64>,
    pub label_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesSection {
    pub mode: Option<PropertyMode>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub throat_rule: Option<ThroatRule>,
    pub viscosity: Option<f64>,
    pub d_in: Option<f64>,
    pub d_out: Option<f64>,
    pub boxes: Option<Vec<ContrastBox>>,
    pub field: Option<String>,
    pub field_mode: Option<FieldMode>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    /// Dirichlet value per face label.
    pub dirichlet: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub source: Option<f64>,
    pub u0: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub tau: Option<f64>,
    pub t_final: Option<f64>,
    pub steps: Option<usize>,
    pub save_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseSection {
    pub grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub m: Option<usize>,
    pub full: Option<bool>,
    /// Patch index (as a string key) to eigenfunction count.
    pub overrides: Option<BTreeMap<String, usize>>,
    pub dense_limit: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub method: Option<SolverMethod>,
    pub rtol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpscaleSection {
    pub delta_fraction: Option<f64>,
    pub average: Option<CellAverage>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Parses `label=value` pairs.
pub fn parse_assignments(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let Some((k, v)) = item.split_once('=') else {
            bail!("expected label=value, got {item:?}");
        };
        let v: f64 = v.trim().parse().with_context(|| format!("invalid value in {item:?}"))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// Parses `patch=count` pairs.
pub fn parse_overrides(items: &[String]) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for item in items {
        let Some((k, v)) = item.split_once('=') else {
            bail!("expected patch=count, got {item:?}");
        };
        out.insert(
            k.trim().parse().with_context(|| format!("invalid patch in {item:?}"))?,
            v.trim().parse().with_context(|| format!("invalid count in {item:?}"))?,
        );
    }
    Ok(out)
}

/// Parses `lo1,lo2[,lo3]:hi1,hi2[,hi3]`.
pub fn parse_box(item: &str) -> Result<ContrastBox> {
    let Some((lo, hi)) = item.split_once(':') else {
        bail!("expected lo:hi corners, got {item:?}");
    };
    let parse = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("invalid coordinate in {item:?}")))
            .collect()
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo.len() != hi.len() {
        bail!("box corners differ in dimension: {item:?}");
    }
    Ok(ContrastBox { lo, hi })
}
