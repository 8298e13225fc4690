//! Network files: `nodes.csv`, `edges.csv` and `meta.json` in one directory.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EdgeRecord, Network, NodeRecord};
use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_index, parse_real, read_text, write_text};

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub dim: usize,
    #[serde(rename = "box")]
    pub box_lengths: Vec<f64>,
    pub generator: String,
    pub seed: Option<u64>,
    pub counts: Counts,
}

fn opt_real(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn nodes_header(dim: usize) -> &'static str {
    if dim == 3 {
        "id,x,y,z,capacity,radius,labels"
    } else {
        "id,x,y,capacity,radius,labels"
    }
}

const EDGES_HEADER: &str = "head,tail,weight,length,radius";

pub fn nodes_csv(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(nodes_header(net.dim));
    out.push('\n');
    for (i, node) in net.nodes.iter().enumerate() {
        out.push_str(&i.to_string());
        for k in 0..net.dim {
            out.push(',');
            out.push_str(&fmt_real(node.coords[k]));
        }
        out.push(',');
        out.push_str(&fmt_real(node.capacity));
        out.push(',');
        out.push_str(&opt_real(node.radius));
        out.push(',');
        out.push_str(&node.labels.iter().cloned().collect::<Vec<_>>().join(";"));
        out.push('\n');
    }
    out
}

pub fn edges_csv(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(EDGES_HEADER);
    out.push('\n');
    for e in &net.edges {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.head,
            e.tail,
            fmt_real(e.weight),
            opt_real(e.length),
            opt_real(e.radius)
        ));
    }
    out
}

/// SHA-256 over the serialized node and edge tables.
pub fn content_hash(nodes_text: &str, edges_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(nodes_text.as_bytes());
    h.update([0u8]);
    h.update(edges_text.as_bytes());
    hex::encode(h.finalize())
}

pub fn network_hash(net: &Network) -> String {
    content_hash(&nodes_csv(net), &edges_csv(net))
}

/// Hash of the files as stored on disk.
pub fn network_dir_hash(dir: &Path) -> Result<String> {
    let nodes = read_text(&dir.join(NODES_FILE))?;
    let edges = read_text(&dir.join(EDGES_FILE))?;
    Ok(content_hash(&nodes, &edges))
}

pub fn write_network(dir: &Path, net: &Network, generator: &str, seed: Option<u64>) -> Result<()> {
    write_text(&dir.join(NODES_FILE), &nodes_csv(net))?;
    write_text(&dir.join(EDGES_FILE), &edges_csv(net))?;
    let meta = NetworkMeta {
        dim: net.dim,
        box_lengths: net.box_lengths.clone(),
        generator: generator.to_string(),
        seed,
        counts: Counts {
            nodes: net.n_nodes(),
            edges: net.n_edges(),
        },
    };
    write_text(&dir.join(META_FILE), &(serde_json::to_string_pretty(&meta)? + "\n"))
}

pub fn read_meta(dir: &Path) -> Result<NetworkMeta> {
    let path = dir.join(META_FILE);
    let text = read_text(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.line(), e.to_string()))
}

fn opt_field(path: &Path, line: usize, field: &str, what: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_real(path, line, field, what).map(Some)
    }
}

pub fn read_network(dir: &Path) -> Result<Network> {
    let meta = read_meta(dir)?;
    let dim = meta.dim;

    let path = dir.join(NODES_FILE);
    let text = read_text(&path)?;
    let mut lines = text.lines();
    if lines.next() != Some(nodes_header(dim)) {
        return Err(Error::parse(&path, 1, format!("expected header `{}`", nodes_header(dim))));
    }
    let mut nodes = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 4 {
            return Err(Error::parse(&path, lineno, format!("expected {} fields", dim + 4)));
        }
        let id = parse_index(&path, lineno, fields[0], "id")?;
        if id != nodes.len() {
            return Err(Error::parse(&path, lineno, format!("expected id {}", nodes.len())));
        }
        let mut coords = [0.0; 3];
        for (c, f) in coords.iter_mut().zip(&fields[1..=dim]) {
            *c = parse_real(&path, lineno, f, "coordinate")?;
        }
        let capacity = parse_real(&path, lineno, fields[dim + 1], "capacity")?;
        let radius = opt_field(&path, lineno, fields[dim + 2], "radius")?;
        let labels: BTreeSet<String> = fields[dim + 3]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        nodes.push(NodeRecord {
            coords,
            capacity,
            radius,
            labels,
        });
    }

    let path = dir.join(EDGES_FILE);
    let text = read_text(&path)?;
    let mut lines = text.lines();
    if lines.next() != Some(EDGES_HEADER) {
        return Err(Error::parse(&path, 1, format!("expected header `{EDGES_HEADER}`")));
    }
    let mut edges = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(&path, lineno, "expected 5 fields"));
        }
        edges.push(EdgeRecord {
            head: parse_index(&path, lineno, fields[0], "head")?,
            tail: parse_index(&path, lineno, fields[1], "tail")?,
            weight: parse_real(&path, lineno, fields[2], "weight")?,
            length: opt_field(&path, lineno, fields[3], "length")?,
            radius: opt_field(&path, lineno, fields[4], "radius")?,
        });
    }
    if nodes.len() != meta.counts.nodes || edges.len() != meta.counts.edges {
        return Err(Error::Format(format!(
            "{}: counts ({}, {}) disagree with tables ({}, {})",
            dir.display(),
            meta.counts.nodes,
            meta.counts.edges,
            nodes.len(),
            edges.len()
        )));
    }
    Network::new(dim, meta.box_lengths, nodes, edges)
}
