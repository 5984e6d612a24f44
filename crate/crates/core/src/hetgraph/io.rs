//! Graph directory format.
//!
//! ```text
//! graph.json       manifest: vertex types, edge types, optional target/classes
//! <edges file>     little-endian u32 (src, dst) pairs, one file per edge type
//! <feature file>   u32 rows, u32 cols, then row-major little-endian f32
//! labels.bin       one u32 class id per target vertex, 0xFFFFFFFF = unlabeled
//! split.json       {"train": [...], "valid": [...], "test": [...]}
//! ```
//!
//! Vertex types without a feature file receive seeded random embeddings of
//! their declared `feature_dim` when loaded.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{build_graph, EdgeSpec, HeteroGraph};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub const MANIFEST_FILE: &str = "graph.json";
pub const LABELS_FILE: &str = "labels.bin";
pub const SPLIT_FILE: &str = "split.json";
pub const UNLABELED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexTypeEntry {
    pub name: String,
    pub count: usize,
    pub feature_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTypeEntry {
    pub src: String,
    pub name: String,
    pub dst: String,
    pub edges: String,
    #[serde(default)]
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphManifest {
    pub vertex_types: Vec<VertexTypeEntry>,
    pub edge_types: Vec<EdgeTypeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Rejects overlapping index sets.
    pub fn validate(&self, rows: usize) -> Result<()> {
        let mut seen = vec![false; rows];
        for &i in self.train.iter().chain(&self.valid).chain(&self.test) {
            if i >= rows {
                return Err(Error::Config(format!("split index {i} out of range ({rows} rows)")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Config(format!("split index {i} appears twice")));
            }
        }
        Ok(())
    }
}

/// A loaded graph directory.
#[derive(Debug, Clone)]
pub struct GraphDataset {
    pub manifest: GraphManifest,
    pub graph: HeteroGraph,
    pub labels: Option<Vec<u32>>,
    pub split: Option<Split>,
}

pub fn read_edges(path: &Path) -> Result<Vec<(u32, u32)>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "{}: edge file length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            (
                u32::from_le_bytes(c[0..4].try_into().unwrap()),
                u32::from_le_bytes(c[4..8].try_into().unwrap()),
            )
        })
        .collect())
}

pub fn write_edges(path: &Path, pairs: &[(u32, u32)]) -> Result<()> {
    let mut out = Vec::with_capacity(pairs.len() * 8);
    for &(s, d) in pairs {
        out.extend_from_slice(&s.to_le_bytes());
        out.extend_from_slice(&d.to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<Array2<f32>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::Format(format!("{}: truncated feature header", path.display())));
    }
    let rows = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != rows * cols * 4 {
        return Err(Error::Format(format!(
            "{}: header declares {rows}x{cols} but body has {} bytes",
            path.display(),
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Array2::from_shape_vec((rows, cols), data).expect("length checked"))
}

pub fn write_features(path: &Path, m: &Array2<f32>) -> Result<()> {
    let mut out = Vec::with_capacity(8 + m.len() * 4);
    out.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<u32>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Format(format!("{}: length not a multiple of 4", path.display())));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_labels(path: &Path, labels: &[u32]) -> Result<()> {
    let out: Vec<u8> = labels.iter().flat_map(|l| l.to_le_bytes()).collect();
    fs::write(path, out)?;
    Ok(())
}

/// Loads a graph directory. `embedding_seed` seeds random embeddings for
/// featureless vertex types; each type's seed is derived from it and the
/// type name.
pub fn load_graph_dir(dir: &Path, embedding_seed: u64) -> Result<GraphDataset> {
    let manifest: GraphManifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)
        .map_err(|e| Error::Format(format!("{MANIFEST_FILE}: {e}")))?;

    let vts: Vec<(&str, usize)> = manifest
        .vertex_types
        .iter()
        .map(|v| (v.name.as_str(), v.count))
        .collect();
    let mut specs = Vec::with_capacity(manifest.edge_types.len());
    for e in &manifest.edge_types {
        specs.push(EdgeSpec {
            src: e.src.clone(),
            name: e.name.clone(),
            dst: e.dst.clone(),
            pairs: read_edges(&dir.join(&e.edges))?,
            symmetric: e.symmetric,
        });
    }
    let mut graph = build_graph(&vts, specs)?;

    for (i, v) in manifest.vertex_types.iter().enumerate() {
        let vt = super::VertexTypeId(i);
        match &v.features {
            Some(file) => {
                let m = read_features(&dir.join(file))?;
                if m.ncols() != v.feature_dim {
                    return Err(Error::Format(format!(
                        "{file}: {} columns but manifest declares feature_dim {}",
                        m.ncols(),
                        v.feature_dim
                    )));
                }
                graph.attach_features(vt, m)?;
            }
            None => {
                let seed = derive_seed(embedding_seed, &[b"embedding", v.name.as_bytes()]);
                graph.attach_random_embeddings(vt, v.feature_dim, seed)?;
            }
        }
    }

    let labels = match dir.join(LABELS_FILE) {
        p if p.exists() => Some(read_labels(&p)?),
        _ => None,
    };
    if let (Some(labels), Some(target)) = (&labels, &manifest.target) {
        let count = graph.vertex_type(graph.vertex_type_id(target)?).count;
        if labels.len() != count {
            return Err(Error::Format(format!(
                "{LABELS_FILE}: {} labels for {count} `{target}` vertices",
                labels.len()
            )));
        }
    }
    let split = match dir.join(SPLIT_FILE) {
        p if p.exists() => Some(
            serde_json::from_slice(&fs::read(&p)?)
                .map_err(|e| Error::Format(format!("{SPLIT_FILE}: {e}")))?,
        ),
        _ => None,
    };

    Ok(GraphDataset {
        manifest,
        graph,
        labels,
        split,
    })
}

/// Writes a manifest plus its edge and feature payloads.
///
/// `edges[i]` and `features[i]` align with the manifest entries; a `None`
/// feature entry must correspond to a manifest entry without a file name.
pub fn write_graph_dir(
    dir: &Path,
    manifest: &GraphManifest,
    edges: &[Vec<(u32, u32)>],
    features: &[Option<Array2<f32>>],
    labels: Option<&[u32]>,
    split: Option<&Split>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_vec_pretty(manifest)?)?;
    for (entry, pairs) in manifest.edge_types.iter().zip(edges) {
        write_edges(&dir.join(&entry.edges), pairs)?;
    }
    for (entry, feats) in manifest.vertex_types.iter().zip(features) {
        if let (Some(file), Some(m)) = (&entry.features, feats) {
            write_features(&dir.join(file), m)?;
        }
    }
    if let Some(labels) = labels {
        write_labels(&dir.join(LABELS_FILE), labels)?;
    }
    if let Some(split) = split {
        fs::write(dir.join(SPLIT_FILE), serde_json::to_vec_pretty(split)?)?;
    }
    Ok(())
}
