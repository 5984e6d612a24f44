//! Planted-signal heterogeneous datasets.
//!
//! Papers carry labels and weakly informative features. Authors and venues
//! are featureless and class-homophilous: a paper picks same-class authors
//! (and venues) with probability proportional to `signal`, so two-hop paths
//! paper → author → paper mostly connect papers of the same class. Fields
//! have random features and no class structure. With `signal = 0` nothing in
//! the graph depends on the labels.

use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hetgraph::io::{write_graph_dir, EdgeTypeEntry, GraphManifest, Split, VertexTypeEntry};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub papers: usize,
    pub authors: usize,
    pub fields: usize,
    pub venues: usize,
    pub classes: usize,
    pub feature_dim: usize,
    pub authors_per_paper: usize,
    pub fields_per_paper: usize,
    /// In `[0, 1]`; scales both homophily and the class offset in paper
    /// features.
    pub signal: f64,
    /// Norm of the class offset in paper features at full signal.
    pub feature_separation: f64,
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            papers: 2000,
            authors: 400,
            fields: 40,
            venues: 20,
            classes: 5,
            feature_dim: 32,
            authors_per_paper: 3,
            fields_per_paper: 2,
            signal: 1.0,
            feature_separation: 1.0,
            train_fraction: 0.5,
            valid_fraction: 0.2,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.signal) {
            return Err(Error::Config(format!("signal must lie in [0, 1], got {}", self.signal)));
        }
        if self.classes < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        if self.authors < self.classes || self.venues < self.classes {
            return Err(Error::Config("need at least one author and venue per class".into()));
        }
        if self.papers == 0 || self.fields == 0 || self.feature_dim == 0 {
            return Err(Error::Config("papers, fields and feature_dim must be positive".into()));
        }
        if self.authors_per_paper == 0 || self.authors_per_paper > self.authors / self.classes {
            return Err(Error::Config("authors_per_paper must fit in one class's author pool".into()));
        }
        if self.fields_per_paper == 0 || self.fields_per_paper > self.fields {
            return Err(Error::Config("fields_per_paper must lie in [1, fields]".into()));
        }
        let f = self.train_fraction + self.valid_fraction;
        if self.train_fraction <= 0.0 || self.valid_fraction < 0.0 || f >= 1.0 {
            return Err(Error::Config("split fractions must leave a nonempty test split".into()));
        }
        Ok(())
    }
}

pub struct SynthDataset {
    pub manifest: GraphManifest,
    pub edges: Vec<Vec<(u32, u32)>>,
    pub features: Vec<Option<Array2<f32>>>,
    pub labels: Vec<u32>,
    pub split: Split,
}

impl SynthDataset {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_graph_dir(
            dir,
            &self.manifest,
            &self.edges,
            &self.features,
            Some(&self.labels),
            Some(&self.split),
        )
    }
}

fn rng_for(cfg: &SynthConfig, stream: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[b"synth", stream.as_bytes()]))
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f32> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

/// Indices owned by `class` when `n` entities are split evenly across classes.
fn pool(n: usize, classes: usize, class: usize) -> std::ops::Range<usize> {
    let size = n / classes;
    class * size..(class + 1) * size
}

/// `count` distinct members, each drawn from `class`'s pool with
/// probability `homophily` and from the whole range otherwise.
fn pick(rng: &mut ChaCha8Rng, n: usize, classes: usize, class: usize, homophily: f64, count: usize) -> Vec<u32> {
    let mut chosen: Vec<u32> = Vec::with_capacity(count);
    while chosen.len() < count {
        let candidate = if rng.random::<f64>() < homophily {
            rng.random_range(pool(n, classes, class))
        } else {
            rng.random_range(0..n)
        } as u32;
        if !chosen.contains(&candidate) {
            chosen.push(candidate);
        }
    }
    chosen
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let n = cfg.papers;
    let mut labels: Vec<u32> = (0..n).map(|i| (i % cfg.classes) as u32).collect();
    labels.shuffle(&mut rng_for(cfg, "labels"));

    let mut frng = rng_for(cfg, "features");
    let mut centroids = gaussian(&mut frng, cfg.classes, cfg.feature_dim);
    for mut row in centroids.rows_mut() {
        let norm = row.iter().map(|v| v * v).sum::<f32>().sqrt();
        row.mapv_inplace(|v| v / norm * (cfg.feature_separation * cfg.signal) as f32);
    }
    let mut paper_x = gaussian(&mut frng, n, cfg.feature_dim);
    for (mut row, &y) in paper_x.rows_mut().into_iter().zip(&labels) {
        row += &centroids.row(y as usize);
    }
    let field_x = gaussian(&mut frng, cfg.fields, cfg.feature_dim);

    let mut grng = rng_for(cfg, "edges");
    let homophily = 0.9 * cfg.signal;
    let (mut writes, mut covers, mut publishes) = (Vec::new(), Vec::new(), Vec::new());
    for (p, &y) in labels.iter().enumerate() {
        let p = p as u32;
        let y = y as usize;
        for a in pick(&mut grng, cfg.authors, cfg.classes, y, homophily, cfg.authors_per_paper) {
            writes.push((a, p));
        }
        for f in pick(&mut grng, cfg.fields, 1, 0, 0.0, cfg.fields_per_paper) {
            covers.push((f, p));
        }
        for v in pick(&mut grng, cfg.venues, cfg.classes, y, 0.5 * homophily, 1) {
            publishes.push((v, p));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(cfg, "split"));
    let n_train = (cfg.train_fraction * n as f64).round() as usize;
    let n_valid = (cfg.valid_fraction * n as f64).round() as usize;
    let mut split = Split {
        train: order[..n_train].to_vec(),
        valid: order[n_train..n_train + n_valid].to_vec(),
        test: order[n_train + n_valid..].to_vec(),
    };
    split.train.sort_unstable();
    split.valid.sort_unstable();
    split.test.sort_unstable();

    let vt = |name: &str, count: usize, features: bool| VertexTypeEntry {
        name: name.into(),
        count,
        feature_dim: cfg.feature_dim,
        features: features.then(|| format!("{name}.feat")),
    };
    let et = |src: &str, name: &str| EdgeTypeEntry {
        src: src.into(),
        name: name.into(),
        dst: "paper".into(),
        edges: format!("{name}.edges"),
        symmetric: false,
    };
    let manifest = GraphManifest {
        vertex_types: vec![
            vt("paper", n, true),
            vt("author", cfg.authors, false),
            vt("field", cfg.fields, true),
            vt("venue", cfg.venues, false),
        ],
        edge_types: vec![et("author", "writes"), et("field", "covers"), et("venue", "publishes")],
        target: Some("paper".into()),
        num_classes: Some(cfg.classes),
    };
    Ok(SynthDataset {
        manifest,
        edges: vec![writes, covers, publishes],
        features: vec![Some(paper_x), None, Some(field_x), None],
        labels,
        split,
    })
}

/// The four-type academic toy graph: papers `p` cite each other
/// (symmetric), authors `a` write papers, papers have fields `f`, authors
/// belong to institutes `i`. Papers carry 4-dimensional features and
/// labels over two classes; the other types are featureless.
pub fn academic_toy() -> SynthDataset {
    let vt = |name: &str, count: usize, dim: usize, features: bool| VertexTypeEntry {
        name: name.into(),
        count,
        feature_dim: dim,
        features: features.then(|| format!("{name}.feat")),
    };
    let et = |src: &str, name: &str, dst: &str, symmetric: bool| EdgeTypeEntry {
        src: src.into(),
        name: name.into(),
        dst: dst.into(),
        edges: format!("{name}.edges"),
        symmetric,
    };
    let manifest = GraphManifest {
        vertex_types: vec![vt("p", 4, 4, true), vt("f", 2, 3, false), vt("a", 3, 3, false), vt("i", 2, 2, false)],
        edge_types: vec![
            et("p", "cite", "p", true),
            et("a", "write", "p", false),
            et("p", "has_field", "f", false),
            et("i", "affiliated", "a", false),
        ],
        target: Some("p".into()),
        num_classes: Some(2),
    };
    let paper_x = Array2::from_shape_fn((4, 4), |(i, j)| if i == j { 1.0 } else { 0.1 * (i + j) as f32 });
    SynthDataset {
        manifest,
        edges: vec![
            vec![(0, 1), (1, 2), (2, 3)],
            vec![(0, 0), (0, 1), (1, 1), (2, 2), (2, 3)],
            vec![(0, 0), (1, 0), (2, 1), (3, 1)],
            vec![(0, 0), (0, 1), (1, 2)],
        ],
        features: vec![Some(paper_x), None, None, None],
        labels: vec![0, 0, 1, 1],
        split: Split {
            train: vec![0, 2],
            valid: vec![1],
            test: vec![3],
        },
    }
}
