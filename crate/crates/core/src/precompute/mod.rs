//! Propagate-then-update pre-computation.
//!
//! States start at the raw features. Each iteration collects every scheme
//! relation for every vertex type from the previous states, archives the
//! target type's collections, then squashes each type's collections into
//! its next state.

mod archive;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use archive::{load_groups, save_groups, ArchiveHeader, GroupEntry, ARCHIVE_MAGIC, ARCHIVE_VERSION};

use crate::error::{Error, Result};
use crate::hetgraph::HeteroGraph;
use crate::propagation::collect_all;
use crate::relations::{scheme_relations, Parity, Relation, Scheme};
use crate::seed::hex_digest;
use crate::squashing::{squash, RpConfig};

pub const DEFAULT_RELATION_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecomputeConfig {
    pub iterations: usize,
    pub scheme: Scheme,
    pub rp: RpConfig,
    pub target: String,
    /// Upper bound on relations collected per vertex type; `None` disables it.
    #[serde(default)]
    pub relation_cap: Option<usize>,
}

impl PrecomputeConfig {
    pub fn new(target: &str, scheme: Scheme, iterations: usize) -> Self {
        Self {
            iterations,
            scheme,
            rp: RpConfig::default(),
            target: target.to_string(),
            relation_cap: Some(DEFAULT_RELATION_CAP),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        self.rp.validate()
    }
}

/// One relation's target collections across iterations; `slabs[k - 1]` was
/// collected at iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTensor {
    /// Canonical relation string.
    pub relation: String,
    pub parity: Parity,
    pub slabs: Vec<Array2<f32>>,
}

impl GroupTensor {
    pub fn rows(&self) -> usize {
        self.slabs.first().map_or(0, |s| s.nrows())
    }

    pub fn dim(&self) -> usize {
        self.slabs.first().map_or(0, |s| s.ncols())
    }

    pub fn iterations(&self) -> usize {
        self.slabs.len()
    }
}

/// Hash over vertex types (name, count) and edge types (src, name, dst, nnz).
pub fn schema_hash(g: &HeteroGraph) -> String {
    let mut desc = String::new();
    for vt in g.vertex_types() {
        desc.push_str(&format!("v:{}:{};", vt.name, vt.count));
    }
    for e in g.edge_type_ids() {
        desc.push_str(&format!("e:{}:{};", g.render_edge(e), g.adjacency(e).nnz()));
    }
    hex_digest(desc.as_bytes())
}

/// Relation sets for every vertex type, enforcing the configured cap.
pub fn relation_sets(g: &HeteroGraph, cfg: &PrecomputeConfig) -> Result<Vec<Vec<Relation>>> {
    let sets: Vec<Vec<Relation>> = g
        .vertex_type_ids()
        .map(|vt| scheme_relations(g, cfg.scheme, vt))
        .collect::<Result<_>>()?;
    if let Some(cap) = cfg.relation_cap {
        for (vt, set) in g.vertex_type_ids().zip(&sets) {
            if set.len() > cap {
                return Err(Error::RelationCapExceeded {
                    scheme: cfg.scheme.to_string(),
                    vertex_type: g.vertex_type(vt).name.clone(),
                    count: set.len(),
                    cap,
                });
            }
        }
    }
    Ok(sets)
}

/// Target collections of one iteration, in group order.
type Archived = Vec<Array2<f32>>;

pub fn run_precompute(g: &HeteroGraph, cfg: &PrecomputeConfig) -> Result<Vec<GroupTensor>> {
    cfg.validate()?;
    let target = g.vertex_type_id(&cfg.target)?;
    let sets = relation_sets(g, cfg)?;
    let mut states = g.raw_states()?;

    let mut groups: Vec<GroupTensor> = sets[target.0]
        .iter()
        .map(|r| GroupTensor {
            relation: r.key().to_string(),
            parity: r.parity(),
            slabs: Vec::with_capacity(cfg.iterations),
        })
        .collect();

    for k in 1..=cfg.iterations {
        let results: Vec<(Option<Archived>, Array2<f32>)> = g
            .vertex_type_ids()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|vt| {
                let collected = collect_all(g, &states, &sets[vt.0])?;
                let rows = g.vertex_type(vt).count;
                let dim = states[vt.0].ncols();
                let squashed = squash(&collected, rows, dim, &cfg.rp, k)?;
                if squashed.empty {
                    log::warn!(
                        "`{}` has no incoming relations; its state is zero from iteration {k}",
                        g.vertex_type(vt).name
                    );
                }
                let archived = (vt == target).then(|| collected.into_iter().map(|c| c.matrix).collect());
                Ok((archived, squashed.state))
            })
            .collect::<Result<_>>()?;

        let mut next = Vec::with_capacity(results.len());
        for (archived, state) in results {
            if let Some(mats) = archived {
                for (group, m) in groups.iter_mut().zip(mats) {
                    group.slabs.push(m);
                }
            }
            next.push(state);
        }
        states = next;
    }
    Ok(groups)
}
