//! Symbolic accounting of which relations end up merged into each collected
//! vector, and how many untrainable state updates the information passed
//! through on the way.
//!
//! Every vertex state starts as the empty path (raw features). At iteration
//! `k`, the cell for relation `r` holds every state path of `r.start()` at
//! `k - 1` extended by `r`, and the new state of each type is the union of
//! its cells.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{scheme_relations, Relation, Scheme};
use crate::error::{Error, Result};
use crate::hetgraph::{EdgeTypeId, HeteroGraph, VertexTypeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerCell {
    /// Canonical relation strings merged into this vector, sorted.
    pub relations: Vec<String>,
    /// Vertex-type paths of the same relations, in the same order.
    pub type_paths: Vec<String>,
    /// Untrainable updates applied along the deepest path.
    pub updates: usize,
}

impl LedgerCell {
    pub fn label(&self) -> String {
        if self.updates == 0 {
            "(0,raw)".to_string()
        } else {
            format!("({})", self.updates)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceLedger {
    pub scheme: Scheme,
    pub iterations: usize,
    pub target: String,
    /// Group relations (table columns), canonical order.
    pub groups: Vec<String>,
    pub group_type_paths: Vec<String>,
    /// `cells[k - 1][g]` is group `g` at iteration `k`.
    pub cells: Vec<Vec<LedgerCell>>,
}

type Path = Vec<EdgeTypeId>;

pub fn provenance_ledger(
    g: &HeteroGraph,
    target: VertexTypeId,
    scheme: Scheme,
    iterations: usize,
) -> Result<ProvenanceLedger> {
    if iterations == 0 {
        return Err(Error::Config("ledger needs at least one iteration".into()));
    }
    let per_type: Vec<Vec<Relation>> = g
        .vertex_type_ids()
        .map(|vt| scheme_relations(g, scheme, vt))
        .collect::<Result<_>>()?;

    let mut states: Vec<BTreeSet<Path>> = g.vertex_type_ids().map(|_| BTreeSet::from([Vec::new()])).collect();
    let mut rows = Vec::with_capacity(iterations);
    for k in 1..=iterations {
        let mut next = vec![BTreeSet::new(); states.len()];
        let mut target_cells = Vec::new();
        for vt in g.vertex_type_ids() {
            for rel in &per_type[vt.0] {
                let cell: BTreeSet<Path> = states[rel.start().0]
                    .iter()
                    .map(|prefix| prefix.iter().chain(rel.edges()).copied().collect())
                    .collect();
                next[vt.0].extend(cell.iter().cloned());
                if vt == target {
                    target_cells.push(render_cell(g, &cell, k - 1)?);
                }
            }
        }
        rows.push(target_cells);
        states = next;
    }

    let groups = &per_type[target.0];
    Ok(ProvenanceLedger {
        scheme,
        iterations,
        target: g.vertex_type(target).name.clone(),
        groups: groups.iter().map(|r| r.key().to_string()).collect(),
        group_type_paths: groups.iter().map(|r| r.type_path().to_string()).collect(),
        cells: rows,
    })
}

fn render_cell(g: &HeteroGraph, paths: &BTreeSet<Path>, updates: usize) -> Result<LedgerCell> {
    let mut rels = paths
        .iter()
        .map(|p| Relation::general(g, p.clone()))
        .collect::<Result<Vec<_>>>()?;
    rels.sort();
    Ok(LedgerCell {
        relations: rels.iter().map(|r| r.key().to_string()).collect(),
        type_paths: rels.iter().map(|r| r.type_path().to_string()).collect(),
        updates,
    })
}

impl ProvenanceLedger {
    /// Markdown table with iterations as rows and groups as columns.
    ///
    /// Uses vertex-type paths when `compact` is set, canonical relation
    /// strings otherwise.
    pub fn to_markdown(&self, compact: bool) -> String {
        let headers = if compact { &self.group_type_paths } else { &self.groups };
        let mut out = String::new();
        out.push_str("| Iteration \\ Relation |");
        for h in headers {
            out.push_str(&format!(" {h} |"));
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(headers.len()));
        out.push('\n');
        for (i, row) in self.cells.iter().enumerate() {
            out.push_str(&format!("| {} |", i + 1));
            for cell in row {
                let rels = if compact { &cell.type_paths } else { &cell.relations };
                let mut parts: Vec<String> = rels.clone();
                parts.push(cell.label());
                out.push_str(&format!(" {} |", parts.join("<br>")));
            }
            out.push('\n');
        }
        out
    }

    /// Whether vertex-type paths identify relations uniquely in this ledger.
    pub fn compact_is_unambiguous(&self) -> bool {
        let mut seen = std::collections::HashMap::new();
        let all = self
            .cells
            .iter()
            .flatten()
            .flat_map(|c| c.relations.iter().zip(&c.type_paths))
            .chain(self.groups.iter().zip(&self.group_type_paths));
        for (key, path) in all {
            if let Some(prev) = seen.insert(path, key) {
                if prev != key {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
