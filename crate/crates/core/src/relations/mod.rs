//! Relations (meta-path schemas) and the relation sets each propagation
//! scheme collects.

pub mod ledger;
pub mod oracle;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hetgraph::{EdgeTypeId, HeteroGraph, VertexTypeId};

pub use ledger::{provenance_ledger, LedgerCell, ProvenanceLedger};
pub use oracle::oracle_aggregate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    General,
}

/// Which relations are collected for each vertex type per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One relation per incoming edge type.
    Local,
    /// Every type-compatible relation of one or two hops.
    TwoHop,
    /// One odd and one symmetric even relation per incoming edge type.
    EvenOdd,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Local => "local",
            Scheme::TwoHop => "two_hop",
            Scheme::EvenOdd => "even_odd",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "local" => Ok(Scheme::Local),
            "two_hop" => Ok(Scheme::TwoHop),
            "even_odd" => Ok(Scheme::EvenOdd),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A type-compatible chain of edge types, read left to right from the
/// vertex whose information is collected to the vertex that receives it.
#[derive(Debug, Clone)]
pub struct Relation {
    edges: Vec<EdgeTypeId>,
    parity: Parity,
    start: VertexTypeId,
    end: VertexTypeId,
    key: String,
    type_path: String,
}

impl Relation {
    pub fn new(g: &HeteroGraph, edges: Vec<EdgeTypeId>, parity: Parity) -> Result<Self> {
        let first = *edges
            .first()
            .ok_or_else(|| Error::InvalidRelation("empty edge sequence".into()))?;
        for pair in edges.windows(2) {
            let (a, b) = (g.edge_type(pair[0]), g.edge_type(pair[1]));
            if a.dst != b.src {
                return Err(Error::InvalidRelation(format!(
                    "`{}` does not chain into `{}`",
                    g.render_edge(pair[0]),
                    g.render_edge(pair[1])
                )));
            }
        }
        match parity {
            Parity::Odd if edges.len() != 1 => {
                return Err(Error::InvalidRelation("odd relations have exactly one hop".into()))
            }
            Parity::Even if edges.len() != 2 || g.edge_type(edges[1]).reverse != edges[0] => {
                return Err(Error::InvalidRelation(
                    "even relations are a reverse edge type followed by its forward type".into(),
                ))
            }
            _ => {}
        }

        let start = g.edge_type(first).src;
        let end = g.edge_type(*edges.last().unwrap()).dst;
        let mut key = g.vertex_type(start).name.clone();
        let mut type_path = key.clone();
        for &e in &edges {
            let et = g.edge_type(e);
            let dst = &g.vertex_type(et.dst).name;
            key.push_str(&format!(" --{}--> {}", et.name, dst));
            type_path.push('→');
            type_path.push_str(dst);
        }
        Ok(Self {
            edges,
            parity,
            start,
            end,
            key,
            type_path,
        })
    }

    pub fn odd(g: &HeteroGraph, e: EdgeTypeId) -> Result<Self> {
        Self::new(g, vec![e], Parity::Odd)
    }

    /// `dst --(e)'--> src --e--> dst`.
    pub fn even(g: &HeteroGraph, e: EdgeTypeId) -> Result<Self> {
        Self::new(g, vec![g.edge_type(e).reverse, e], Parity::Even)
    }

    pub fn general(g: &HeteroGraph, edges: Vec<EdgeTypeId>) -> Result<Self> {
        Self::new(g, edges, Parity::General)
    }

    pub fn edges(&self) -> &[EdgeTypeId] {
        &self.edges
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertex type whose states are read.
    pub fn start(&self) -> VertexTypeId {
        self.start
    }

    /// Vertex type that receives the collected information.
    pub fn end(&self) -> VertexTypeId {
        self.end
    }

    /// Canonical rendering, e.g. `paper --r.write--> author --write--> paper`.
    pub fn key(&self) -> &str {
        &self.key
    }

    /// Vertex types only, e.g. `paper→author→paper`. Ambiguous when two
    /// edge types share endpoints.
    pub fn type_path(&self) -> &str {
        &self.type_path
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges && self.parity == other.parity
    }
}

impl Eq for Relation {}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Relation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.edges.cmp(&other.edges))
    }
}

/// One odd relation per edge type ending at `target`, in canonical order.
pub fn local_relations(g: &HeteroGraph, target: VertexTypeId) -> Vec<Relation> {
    let mut out: Vec<Relation> = g
        .edge_types_into(target)
        .into_iter()
        .map(|e| Relation::odd(g, e).expect("single edge is always a valid odd relation"))
        .collect();
    out.sort();
    out
}

/// Odd and even relations for every edge type ending at `target`.
pub fn even_odd_relations(g: &HeteroGraph, target: VertexTypeId) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for e in g.edge_types_into(target) {
        let rev = g.edge_type(e).reverse;
        if g.edge_type(rev).reverse != e {
            return Err(Error::MissingReverse(g.render_edge(e)));
        }
        out.push(Relation::odd(g, e)?);
        out.push(Relation::even(g, e)?);
    }
    out.sort();
    Ok(out)
}

/// Every type-compatible relation of length `1..=max_hops` ending at `target`.
///
/// The count grows exponentially with `max_hops`.
pub fn enumerate_relations(g: &HeteroGraph, target: VertexTypeId, max_hops: usize) -> Result<Vec<Relation>> {
    if max_hops == 0 {
        return Err(Error::Config("max_hops must be at least 1".into()));
    }
    // Walk backwards from the target, prepending edge types.
    let mut frontier: Vec<Vec<EdgeTypeId>> = vec![Vec::new()];
    let mut out = Vec::new();
    for _ in 0..max_hops {
        let mut next = Vec::new();
        for suffix in &frontier {
            let head = match suffix.first() {
                Some(&e) => g.edge_type(e).src,
                None => target,
            };
            for e in g.edge_types_into(head) {
                let mut path = Vec::with_capacity(suffix.len() + 1);
                path.push(e);
                path.extend_from_slice(suffix);
                out.push(Relation::general(g, path.clone())?);
                next.push(path);
            }
        }
        frontier = next;
    }
    out.sort();
    Ok(out)
}

/// Relations a scheme collects for vertex type `vt`.
pub fn scheme_relations(g: &HeteroGraph, scheme: Scheme, vt: VertexTypeId) -> Result<Vec<Relation>> {
    match scheme {
        Scheme::Local => Ok(local_relations(g, vt)),
        Scheme::EvenOdd => even_odd_relations(g, vt),
        Scheme::TwoHop => enumerate_relations(g, vt, 2),
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::academic_schema;
    use super::*;
    use crate::hetgraph::{build_graph, EdgeSpec};

    fn paths(rs: &[Relation]) -> Vec<&str> {
        rs.iter().map(Relation::type_path).collect()
    }

    #[test]
    fn local_relations_of_paper() {
        let g = academic_schema();
        let p = g.vertex_type_id("p").unwrap();
        let rs = local_relations(&g, p);
        assert_eq!(paths(&rs), vec!["a→p", "f→p", "p→p"]);
        let names: Vec<_> = rs.iter().map(|r| g.edge_type(r.edges()[0]).name.as_str()).collect();
        assert_eq!(names, vec!["write", "r.has_field", "cite"]);
        assert!(rs.iter().all(|r| r.parity() == Parity::Odd));
    }

    #[test]
    fn no_incoming_edges_gives_nothing() {
        let g = build_graph(&[("a", 1), ("b", 1)], vec![]).unwrap();
        assert!(local_relations(&g, VertexTypeId(0)).is_empty());
        assert!(even_odd_relations(&g, VertexTypeId(0)).unwrap().is_empty());
    }

    #[test]
    fn even_odd_relations_of_paper() {
        let g = academic_schema();
        let p = g.vertex_type_id("p").unwrap();
        let rs = even_odd_relations(&g, p).unwrap();
        let mut got = paths(&rs);
        got.sort_unstable();
        assert_eq!(got, vec!["a→p", "f→p", "p→a→p", "p→f→p", "p→p", "p→p→p"]);
        for r in rs.iter().filter(|r| r.parity() == Parity::Even) {
            let (a, b) = (r.edges()[0], r.edges()[1]);
            assert_eq!(g.edge_type(a).reverse, b);
            assert_eq!(g.edge_type(b).reverse, a);
        }
    }

    #[test]
    fn single_edge_type_gives_two() {
        let g = build_graph(&[("a", 2), ("b", 2)], vec![EdgeSpec::new("a", "x", "b", vec![(0, 1)])]).unwrap();
        let rs = even_odd_relations(&g, VertexTypeId(1)).unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(rs[0].key(), "a --x--> b");
        assert_eq!(rs[1].key(), "b --r.x--> a --x--> b");
    }

    #[test]
    fn enumeration_on_chain() {
        let g = build_graph(
            &[("a", 1), ("b", 1), ("c", 1)],
            vec![EdgeSpec::new("a", "ab", "b", vec![]), EdgeSpec::new("b", "bc", "c", vec![])],
        )
        .unwrap();
        let c = g.vertex_type_id("c").unwrap();
        assert!(enumerate_relations(&g, c, 0).is_err());
        let one: Vec<_> = enumerate_relations(&g, c, 1).unwrap().iter().map(|r| r.key().to_string()).collect();
        assert_eq!(one, vec!["b --bc--> c"]);
        let two: Vec<_> = enumerate_relations(&g, c, 2).unwrap().iter().map(|r| r.key().to_string()).collect();
        assert_eq!(
            two,
            vec!["a --ab--> b --bc--> c", "b --bc--> c", "c --r.bc--> b --bc--> c"]
        );
    }

    #[test]
    fn rejects_broken_chains() {
        let g = academic_schema();
        let write = g.edge_type_id("a", "write", "p").unwrap();
        let affiliated = g.edge_type_id("i", "affiliated", "a").unwrap();
        assert!(Relation::general(&g, vec![write, affiliated]).is_err());
        assert!(Relation::general(&g, vec![affiliated, write]).is_ok());
        assert!(Relation::new(&g, vec![write, write], Parity::Even).is_err());
        assert!(Relation::new(&g, vec![affiliated, write], Parity::Odd).is_err());
        assert!(Relation::general(&g, vec![]).is_err());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("even-odd".parse::<Scheme>().unwrap(), Scheme::EvenOdd);
        assert_eq!("two_hop".parse::<Scheme>().unwrap(), Scheme::TwoHop);
        assert_eq!("local".parse::<Scheme>().unwrap(), Scheme::Local);
        assert!("three_hop".parse::<Scheme>().is_err());
        assert_eq!(Scheme::EvenOdd.to_string(), "even_odd");
    }
}
