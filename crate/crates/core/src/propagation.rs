//! Relation-wise neighbor collection: one mean-aggregated matrix per
//! relation, never merged across relations.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hetgraph::{degree_normalized_product, EdgeTypeId, HeteroGraph, VertexTypeId};
use crate::relations::{scheme_relations, Relation, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct CollectedNeighborInfo {
    pub relation: Relation,
    /// `count(relation.end()) × dim(relation.start())`.
    pub matrix: Array2<f32>,
}

fn check_rows(g: &HeteroGraph, vt: VertexTypeId, h: &ArrayView2<'_, f32>, what: &str) -> Result<()> {
    let count = g.vertex_type(vt).count;
    if h.nrows() != count {
        return Err(Error::shape(
            format!("{what} for `{}`", g.vertex_type(vt).name),
            (count, h.ncols()),
            h.dim(),
        ));
    }
    Ok(())
}

/// Mean over `src` neighbors along one edge type.
pub fn collect_odd(g: &HeteroGraph, e: EdgeTypeId, state_src: ArrayView2<'_, f32>) -> Result<CollectedNeighborInfo> {
    check_rows(g, g.edge_type(e).src, &state_src, "source state")?;
    Ok(CollectedNeighborInfo {
        relation: Relation::odd(g, e)?,
        matrix: degree_normalized_product(g.adjacency(e), state_src)?,
    })
}

/// `dst → src → dst` through the reverse type and back, as two chained
/// sparse products. The two-hop adjacency is never formed.
pub fn collect_even(
    g: &HeteroGraph,
    e: EdgeTypeId,
    state_dst_prev: ArrayView2<'_, f32>,
) -> Result<CollectedNeighborInfo> {
    let et = g.edge_type(e);
    let rev = et.reverse;
    if g.edge_type(rev).reverse != e {
        return Err(Error::MissingReverse(g.render_edge(e)));
    }
    check_rows(g, et.dst, &state_dst_prev, "destination state")?;
    let mid = degree_normalized_product(g.adjacency(rev), state_dst_prev)?;
    Ok(CollectedNeighborInfo {
        relation: Relation::even(g, e)?,
        matrix: degree_normalized_product(g.adjacency(e), mid.view())?,
    })
}

/// Chains every hop of an arbitrary relation starting from its start type's state.
pub fn collect_relation(g: &HeteroGraph, r: &Relation, states: &[Array2<f32>]) -> Result<CollectedNeighborInfo> {
    let start = states
        .get(r.start().0)
        .ok_or_else(|| Error::MissingFeatures(g.vertex_type(r.start()).name.clone()))?;
    check_rows(g, r.start(), &start.view(), "relation input")?;
    let mut edges = r.edges().iter();
    let first = edges.next().expect("relations are nonempty");
    let mut h = degree_normalized_product(g.adjacency(*first), start.view())?;
    for &e in edges {
        h = degree_normalized_product(g.adjacency(e), h.view())?;
    }
    Ok(CollectedNeighborInfo {
        relation: r.clone(),
        matrix: h,
    })
}

/// Collects every relation of `scheme` ending at `vt`, in canonical order.
///
/// `states` is indexed by vertex type id.
pub fn rwnc_collect(
    g: &HeteroGraph,
    states: &[Array2<f32>],
    scheme: Scheme,
    vt: VertexTypeId,
) -> Result<Vec<CollectedNeighborInfo>> {
    let relations = scheme_relations(g, scheme, vt)?;
    collect_all(g, states, &relations)
}

pub(crate) fn collect_all(
    g: &HeteroGraph,
    states: &[Array2<f32>],
    relations: &[Relation],
) -> Result<Vec<CollectedNeighborInfo>> {
    relations
        .par_iter()
        .map(|r| match r.parity() {
            crate::relations::Parity::Odd => collect_odd(g, r.edges()[0], states[r.start().0].view()),
            crate::relations::Parity::Even => collect_even(g, r.edges()[1], states[r.start().0].view()),
            crate::relations::Parity::General => collect_relation(g, r, states),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetgraph::{build_graph, EdgeSpec};
    use crate::relations::fixtures::academic_schema;
    use ndarray::array;

    #[test]
    fn single_edge_copies_source_state() {
        let g = build_graph(&[("u", 1), ("v", 1)], vec![EdgeSpec::new("u", "e", "v", vec![(0, 0)])]).unwrap();
        let e = g.edge_type_id("u", "e", "v").unwrap();
        let c = collect_odd(&g, e, array![[2.0f32, 4.0]].view()).unwrap();
        assert_eq!(c.matrix, array![[2.0f32, 4.0]]);
    }

    #[test]
    fn one_paper_per_author_is_identity() {
        let g = build_graph(
            &[("a", 3), ("p", 3)],
            vec![EdgeSpec::new("a", "write", "p", vec![(0, 2), (1, 0), (2, 1)])],
        )
        .unwrap();
        let e = g.edge_type_id("a", "write", "p").unwrap();
        let h = array![[1.0f32, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let c = collect_even(&g, e, h.view()).unwrap();
        assert_eq!(c.matrix, h);
    }

    #[test]
    fn shape_errors() {
        let g = academic_schema();
        let write = g.edge_type_id("a", "write", "p").unwrap();
        assert!(collect_odd(&g, write, Array2::zeros((4, 2)).view()).is_err());
        assert!(collect_even(&g, write, Array2::zeros((3, 2)).view()).is_err());
    }

    #[test]
    fn scheme_collection_counts() {
        let g = academic_schema();
        let states = g
            .vertex_types()
            .iter()
            .map(|vt| Array2::ones((vt.count, 3)))
            .collect::<Vec<_>>();
        let p = g.vertex_type_id("p").unwrap();
        assert_eq!(rwnc_collect(&g, &states, Scheme::EvenOdd, p).unwrap().len(), 6);
        assert_eq!(rwnc_collect(&g, &states, Scheme::Local, p).unwrap().len(), 3);
        let i = g.vertex_type_id("i").unwrap();
        assert_eq!(rwnc_collect(&g, &states, Scheme::Local, i).unwrap().len(), 1);
    }
}
