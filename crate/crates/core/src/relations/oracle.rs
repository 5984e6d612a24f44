//! Dense 64-bit reference for relation-wise aggregation.
//!
//! Deliberately naive: every hop materializes the dense row-normalized
//! adjacency and multiplies with a triple loop. Used by tests to check the
//! sparse pipeline; unsuitable for anything but small graphs.

use ndarray::Array2;

use super::Relation;
use crate::error::{Error, Result};
use crate::hetgraph::{CsrAdjacency, HeteroGraph};

/// Dense `D⁻¹ A` with zero rows for zero-degree destinations.
pub fn dense_normalized_adjacency(adj: &CsrAdjacency) -> Array2<f64> {
    let mut m = Array2::zeros((adj.rows(), adj.cols()));
    for (src, dst) in adj.pairs() {
        m[[dst as usize, src as usize]] = 1.0;
    }
    for mut row in m.rows_mut() {
        let deg: f64 = row.sum();
        if deg > 0.0 {
            row.mapv_inplace(|v| v / deg);
        }
    }
    m
}

pub fn naive_matmul(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.ncols() != b.nrows() {
        return Err(Error::shape("naive matmul", (a.ncols(), b.ncols()), b.dim()));
    }
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = 0.0;
            for k in 0..a.ncols() {
                acc += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    Ok(out)
}

/// Applies every hop of `r` to the start type's matrix in
/// `features_by_type` (indexed by vertex type id).
pub fn oracle_aggregate(g: &HeteroGraph, r: &Relation, features_by_type: &[Array2<f64>]) -> Result<Array2<f64>> {
    let start = features_by_type
        .get(r.start().0)
        .ok_or_else(|| Error::MissingFeatures(g.vertex_type(r.start()).name.clone()))?;
    let expected_rows = g.vertex_type(r.start()).count;
    if start.nrows() != expected_rows {
        return Err(Error::shape("oracle input", (expected_rows, start.ncols()), start.dim()));
    }
    let mut h = start.clone();
    for &e in r.edges() {
        h = naive_matmul(&dense_normalized_adjacency(g.adjacency(e)), &h)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::fixtures::academic_schema;
    use ndarray::array;

    #[test]
    fn single_hop_is_neighbor_mean() {
        let g = academic_schema();
        let write = g.edge_type_id("a", "write", "p").unwrap();
        let r = Relation::odd(&g, write).unwrap();
        let mut feats: Vec<Array2<f64>> = g
            .vertex_types()
            .iter()
            .map(|vt| Array2::zeros((vt.count, 1)))
            .collect();
        feats[g.vertex_type_id("a").unwrap().0] = array![[1.0], [2.0], [4.0]];
        let out = oracle_aggregate(&g, &r, &feats).unwrap();
        // paper 1 is written by authors 0 and 1.
        assert_eq!(out.column(0).to_vec(), vec![1.0, 1.5, 4.0, 4.0]);
    }

    #[test]
    fn coauthor_relation_mixes_coauthored_papers() {
        let g = academic_schema();
        let write = g.edge_type_id("a", "write", "p").unwrap();
        let r = Relation::even(&g, write).unwrap();
        let mut feats: Vec<Array2<f64>> = g
            .vertex_types()
            .iter()
            .map(|vt| Array2::zeros((vt.count, 4)))
            .collect();
        feats[0] = Array2::eye(4);
        let out = oracle_aggregate(&g, &r, &feats).unwrap();
        // paper 0 <- author 0 <- papers {0, 1}.
        assert_eq!(out.row(0).to_vec(), vec![0.5, 0.5, 0.0, 0.0]);
        // paper 1 <- authors {0, 1}; author 1 wrote only paper 1.
        assert_eq!(out.row(1).to_vec(), vec![0.25, 0.75, 0.0, 0.0]);
        assert_eq!(out.row(3).to_vec(), vec![0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn rejects_wrong_row_count() {
        let g = academic_schema();
        let r = Relation::odd(&g, g.edge_type_id("a", "write", "p").unwrap()).unwrap();
        let feats: Vec<Array2<f64>> = (0..4).map(|_| Array2::zeros((1, 1))).collect();
        assert!(oracle_aggregate(&g, &r, &feats).is_err());
    }
}
