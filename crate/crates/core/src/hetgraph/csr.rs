//! Compressed sparse row adjacency with implicit unit values.
//!
//! Rows are destination vertices and columns are source vertices, so a
//! left-multiplication `A · H` gathers source rows into destinations.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrAdjacency {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
}

impl CsrAdjacency {
    /// Builds from `(src, dst)` pairs. Duplicates collapse to one entry and
    /// each row's columns come out sorted.
    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(u32, u32)]) -> Self {
        let mut counts = vec![0usize; rows + 1];
        for &(_, dst) in pairs {
            counts[dst as usize + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut scratch = vec![0u32; pairs.len()];
        for &(src, dst) in pairs {
            let slot = &mut cursor[dst as usize];
            scratch[*slot] = src;
            *slot += 1;
        }

        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::with_capacity(pairs.len());
        row_offsets.push(0);
        for r in 0..rows {
            let row = &mut scratch[counts[r]..counts[r + 1]];
            row.sort_unstable();
            let mut prev = None;
            for &c in row.iter() {
                if prev != Some(c) {
                    col_indices.push(c);
                    prev = Some(c);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    /// Source vertices adjacent to destination `row`, sorted ascending.
    pub fn neighbors(&self, row: usize) -> &[u32] {
        &self.col_indices[self.row_offsets[row]..self.row_offsets[row + 1]]
    }

    pub fn degree(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    /// Iterates `(src, dst)` coordinate pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.rows).flat_map(move |r| self.neighbors(r).iter().map(move |&c| (c, r as u32)))
    }

    pub fn transpose(&self) -> Self {
        let flipped: Vec<(u32, u32)> = self.pairs().map(|(src, dst)| (dst, src)).collect();
        Self::from_pairs(self.cols, self.rows, &flipped)
    }

    /// Computes `D⁻¹ A H`, the mean of each destination's neighbor rows.
    ///
    /// Zero-degree rows are left at zero. Each output row is summed in
    /// column-index order, so the result does not depend on the rayon pool
    /// size.
    pub fn mean_aggregate(&self, h: ArrayView2<'_, f32>) -> Result<Array2<f32>> {
        if h.nrows() != self.cols {
            return Err(Error::shape(
                "mean aggregation input",
                (self.cols, h.ncols()),
                h.dim(),
            ));
        }
        let mut out = Array2::<f32>::zeros((self.rows, h.ncols()));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(r, mut row)| {
                let nbrs = self.neighbors(r);
                if nbrs.is_empty() {
                    return;
                }
                for &c in nbrs {
                    row += &h.row(c as usize);
                }
                let inv = 1.0 / nbrs.len() as f32;
                row.mapv_inplace(|v| v * inv);
            });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dedups_and_sorts() {
        let a = CsrAdjacency::from_pairs(2, 3, &[(2, 0), (0, 0), (2, 0), (1, 1)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.neighbors(0), &[0, 2]);
        assert_eq!(a.neighbors(1), &[1]);
        assert_eq!(a.row_offsets(), &[0, 2, 3]);
    }

    #[test]
    fn mean_of_two_one_hot_rows() {
        let a = CsrAdjacency::from_pairs(1, 2, &[(0, 0), (1, 0)]);
        let h = array![[1.0f32, 0.0], [0.0, 1.0]];
        let out = a.mean_aggregate(h.view()).unwrap();
        assert_eq!(out, array![[0.5f32, 0.5]]);
    }

    #[test]
    fn zero_degree_row_is_zero() {
        let a = CsrAdjacency::from_pairs(2, 1, &[(0, 0)]);
        let h = array![[3.0f32, -1.0]];
        let out = a.mean_aggregate(h.view()).unwrap();
        assert_eq!(out.row(1).to_vec(), vec![0.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = CsrAdjacency::from_pairs(2, 3, &[(0, 0)]);
        let h = Array2::<f32>::zeros((2, 4));
        assert!(matches!(
            a.mean_aggregate(h.view()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn transpose_swaps_coordinates() {
        let a = CsrAdjacency::from_pairs(3, 2, &[(0, 2), (1, 0), (1, 2)]);
        let t = a.transpose();
        assert_eq!((t.rows(), t.cols()), (2, 3));
        let mut got: Vec<_> = t.pairs().collect();
        got.sort_unstable();
        assert_eq!(got, vec![(0, 1), (2, 0), (2, 1)]);
        assert_eq!(t.transpose(), a);
    }
}
