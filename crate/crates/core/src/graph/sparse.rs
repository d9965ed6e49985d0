use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::Graph;

/// Square CSR matrix with real values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.col_indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                out[[r, c]] = v;
            }
        }
        out
    }

    /// Sparse-dense product `self · dense`.
    ///
    /// Rows are computed independently, so the result does not depend on the
    /// number of worker threads.
    pub fn mul_dense(&self, dense: &ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(dense.nrows(), self.n, "inner dimensions differ");
        let cols = dense.ncols();
        let mut out = Array2::<f64>::zeros((self.n, cols));
        if cols == 0 {
            return out;
        }
        out.as_slice_mut()
            .expect("fresh array is contiguous")
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(r, out_row)| {
                for (c, v) in self.row(r) {
                    for (o, x) in out_row.iter_mut().zip(dense.row(c)) {
                        *o += v * x;
                    }
                }
            });
        out
    }
}

/// Symmetric normalization `D^-1/2 (A + I) D^-1/2` where `D` counts the
/// added self-loop.
pub fn normalized_adjacency(g: &Graph) -> SparseMatrix {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|u| 1.0 / ((g.degree(u) + 1) as f64).sqrt())
        .collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(g.col_indices().len() + n);
    let mut values = Vec::with_capacity(g.col_indices().len() + n);
    row_offsets.push(0);
    for u in 0..n {
        for v in g.closed_neighborhood(u) {
            col_indices.push(v);
            values.push(inv_sqrt[u] * inv_sqrt[v]);
        }
        row_offsets.push(col_indices.len());
    }
    SparseMatrix {
        n,
        row_offsets,
        col_indices,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn isolated_node_is_identity() {
        let g = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(normalized_adjacency(&g).to_dense(), array![[1.0]]);
    }

    #[test]
    fn single_edge_is_all_halves() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let a = normalized_adjacency(&g).to_dense();
        for v in a.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn path_entries_follow_degrees() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let a = normalized_adjacency(&g);
        assert!((a.get(0, 1) - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((a.get(0, 1) - 0.4082).abs() < 1e-4);
        assert!((a.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.get(0, 2), 0.0);
        assert!(a.is_symmetric());
    }

    #[test]
    fn regular_graph_rows_sum_to_one() {
        let cycle: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let a = normalized_adjacency(&Graph::from_edges(6, &cycle).unwrap());
        for s in a.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mul_dense_matches_dense_product() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let a = normalized_adjacency(&g);
        let x = array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [-2.0, 1.0]];
        let sparse = a.mul_dense(&x.view());
        let dense = a.to_dense().dot(&x);
        for (s, d) in sparse.iter().zip(dense.iter()) {
            assert!((s - d).abs() < 1e-14);
        }
    }
}
