//! Undirected graphs in compressed sparse row form.

mod sbm;
mod sparse;

use std::path::Path;

pub use sbm::{sbm_generate, SbmParams, SyntheticGraph};
pub use sparse::{normalized_adjacency, SparseMatrix};

use crate::{Error, Result};

/// Undirected, unweighted graph stored as CSR.
///
/// Neighbor lists are sorted ascending, deduplicated and never contain the
/// node itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl Graph {
    /// Build a graph from edges given in any orientation.
    ///
    /// Both orientations are stored; duplicates and self-loops are dropped.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            if u != v {
                pairs.push((u, v));
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_offsets = vec![0usize; num_nodes + 1];
        for &(u, _) in &pairs {
            row_offsets[u + 1] += 1;
        }
        for i in 0..num_nodes {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(Self {
            num_nodes,
            row_offsets,
            col_indices,
        })
    }

    /// Read a whitespace-separated edge list; lines starting with `#` are skipped.
    pub fn read_edge_list(path: impl AsRef<Path>, num_nodes: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut edges = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut endpoint = || -> Result<usize> {
                let field = fields
                    .next()
                    .ok_or_else(|| Error::parse(path, idx + 1, "expected two node ids"))?;
                let id: usize = field
                    .parse()
                    .map_err(|_| Error::parse(path, idx + 1, format!("bad node id {field:?}")))?;
                if id >= num_nodes {
                    return Err(Error::parse(
                        path,
                        idx + 1,
                        format!("node id {id} out of range for {num_nodes} nodes"),
                    ));
                }
                Ok(id)
            };
            let u = endpoint()?;
            let v = endpoint()?;
            if fields.next().is_some() {
                return Err(Error::parse(path, idx + 1, "expected exactly two node ids"));
            }
            edges.push((u, v));
        }
        Self::from_edges(num_nodes, &edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Sorted open neighborhood of `u`.
    ///
    /// # Panics
    ///
    /// Panics if `u` is not a node of the graph.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        assert!(u < self.num_nodes, "node {u} out of range");
        &self.col_indices[self.row_offsets[u]..self.row_offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbors(u).len()
    }

    /// Sorted neighborhood of `u` with `u` itself merged in.
    pub fn closed_neighborhood(&self, u: usize) -> Vec<usize> {
        let open = self.neighbors(u);
        let at = open.partition_point(|&v| v < u);
        let mut out = Vec::with_capacity(open.len() + 1);
        out.extend_from_slice(&open[..at]);
        out.push(u);
        out.extend_from_slice(&open[at..]);
        out
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// Relabel nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_nodes {
            return Err(Error::invalid(
                "permutation length does not match node count",
            ));
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Self::from_edges(self.num_nodes, &edges)
    }
}
