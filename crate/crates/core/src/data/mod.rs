//! Datasets, train/val/test splits and label-noise injection.

mod noise;
mod split;

use std::path::Path;

use ndarray::Array2;

pub use noise::{inject_pair_noise, inject_uniform_noise, NoisyLabels, PairMap};
pub use split::{random_split, standard_split, SplitMasks};

use crate::graph::{Graph, SyntheticGraph};
use crate::{Error, Result};

/// A graph with node features and ground-truth labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    /// Assemble a dataset, inferring `num_classes` as `max(label) + 1`.
    pub fn new(graph: Graph, features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let n = graph.num_nodes();
        if features.nrows() != n {
            return Err(Error::invalid(format!(
                "feature matrix has {} rows for {n} nodes",
                features.nrows()
            )));
        }
        if labels.len() != n {
            return Err(Error::invalid(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("features must be finite"));
        }
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("class {missing} has no nodes")));
        }
        Ok(Self {
            graph,
            features,
            labels,
            num_classes,
        })
    }

    pub fn from_synthetic(s: SyntheticGraph) -> Result<Self> {
        Self::new(s.graph, s.features, s.labels)
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Nodes of each class, ascending.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }

    /// Scale every feature row to unit L1 norm; all-zero rows are left alone.
    pub fn row_normalize(&mut self) {
        for mut row in self.features.rows_mut() {
            let s: f64 = row.iter().map(|x| x.abs()).sum();
            if s > 0.0 {
                row.mapv_inplace(|x| x / s);
            }
        }
    }
}

/// Load a dataset from an edge list, a dense feature file and a label file.
///
/// Formats:
/// - edges: one `u v` pair per line, `#` comments allowed;
/// - features: header `N F`, then `N` rows of `F` reals;
/// - labels: `N` lines of `node_id label_id`, each node exactly once.
pub fn load_dataset(
    edge_path: impl AsRef<Path>,
    feature_path: impl AsRef<Path>,
    label_path: impl AsRef<Path>,
) -> Result<Dataset> {
    let features = read_features(feature_path.as_ref())?;
    let n = features.nrows();
    let labels = read_labels(label_path.as_ref(), n)?;
    let graph = Graph::read_edge_list(edge_path, n)?;
    Dataset::new(graph, features, labels)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_features(path: &Path) -> Result<Array2<f64>> {
    let text = read_text(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `N F` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(path, 1, "header must be two integers `N F`"))?;
    let [n, f] = dims[..] else {
        return Err(Error::parse(path, 1, "header must be two integers `N F`"));
    };

    let mut data = Vec::with_capacity(n * f);
    let mut rows = 0;
    let mut last_line = 1;
    for (idx, line) in lines {
        last_line = idx + 1;
        if rows == n {
            return Err(Error::parse(
                path,
                last_line,
                format!("more than the {n} feature rows declared in the header"),
            ));
        }
        let before = data.len();
        for field in line.split_whitespace() {
            let x: f64 = field.parse().map_err(|_| {
                Error::parse(path, last_line, format!("non-numeric feature {field:?}"))
            })?;
            data.push(x);
        }
        if data.len() - before != f {
            return Err(Error::parse(
                path,
                last_line,
                format!("expected {f} features, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(
            path,
            last_line,
            format!("header declares {n} rows but file has {rows}"),
        ));
    }
    Ok(Array2::from_shape_vec((n, f), data).expect("row count checked"))
}

fn read_labels(path: &Path, n: usize) -> Result<Vec<usize>> {
    let text = read_text(path)?;
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        last_line = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [node, label] = fields[..] else {
            return Err(Error::parse(path, last_line, "expected `node_id label_id`"));
        };
        let node: usize = node
            .parse()
            .map_err(|_| Error::parse(path, last_line, format!("bad node id {node:?}")))?;
        let label: usize = label
            .parse()
            .map_err(|_| Error::parse(path, last_line, format!("bad label {label:?}")))?;
        if node >= n {
            return Err(Error::parse(
                path,
                last_line,
                format!("node id {node} out of range for {n} nodes"),
            ));
        }
        if labels[node].replace(label).is_some() {
            return Err(Error::parse(
                path,
                last_line,
                format!("node {node} labelled twice"),
            ));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| Error::parse(path, last_line, format!("node {i} has no label")))
        })
        .collect()
}
