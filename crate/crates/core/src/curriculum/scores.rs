use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{Error, Result};

/// Log base of the neighborhood-label entropy.
pub const DEFAULT_LOG_BASE: f64 = 10.0;

/// How the two neighborhood scores are combined into one difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DifficultyMeasure {
    /// `score_div + alpha · score_cons`.
    Combined { alpha: f64 },
    /// `score_div` alone.
    Diversity,
    /// `score_cons` alone.
    Consistency,
}

impl Default for DifficultyMeasure {
    fn default() -> Self {
        DifficultyMeasure::Combined { alpha: 1.0 }
    }
}

impl DifficultyMeasure {
    pub fn combine(self, score_div: f64, score_cons: f64) -> f64 {
        match self {
            DifficultyMeasure::Combined { alpha } => score_div + alpha * score_cons,
            DifficultyMeasure::Diversity => score_div,
            DifficultyMeasure::Consistency => score_cons,
        }
    }
}

/// Entropy of the label distribution over the closed neighborhood of `u`.
///
/// An isolated node only sees itself and scores 0.
pub fn score_div(g: &Graph, labels: &[usize], u: usize, log_base: f64) -> f64 {
    let mut seen: Vec<usize> = g.neighbors(u).iter().map(|&v| labels[v]).collect();
    seen.push(labels[u]);
    seen.sort_unstable();
    let total = seen.len() as f64;
    let ln_base = log_base.ln();
    // Summing over sorted counts keeps the result bit-identical under class renaming.
    let mut counts: Vec<usize> = seen.chunk_by(|a, b| a == b).map(<[usize]>::len).collect();
    counts.sort_unstable();
    counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln() / ln_base
        })
        .sum::<f64>()
        .abs()
}

/// Fraction of `u`'s neighbors whose label differs from `u`'s; 0 when isolated.
pub fn score_cons(g: &Graph, labels: &[usize], u: usize) -> f64 {
    let neighbors = g.neighbors(u);
    if neighbors.is_empty() {
        return 0.0;
    }
    let disagree = neighbors
        .iter()
        .filter(|&&v| labels[v] != labels[u])
        .count();
    disagree as f64 / neighbors.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyEntry {
    pub node: usize,
    pub score_div: f64,
    pub score_cons: f64,
    pub difficulty: f64,
}

/// Scores of every training node and the easiest-first ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyTable {
    pub measure: DifficultyMeasure,
    /// One entry per training node, in ascending difficulty order.
    pub entries: Vec<DifficultyEntry>,
}

impl DifficultyTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Training nodes sorted by (difficulty, node id).
    pub fn order(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.node).collect()
    }

    /// Number of nodes trained on at fraction `fraction`: `round(fraction · l)`,
    /// at least one and at most `l`.
    pub fn subset_size(&self, fraction: f64) -> usize {
        let l = self.entries.len();
        ((fraction * l as f64).round() as usize).clamp(1, l.max(1))
    }

    /// The easiest `subset_size(fraction)` training nodes.
    pub fn subset(&self, fraction: f64) -> Vec<usize> {
        self.entries[..self.subset_size(fraction)]
            .iter()
            .map(|e| e.node)
            .collect()
    }

    /// `node_id score_div score_cons difficulty rank` per line, rank from 1.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (rank, e) in self.entries.iter().enumerate() {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                e.node,
                e.score_div,
                e.score_cons,
                e.difficulty,
                rank + 1
            );
        }
        out
    }
}

/// Score every node of `train` and sort ascending, ties by node id.
pub fn difficulty_table(
    g: &Graph,
    labels: &[usize],
    train: &[usize],
    measure: DifficultyMeasure,
    log_base: f64,
) -> Result<DifficultyTable> {
    if labels.len() != g.num_nodes() {
        return Err(Error::invalid("label array length differs from node count"));
    }
    if !(log_base > 1.0 && log_base.is_finite()) {
        return Err(Error::invalid(format!("log base {log_base} must exceed 1")));
    }
    let mut seen = vec![false; g.num_nodes()];
    let mut entries = Vec::with_capacity(train.len());
    for &u in train {
        match seen.get_mut(u) {
            None => return Err(Error::invalid(format!("training node {u} out of range"))),
            Some(true) => return Err(Error::invalid(format!("training node {u} listed twice"))),
            Some(s) => *s = true,
        }
        let div = score_div(g, labels, u, log_base);
        let cons = score_cons(g, labels, u);
        entries.push(DifficultyEntry {
            node: u,
            score_div: div,
            score_cons: cons,
            difficulty: measure.combine(div, cons),
        });
    }
    entries.sort_by(|a, b| {
        a.difficulty
            .total_cmp(&b.difficulty)
            .then(a.node.cmp(&b.node))
    });
    Ok(DifficultyTable { measure, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Entropy by explicit class counting, independent of the sort-based path.
    fn entropy10(counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        let mut h = 0.0;
        for &c in counts {
            if c > 0 {
                let p = c as f64 / n as f64;
                h -= p * p.log10();
            }
        }
        h
    }

    #[test]
    fn uniform_neighborhood_scores_zero() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let labels = [2, 2, 2, 2];
        assert_eq!(score_div(&g, &labels, 0, 10.0), 0.0);
        assert_eq!(score_cons(&g, &labels, 0), 0.0);
    }

    #[test]
    fn two_node_mixed_neighborhood() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let d = score_div(&g, &[0, 1], 0, 10.0);
        assert!((d - entropy10(&[1, 1])).abs() < 1e-15);
        assert!((d - std::f64::consts::LOG10_2).abs() < 1e-15);
    }

    #[test]
    fn worked_example_with_counts_3_1_1_1() {
        // Node 0 and two neighbors share class 0; three neighbors carry classes 1, 2, 3.
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let labels = [0, 0, 0, 1, 2, 3];
        let d = score_div(&g, &labels, 0, 10.0);
        let oracle = entropy10(&[3, 1, 1, 1]);
        assert!((d - oracle).abs() < 1e-15);
        assert!((d - 0.5396).abs() < 1e-4, "{d}");
        assert_eq!(format!("{d:.2}"), "0.54");
    }

    #[test]
    fn consistency_counts() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(score_cons(&g, &[0, 0, 0, 0, 0], 0), 0.0);
        assert_eq!(score_cons(&g, &[0, 1, 1, 2, 1], 0), 1.0);
        assert_eq!(score_cons(&g, &[0, 1, 0, 2, 1], 0), 0.75);
    }

    #[test]
    fn isolated_nodes_are_easiest() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let labels = [0, 1, 1];
        assert_eq!(score_div(&g, &labels, 2, 10.0), 0.0);
        assert_eq!(score_cons(&g, &labels, 2), 0.0);
        let t = difficulty_table(&g, &labels, &[0, 2], DifficultyMeasure::default(), 10.0).unwrap();
        assert_eq!(t.order(), vec![2, 0]);
    }

    #[test]
    fn ordering_ties_by_node_id_and_subsets() {
        let g = Graph::from_edges(10, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let labels = [0, 1, 0, 0, 1, 0, 0, 0, 0, 0];
        let train: Vec<usize> = (0..10).rev().collect();
        let t = difficulty_table(&g, &labels, &train, DifficultyMeasure::default(), 10.0).unwrap();
        assert_eq!(t.order(), vec![2, 3, 6, 7, 8, 9, 0, 1, 4, 5]);
        assert_eq!(t.subset(1.0).len(), 10);
        assert_eq!(t.subset(0.5), vec![2, 3, 6, 7, 8]);
        assert_eq!(t.subset(0.01), vec![2]);
    }

    #[test]
    fn ablation_measures() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let labels = [0, 1, 1];
        let div = difficulty_table(&g, &labels, &[0], DifficultyMeasure::Diversity, 10.0).unwrap();
        let alpha0 = difficulty_table(
            &g,
            &labels,
            &[0],
            DifficultyMeasure::Combined { alpha: 0.0 },
            10.0,
        )
        .unwrap();
        assert_eq!(div.entries[0].difficulty, alpha0.entries[0].difficulty);
        let cons =
            difficulty_table(&g, &labels, &[0], DifficultyMeasure::Consistency, 10.0).unwrap();
        assert_eq!(cons.entries[0].difficulty, 1.0);
    }

    #[test]
    fn text_export() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let t = difficulty_table(&g, &[0, 0], &[1, 0], DifficultyMeasure::default(), 10.0).unwrap();
        assert_eq!(t.to_text(), "0 0 0 0 1\n1 0 0 0 2\n");
    }

    #[test]
    fn rejects_duplicate_training_nodes() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(
            difficulty_table(&g, &[0, 0], &[1, 1], DifficultyMeasure::default(), 10.0).is_err()
        );
    }
}
