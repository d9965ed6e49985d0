use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Planted-partition stochastic block model with class-centroid features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub feature_noise: f64,
}

impl SbmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if self.p_in <= self.p_out {
            return Err(Error::invalid("p_in must exceed p_out"));
        }
        if self.num_classes == 0 || self.num_nodes < self.num_classes {
            return Err(Error::invalid("need at least one node per class"));
        }
        if self.feature_dim < self.num_classes {
            return Err(Error::invalid(
                "feature_dim must be at least num_classes for one-hot centroids",
            ));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return Err(Error::invalid(
                "feature_noise must be a finite non-negative real",
            ));
        }
        Ok(())
    }

    /// Planted class of `node`: equal blocks, remainder in the last block.
    pub fn block_of(&self, node: usize) -> usize {
        let size = self.num_nodes / self.num_classes;
        (node / size).min(self.num_classes - 1)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticGraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub features: Array2<f64>,
}

/// Sample an SBM graph together with planted labels and noisy features.
///
/// Node `i`'s feature row is the unit vector `e_{label(i)}` plus i.i.d.
/// Gaussian noise of standard deviation `feature_noise`.
pub fn sbm_generate(params: &SbmParams, seed: u64) -> Result<SyntheticGraph> {
    params.validate()?;
    let n = params.num_nodes;
    let labels: Vec<usize> = (0..n).map(|i| params.block_of(i)).collect();
    let mut rng = rng::stream(seed, Stream::Graph);

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] {
                params.p_in
            } else {
                params.p_out
            };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(n, &edges)?;

    let mut features = Array2::<f64>::zeros((n, params.feature_dim));
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        for x in row.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *x = params.feature_noise * z;
        }
        row[labels[i]] += 1.0;
    }
    Ok(SyntheticGraph {
        graph,
        labels,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, p_in: f64, p_out: f64, f: usize, noise: f64) -> SbmParams {
        SbmParams {
            num_nodes: n,
            num_classes: k,
            p_in,
            p_out,
            feature_dim: f,
            feature_noise: noise,
        }
    }

    #[test]
    fn zero_p_out_gives_pure_blocks() {
        let s = sbm_generate(&params(100, 2, 0.9, 0.0, 8, 0.0), 7).unwrap();
        for (u, v) in s.graph.edges() {
            assert_eq!(s.labels[u], s.labels[v]);
        }
        assert!(s.graph.num_edges() > 0);
        // No noise: each feature row is exactly its one-hot centroid.
        for (i, row) in s.features.rows().into_iter().enumerate() {
            assert_eq!(row.sum(), 1.0);
            assert_eq!(row[s.labels[i]], 1.0);
        }
    }

    #[test]
    fn intra_class_degree_matches_binomial_mean() {
        let p = params(200, 4, 0.1, 0.01, 16, 0.5);
        let mut total = 0.0;
        let seeds = 30;
        for seed in 0..seeds {
            let s = sbm_generate(&p, seed).unwrap();
            let intra: usize = (0..200)
                .map(|u| {
                    s.graph
                        .neighbors(u)
                        .iter()
                        .filter(|&&v| s.labels[v] == s.labels[u])
                        .count()
                })
                .sum();
            total += intra as f64 / 200.0;
        }
        let mean = total / seeds as f64;
        let expected = 0.1 * 49.0;
        assert!((mean - expected).abs() <= 0.15 * expected, "mean {mean}");
    }

    #[test]
    fn deterministic_given_seed() {
        let p = params(200, 4, 0.1, 0.01, 16, 0.5);
        let a = sbm_generate(&p, 1).unwrap();
        let b = sbm_generate(&p, 1).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.features, b.features);
        let c = sbm_generate(&p, 2).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn remainder_goes_to_last_block() {
        let p = params(10, 3, 0.5, 0.1, 3, 0.0);
        let labels: Vec<_> = (0..10).map(|i| p.block_of(i)).collect();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(sbm_generate(&params(10, 2, 1.5, 0.0, 2, 0.0), 0).is_err());
        assert!(sbm_generate(&params(10, 2, 0.5, -0.1, 2, 0.0), 0).is_err());
        assert!(sbm_generate(&params(10, 2, 0.1, 0.5, 2, 0.0), 0).is_err());
    }
}
