//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use clnode_core::backbone::{self, BackboneConfig, ModelInput, ModelParams};
use clnode_core::graph::Graph;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central finite differences of the loss with respect to every weight.
pub fn finite_difference_grads(
    params: &ModelParams,
    config: &BackboneConfig,
    input: &ModelInput,
    labels: &[usize],
    subset: &[usize],
    dropout_seed: Option<u64>,
    eps: f64,
) -> Vec<Array2<f64>> {
    let mut probe = params.clone();
    let mut out = Vec::new();
    for layer in 0..params.weights.len() {
        let mut grad = Array2::zeros(params.weights[layer].dim());
        for idx in 0..grad.len() {
            let (r, c) = (idx / grad.ncols(), idx % grad.ncols());
            let orig = probe.weights[layer][[r, c]];
            probe.weights[layer][[r, c]] = orig + eps;
            let up = backbone::loss(&probe, config, input, labels, subset, dropout_seed).unwrap();
            probe.weights[layer][[r, c]] = orig - eps;
            let down = backbone::loss(&probe, config, input, labels, subset, dropout_seed).unwrap();
            probe.weights[layer][[r, c]] = orig;
            grad[[r, c]] = (up - down) / (2.0 * eps);
        }
        out.push(grad);
    }
    out
}

/// `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps exact zeros (dead ReLU
/// units) from dividing by rounding noise.
pub fn max_relative_error(analytic: &[Array2<f64>], numeric: &[Array2<f64>]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .flat_map(|(a, n)| a.iter().zip(n.iter()))
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// Row-wise softmax(X W) with explicit loops.
pub fn logistic_regression(x: &Array2<f64>, w: &Array2<f64>) -> Array2<f64> {
    let (n, k) = (x.nrows(), w.ncols());
    let mut out = Array2::zeros((n, k));
    for i in 0..n {
        let mut logits = vec![0.0; k];
        for (c, logit) in logits.iter_mut().enumerate() {
            for f in 0..x.ncols() {
                *logit += x[[i, f]] * w[[f, c]];
            }
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logits.iter().map(|l| (l - max).exp()).sum();
        for c in 0..k {
            out[[i, c]] = (logits[c] - max).exp() / z;
        }
    }
    out
}

/// Difficulty scores recomputed from a dense adjacency matrix and hash-map
/// label counts: `(node, div, cons, difficulty)` sorted by (difficulty, node).
pub fn brute_force_difficulty(
    n: usize,
    edges: &[(usize, usize)],
    labels: &[usize],
    train: &[usize],
    alpha: f64,
) -> Vec<(usize, f64, f64, f64)> {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u != v {
            adj[u][v] = true;
            adj[v][u] = true;
        }
    }
    let mut rows = Vec::new();
    for &u in train {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        *counts.entry(labels[u]).or_default() += 1;
        let mut degree = 0;
        let mut disagree = 0;
        for v in 0..n {
            if adj[u][v] {
                degree += 1;
                *counts.entry(labels[v]).or_default() += 1;
                if labels[v] != labels[u] {
                    disagree += 1;
                }
            }
        }
        let total = (degree + 1) as f64;
        let mut keys: Vec<_> = counts.keys().copied().collect();
        keys.sort_unstable();
        let div: f64 = keys
            .iter()
            .map(|k| {
                let p = counts[k] as f64 / total;
                -p * p.log10()
            })
            .sum::<f64>()
            .abs();
        let cons = if degree == 0 {
            0.0
        } else {
            disagree as f64 / degree as f64
        };
        rows.push((u, div, cons, div + alpha * cons));
    }
    rows.sort_by(|a, b| a.3.partial_cmp(&b.3).unwrap().then(a.0.cmp(&b.0)));
    rows
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `p_extra`.
pub fn random_connected_graph(n: usize, p_extra: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((order[i], parent));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p_extra) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn is_connected(g: &Graph) -> bool {
    let n = g.num_nodes();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// One random small gradient-check instance; returns the max relative error
/// between analytic and central-difference gradients.
///
/// GCN draws are rejected while any hidden pre-activation lies within `1e-3`
/// of the ReLU kink, where the finite difference is not a derivative.
pub fn gradient_check_instance(kind: backbone::BackboneKind, seed: u64) -> f64 {
    use clnode_core::graph::normalized_adjacency;
    use rand_distr::{Distribution, StandardNormal};

    for attempt in 0u64.. {
        let mut r = rng(seed.wrapping_mul(7919).wrapping_add(attempt));
        let n = r.random_range(3..=10);
        let g = Graph::from_edges(n, &random_connected_graph(n, 0.3, &mut r)).unwrap();
        let feature_dim = r.random_range(2..=5);
        let num_classes = r.random_range(2..=4);
        let features =
            Array2::from_shape_simple_fn((n, feature_dim), || StandardNormal.sample(&mut r));
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..num_classes)).collect();
        let mut subset: Vec<usize> = (0..n).filter(|_| r.random_bool(0.6)).collect();
        if subset.is_empty() {
            subset.push(0);
        }
        let mut config = BackboneConfig::defaults_for(kind);
        config.weight_decay = r.random_range(0.0..1e-2);
        config.hidden_dim = r.random_range(2..=5);
        config.propagation_steps = r.random_range(0..=3);
        let dropout_seed = match kind {
            backbone::BackboneKind::Gcn if r.random_bool(0.5) => Some(r.random::<u64>()),
            _ => None,
        };
        let input = ModelInput::new(&config, normalized_adjacency(&g), &features);
        let mut init_rng = clnode_core::rng::stream(r.random(), clnode_core::rng::Stream::Model);
        let mut params = backbone::init_params(&config, feature_dim, num_classes, &mut init_rng);
        for w in &mut params.weights {
            w.mapv_inplace(|x| x * 2.0);
        }
        let cache = backbone::forward(&params, &config, &input, dropout_seed).unwrap();
        if let Some(z) = cache.hidden_pre_activation() {
            if z.iter().any(|v| v.abs() < 1e-3) {
                continue;
            }
        }
        let (_, grads) =
            backbone::loss_and_grads(&params, &config, &input, &labels, &subset, dropout_seed)
                .unwrap();
        let numeric = finite_difference_grads(
            &params,
            &config,
            &input,
            &labels,
            &subset,
            dropout_seed,
            1e-5,
        );
        return max_relative_error(&grads.weights, &numeric);
    }
    unreachable!()
}
