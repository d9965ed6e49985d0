//! SGC and GCN node classifiers with hand-derived gradients.
//!
//! Both models are full-batch and transductive: every forward pass covers all
//! nodes and the loss is restricted to a node subset.
//!
//! - SGC: `softmax(S W)` with `S = Â^K X` precomputed once.
//! - GCN: `softmax(Â · ReLU(Â X W0) · W1)`, dropout on the input of each layer.

mod adam;
mod checkpoint;

use ndarray::{Array2, ArrayView2, Axis, Zip};
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

pub use adam::{Adam, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};

use crate::graph::SparseMatrix;
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackboneKind {
    Sgc,
    Gcn,
}

impl BackboneKind {
    pub fn name(self) -> &'static str {
        match self {
            BackboneKind::Sgc => "sgc",
            BackboneKind::Gcn => "gcn",
        }
    }
}

/// Architecture and optimizer hyper-parameters.
///
/// `hidden_dim` and `dropout` only apply to GCN, `propagation_steps` only to SGC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneConfig {
    pub kind: BackboneKind,
    pub hidden_dim: usize,
    pub propagation_steps: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
}

impl BackboneConfig {
    /// Two-layer GCN: hidden 16, dropout 0.5, lr 0.01, weight decay 5e-4.
    pub fn gcn() -> Self {
        Self {
            kind: BackboneKind::Gcn,
            hidden_dim: 16,
            propagation_steps: 2,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            dropout: 0.5,
        }
    }

    /// SGC: K = 2, lr 0.2, weight decay 1e-5, no dropout.
    pub fn sgc() -> Self {
        Self {
            kind: BackboneKind::Sgc,
            hidden_dim: 16,
            propagation_steps: 2,
            learning_rate: 0.2,
            weight_decay: 1e-5,
            dropout: 0.0,
        }
    }

    pub fn defaults_for(kind: BackboneKind) -> Self {
        match kind {
            BackboneKind::Sgc => Self::sgc(),
            BackboneKind::Gcn => Self::gcn(),
        }
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.kind == BackboneKind::Gcn && self.hidden_dim == 0 {
            errors.push("hidden_dim must be positive".to_string());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            errors.push("learning_rate must be positive".to_string());
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            errors.push("weight_decay must be non-negative".to_string());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            errors.push("dropout must lie in [0, 1)".to_string());
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        match self.validation_errors().first() {
            Some(e) => Err(Error::invalid(e.clone())),
            None => Ok(()),
        }
    }

    fn layer_shapes(&self, feature_dim: usize, num_classes: usize) -> Vec<(usize, usize)> {
        match self.kind {
            BackboneKind::Sgc => vec![(feature_dim, num_classes)],
            BackboneKind::Gcn => vec![
                (feature_dim, self.hidden_dim),
                (self.hidden_dim, num_classes),
            ],
        }
    }
}

/// Weight matrices plus the Adam moment buffers that update them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub weights: Vec<Array2<f64>>,
    pub adam: AdamState,
}

impl ModelParams {
    pub fn from_weights(weights: Vec<Array2<f64>>) -> Self {
        let adam = AdamState::zeros_like(&weights);
        Self { weights, adam }
    }

    pub fn num_scalars(&self) -> usize {
        self.weights.iter().map(Array2::len).sum()
    }
}

/// Gradients with the same shapes as [`ModelParams::weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
}

/// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zeroed moments.
pub fn init_params(
    config: &BackboneConfig,
    feature_dim: usize,
    num_classes: usize,
    rng: &mut Rng,
) -> ModelParams {
    let weights = config
        .layer_shapes(feature_dim, num_classes)
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..=bound))
        })
        .collect();
    ModelParams::from_weights(weights)
}

/// `Â^K X` by `K` successive sparse-dense products.
pub fn sgc_precompute(
    adjacency: &SparseMatrix,
    features: &ArrayView2<'_, f64>,
    k: usize,
) -> Array2<f64> {
    let mut out = features.to_owned();
    for _ in 0..k {
        out = adjacency.mul_dense(&out.view());
    }
    out
}

/// Graph inputs prepared for one backbone kind.
///
/// For SGC `features` already holds `Â^K X`.
#[derive(Debug, Clone)]
pub struct ModelInput {
    kind: BackboneKind,
    adjacency: SparseMatrix,
    features: Array2<f64>,
}

impl ModelInput {
    pub fn new(config: &BackboneConfig, adjacency: SparseMatrix, features: &Array2<f64>) -> Self {
        let features = match config.kind {
            BackboneKind::Sgc => {
                sgc_precompute(&adjacency, &features.view(), config.propagation_steps)
            }
            BackboneKind::Gcn => features.clone(),
        };
        Self {
            kind: config.kind,
            adjacency,
            features,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.features.nrows()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub logits: Array2<f64>,
    pub probs: Array2<f64>,
    hidden: Option<HiddenLayer>,
}

impl ForwardCache {
    /// GCN hidden pre-activations `Â X W0`; `None` for SGC.
    pub fn hidden_pre_activation(&self) -> Option<&Array2<f64>> {
        self.hidden.as_ref().map(|h| &h.pre_activation)
    }
}

#[derive(Debug, Clone)]
struct HiddenLayer {
    /// Inverted-dropout mask on the input features (entries 0 or 1/keep).
    input_mask: Option<Array2<f64>>,
    pre_activation: Array2<f64>,
    /// ReLU output after dropout, i.e. the input of the second layer.
    activation: Array2<f64>,
    activation_mask: Option<Array2<f64>>,
}

fn dropout_mask(shape: (usize, usize), rate: f64, rng: &mut Rng) -> Array2<f64> {
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    Array2::from_shape_simple_fn(shape, || if rng.random_bool(keep) { scale } else { 0.0 })
}

fn check_params(params: &ModelParams, config: &BackboneConfig, input: &ModelInput) -> Result<()> {
    if input.kind != config.kind {
        return Err(Error::invalid(
            "model input was prepared for a different backbone",
        ));
    }
    let expected = match config.kind {
        BackboneKind::Sgc => 1,
        BackboneKind::Gcn => 2,
    };
    if params.weights.len() != expected || params.weights[0].nrows() != input.features.ncols() {
        return Err(Error::invalid(
            "parameter shapes do not match the model input",
        ));
    }
    Ok(())
}

/// Row-wise softmax, subtracting the row max first.
fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut probs = logits.clone();
    for mut row in probs.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|z| (z - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|e| e / sum);
    }
    probs
}

/// Full-graph forward pass.
///
/// `dropout_seed = None` disables dropout; a given seed always reproduces the
/// same masks.
pub fn forward(
    params: &ModelParams,
    config: &BackboneConfig,
    input: &ModelInput,
    dropout_seed: Option<u64>,
) -> Result<ForwardCache> {
    check_params(params, config, input)?;
    let (logits, hidden) = match config.kind {
        BackboneKind::Sgc => (input.features.dot(&params.weights[0]), None),
        BackboneKind::Gcn => {
            let mut rng = dropout_seed
                .filter(|_| config.dropout > 0.0)
                .map(Rng::seed_from_u64);
            let input_mask = rng
                .as_mut()
                .map(|r| dropout_mask(input.features.dim(), config.dropout, r));
            let projected = match &input_mask {
                Some(mask) => (&input.features * mask).dot(&params.weights[0]),
                None => input.features.dot(&params.weights[0]),
            };
            let pre_activation = input.adjacency.mul_dense(&projected.view());
            let mut activation = pre_activation.mapv(|z| z.max(0.0));
            let activation_mask = rng
                .as_mut()
                .map(|r| dropout_mask(activation.dim(), config.dropout, r));
            if let Some(mask) = &activation_mask {
                activation *= mask;
            }
            let logits = input
                .adjacency
                .mul_dense(&activation.dot(&params.weights[1]).view());
            let hidden = HiddenLayer {
                input_mask,
                pre_activation,
                activation,
                activation_mask,
            };
            (logits, Some(hidden))
        }
    };
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric("non-finite logits in forward pass".into()));
    }
    let probs = softmax_rows(&logits);
    Ok(ForwardCache {
        logits,
        probs,
        hidden,
    })
}

fn check_subset(subset: &[usize], labels: &[usize], n: usize, num_classes: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("loss subset is empty"));
    }
    if labels.len() != n {
        return Err(Error::invalid("label array length differs from node count"));
    }
    for &i in subset {
        if i >= n {
            return Err(Error::invalid(format!("subset node {i} out of range")));
        }
        if labels[i] >= num_classes {
            return Err(Error::invalid(format!(
                "label {} of node {i} out of range",
                labels[i]
            )));
        }
    }
    Ok(())
}

fn objective(
    cache: &ForwardCache,
    params: &ModelParams,
    config: &BackboneConfig,
    labels: &[usize],
    subset: &[usize],
) -> f64 {
    let nll: f64 = subset
        .iter()
        .map(|&i| {
            let row = cache.logits.row(i);
            let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let log_norm = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
            log_norm - row[labels[i]]
        })
        .sum();
    let squared_norm: f64 = params
        .weights
        .iter()
        .map(|w| w.iter().map(|x| x * x).sum::<f64>())
        .sum();
    nll / subset.len() as f64 + 0.5 * config.weight_decay * squared_norm
}

/// Mean cross-entropy over `subset` plus `weight_decay / 2 · Σ‖W‖²`.
pub fn loss(
    params: &ModelParams,
    config: &BackboneConfig,
    input: &ModelInput,
    labels: &[usize],
    subset: &[usize],
    dropout_seed: Option<u64>,
) -> Result<f64> {
    let cache = forward(params, config, input, dropout_seed)?;
    check_subset(subset, labels, input.num_nodes(), cache.probs.ncols())?;
    Ok(objective(&cache, params, config, labels, subset))
}

/// The [`loss`] together with its exact gradient.
pub fn loss_and_grads(
    params: &ModelParams,
    config: &BackboneConfig,
    input: &ModelInput,
    labels: &[usize],
    subset: &[usize],
    dropout_seed: Option<u64>,
) -> Result<(f64, Gradients)> {
    let cache = forward(params, config, input, dropout_seed)?;
    check_subset(subset, labels, input.num_nodes(), cache.probs.ncols())?;
    let value = objective(&cache, params, config, labels, subset);

    // d(loss)/d(logits): (p - onehot) / |subset| on subset rows, zero elsewhere.
    let scale = 1.0 / subset.len() as f64;
    let mut d_logits = Array2::<f64>::zeros(cache.logits.dim());
    for &i in subset {
        let mut row = d_logits.row_mut(i);
        row.assign(&cache.probs.row(i));
        row[labels[i]] -= 1.0;
        row.mapv_inplace(|g| g * scale);
    }

    let decay = |g: Array2<f64>, w: &Array2<f64>| g + &(w * config.weight_decay);
    let weights = match &cache.hidden {
        None => {
            let grad = input.features.t().dot(&d_logits);
            vec![decay(grad, &params.weights[0])]
        }
        Some(h) => {
            // Â is symmetric, so Âᵀ·G = Â·G.
            let d_second = input.adjacency.mul_dense(&d_logits.view());
            let grad_w1 = h.activation.t().dot(&d_second);
            let mut d_hidden = d_second.dot(&params.weights[1].t());
            if let Some(mask) = &h.activation_mask {
                d_hidden *= mask;
            }
            Zip::from(&mut d_hidden)
                .and(&h.pre_activation)
                .for_each(|g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
            let d_first = input.adjacency.mul_dense(&d_hidden.view());
            let grad_w0 = match &h.input_mask {
                Some(mask) => (&input.features * mask).t().dot(&d_first),
                None => input.features.t().dot(&d_first),
            };
            vec![
                decay(grad_w0, &params.weights[0]),
                decay(grad_w1, &params.weights[1]),
            ]
        }
    };
    Ok((value, Gradients { weights }))
}

/// Per-node argmax; ties go to the lowest class id.
pub fn predict(cache: &ForwardCache) -> Vec<usize> {
    argmax_rows(&cache.probs)
}

pub(crate) fn argmax_rows(scores: &Array2<f64>) -> Vec<usize> {
    scores
        .axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalized_adjacency, Graph};
    use crate::rng::{self, Stream};
    use ndarray::array;

    fn toy_input(config: &BackboneConfig) -> ModelInput {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let x = array![
            [1.0, 0.0, 0.5],
            [0.0, 1.0, -0.5],
            [0.3, 0.3, 0.3],
            [-1.0, 0.2, 0.0]
        ];
        ModelInput::new(config, normalized_adjacency(&g), &x)
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let cfg = BackboneConfig::gcn();
        let a = init_params(&cfg, 10, 3, &mut rng::stream(1, Stream::Model));
        let b = init_params(&cfg, 10, 3, &mut rng::stream(1, Stream::Model));
        assert_eq!(a, b);
        assert_eq!(a.weights[0].dim(), (10, 16));
        assert_eq!(a.weights[1].dim(), (16, 3));
        let bound = (6.0f64 / 26.0).sqrt();
        assert!(a.weights[0].iter().all(|w| w.abs() <= bound));
        assert!(a.adam.step == 0);
    }

    #[test]
    fn sgc_precompute_cases() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let a = normalized_adjacency(&g);
        let x = array![[2.0, 0.0], [0.0, 4.0]];
        assert_eq!(sgc_precompute(&a, &x.view(), 0), x);
        // Â = [[1/2, 1/2], [1/2, 1/2]]
        let one = sgc_precompute(&a, &x.view(), 1);
        for (got, want) in one.iter().zip(&[1.0, 2.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-15);
        }

        let lone = normalized_adjacency(&Graph::from_edges(1, &[]).unwrap());
        let y = array![[3.0, -1.0]];
        assert_eq!(sgc_precompute(&lone, &y.view(), 5), y);
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        for cfg in [BackboneConfig::gcn(), BackboneConfig::sgc()] {
            let input = toy_input(&cfg);
            let mut params = init_params(&cfg, 3, 2, &mut rng::stream(0, Stream::Model));
            params.weights.iter_mut().for_each(|w| w.fill(0.0));
            let cache = forward(&params, &cfg, &input, None).unwrap();
            assert!(cache.probs.iter().all(|&p| p == 0.5));
            assert_eq!(predict(&cache), vec![0; 4]);
            let l = loss(&params, &cfg, &input, &[0, 1, 1, 0], &[0, 1, 2], None).unwrap();
            assert!((l - 2f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_subset_is_rejected() {
        let cfg = BackboneConfig::sgc();
        let input = toy_input(&cfg);
        let params = init_params(&cfg, 3, 2, &mut rng::stream(0, Stream::Model));
        let err = loss_and_grads(&params, &cfg, &input, &[0, 1, 1, 0], &[], None).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn loss_is_a_mean_over_the_subset() {
        let cfg = BackboneConfig {
            weight_decay: 0.0,
            ..BackboneConfig::sgc()
        };
        let input = toy_input(&cfg);
        let params = init_params(&cfg, 3, 2, &mut rng::stream(3, Stream::Model));
        let labels = [0, 1, 1, 0];
        let one = loss(&params, &cfg, &input, &labels, &[2], None).unwrap();
        let twice = loss(&params, &cfg, &input, &labels, &[2, 2], None).unwrap();
        assert!((one - twice).abs() < 1e-15);
    }

    #[test]
    fn predict_tie_break_and_one_hot() {
        let cache = ForwardCache {
            logits: array![[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            probs: array![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], [0.0, 0.0, 1.0]],
            hidden: None,
        };
        assert_eq!(predict(&cache), vec![0, 2]);
    }

    #[test]
    fn dropout_seed_reproduces_masks() {
        let cfg = BackboneConfig::gcn();
        let input = toy_input(&cfg);
        let params = init_params(&cfg, 3, 2, &mut rng::stream(0, Stream::Model));
        let a = forward(&params, &cfg, &input, Some(9)).unwrap();
        let b = forward(&params, &cfg, &input, Some(9)).unwrap();
        assert_eq!(a.logits, b.logits);
        let off1 = forward(&params, &cfg, &input, None).unwrap();
        let off2 = forward(&params, &cfg, &input, None).unwrap();
        assert_eq!(off1.logits, off2.logits);
    }

    #[test]
    fn mismatched_input_kind_is_rejected() {
        let input = toy_input(&BackboneConfig::sgc());
        let cfg = BackboneConfig::gcn();
        let params = init_params(&cfg, 3, 2, &mut rng::stream(0, Stream::Model));
        assert!(forward(&params, &cfg, &input, None).is_err());
    }
}
