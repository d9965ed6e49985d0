//! Declarative experiment configuration.
//!
//! A config is a single JSON document; see the README for the schema. Every
//! field except `dataset`, `split` and `methods` has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backbone::{BackboneConfig, BackboneKind};
use crate::curriculum::{DifficultyMeasure, PacingSchedule, DEFAULT_LOG_BASE};
use crate::data::PairMap;
use crate::graph::SbmParams;
use crate::trainer::{DifficultyConfig, TrainerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub dataset: DatasetSpec,
    pub split: SplitSpec,
    #[serde(default)]
    pub backbone: BackboneSpec,
    pub methods: Vec<Method>,
    #[serde(default = "default_noise")]
    pub noise: Vec<NoiseSpec>,
    #[serde(default = "default_schedules")]
    pub schedules: Vec<PacingSchedule>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_log_base")]
    pub log_base: f64,
    #[serde(default)]
    pub trainer: TrainerSpec,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Report path, relative to the config file's directory.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Also write each curriculum run's difficulty table next to the report.
    #[serde(default)]
    pub export_difficulty: bool,
}

fn default_noise() -> Vec<NoiseSpec> {
    vec![NoiseSpec::None]
}

fn default_schedules() -> Vec<PacingSchedule> {
    vec![PacingSchedule::default()]
}

fn default_alpha() -> f64 {
    1.0
}

fn default_log_base() -> f64 {
    DEFAULT_LOG_BASE
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_output() -> PathBuf {
    PathBuf::from("report.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Synthetic SBM graph. Without `seed` every trial samples its own graph
    /// from the trial seed.
    Sbm(SbmSpec),
    /// Files in the edge-list / dense-feature / label formats.
    Files {
        edges: PathBuf,
        features: PathBuf,
        labels: PathBuf,
        #[serde(default = "default_true")]
        row_normalize: bool,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmSpec {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub feature_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SbmSpec {
    pub fn params(&self) -> SbmParams {
        SbmParams {
            num_nodes: self.num_nodes,
            num_classes: self.num_classes,
            p_in: self.p_in,
            p_out: self.p_out,
            feature_dim: self.feature_dim,
            feature_noise: self.feature_noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    Standard {
        #[serde(default = "default_per_class")]
        per_class: usize,
        #[serde(default = "default_val_size")]
        val_size: usize,
        #[serde(default = "default_test_size")]
        test_size: usize,
    },
    Random {
        label_rate: f64,
        #[serde(default = "default_val_size")]
        val_size: usize,
        #[serde(default = "default_test_size")]
        test_size: usize,
    },
    /// Fixed masks from a split JSON file, shared by all trials.
    File { path: PathBuf },
}

fn default_per_class() -> usize {
    20
}

fn default_val_size() -> usize {
    500
}

fn default_test_size() -> usize {
    1000
}

/// Backbone kind with optional overrides of its defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSpec {
    pub kind: BackboneKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout: Option<f64>,
}

impl Default for BackboneSpec {
    fn default() -> Self {
        Self {
            kind: BackboneKind::Gcn,
            hidden_dim: None,
            propagation_steps: None,
            learning_rate: None,
            weight_decay: None,
            dropout: None,
        }
    }
}

impl BackboneSpec {
    pub fn resolve(&self) -> BackboneConfig {
        let d = BackboneConfig::defaults_for(self.kind);
        BackboneConfig {
            kind: self.kind,
            hidden_dim: self.hidden_dim.unwrap_or(d.hidden_dim),
            propagation_steps: self.propagation_steps.unwrap_or(d.propagation_steps),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            weight_decay: self.weight_decay.unwrap_or(d.weight_decay),
            dropout: self.dropout.unwrap_or(d.dropout),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerSpec {
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
}

fn default_patience() -> usize {
    50
}

fn default_max_epochs() -> usize {
    500
}

impl Default for TrainerSpec {
    fn default() -> Self {
        Self {
            patience: default_patience(),
            max_epochs: default_max_epochs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    Clnode,
    ClnodeDiv,
    ClnodeCons,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Clnode => "clnode",
            Method::ClnodeDiv => "clnode_div",
            Method::ClnodeCons => "clnode_cons",
        }
    }

    pub fn is_curriculum(self) -> bool {
        self != Method::Baseline
    }

    /// Difficulty measure for curriculum methods.
    pub fn measure(self, alpha: f64) -> Option<DifficultyMeasure> {
        match self {
            Method::Baseline => None,
            Method::Clnode => Some(DifficultyMeasure::Combined { alpha }),
            Method::ClnodeDiv => Some(DifficultyMeasure::Diversity),
            Method::ClnodeCons => Some(DifficultyMeasure::Consistency),
        }
    }
}

/// Label corruption applied to the training and validation labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    None,
    Uniform {
        p: f64,
    },
    Pair {
        p: f64,
        /// Defaults to `c -> (c + 1) mod k`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pair_map: Option<PairMap>,
    },
}

impl NoiseSpec {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseSpec::None => "none",
            NoiseSpec::Uniform { .. } => "uniform",
            NoiseSpec::Pair { .. } => "pair",
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Uniform { p } | NoiseSpec::Pair { p, .. } => *p,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    /// Read and fully validate a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_json(&text)?;
        let errors = config.validation_errors(path.parent());
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn trainer_config(&self, schedule: PacingSchedule, seed: u64) -> TrainerConfig {
        TrainerConfig {
            patience: self.trainer.patience,
            max_epochs: self.trainer.max_epochs,
            schedule,
            seed,
        }
    }

    pub fn difficulty_config(&self, method: Method) -> Option<DifficultyConfig> {
        method.measure(self.alpha).map(|measure| DifficultyConfig {
            measure,
            log_base: self.log_base,
        })
    }

    /// Class count when it is known without reading data files.
    fn static_num_classes(&self) -> Option<usize> {
        match &self.dataset {
            DatasetSpec::Sbm(sbm) => Some(sbm.num_classes),
            DatasetSpec::Files { .. } => None,
        }
    }

    /// Every static problem with the config. `base_dir` resolves relative
    /// data paths; pass `None` to skip file existence checks.
    pub fn validation_errors(&self, base_dir: Option<&Path>) -> Vec<String> {
        let mut errors = Vec::new();

        match &self.dataset {
            DatasetSpec::Sbm(sbm) => {
                if let Err(e) = sbm.params().validate() {
                    errors.push(format!("dataset.sbm: {}", strip_prefix(&e)));
                }
            }
            DatasetSpec::Files {
                edges,
                features,
                labels,
                ..
            } => {
                if let Some(dir) = base_dir {
                    for (name, p) in [("edges", edges), ("features", features), ("labels", labels)]
                    {
                        if !dir.join(p).is_file() {
                            errors.push(format!(
                                "dataset.files.{name}: {} does not exist",
                                p.display()
                            ));
                        }
                    }
                }
            }
        }

        match &self.split {
            SplitSpec::Standard { per_class, .. } => {
                if *per_class == 0 {
                    errors.push("split.standard.per_class must be positive".into());
                }
                if let DatasetSpec::Sbm(sbm) = &self.dataset {
                    self.check_split_fits(&sbm.params(), &mut errors);
                }
            }
            SplitSpec::Random { label_rate, .. } => {
                if !(*label_rate > 0.0 && *label_rate <= 1.0) {
                    errors.push(format!(
                        "split.random.label_rate {label_rate} must lie in (0, 1]"
                    ));
                }
            }
            SplitSpec::File { path } => {
                if let Some(dir) = base_dir {
                    if !dir.join(path).is_file() {
                        errors.push(format!("split.file: {} does not exist", path.display()));
                    }
                }
            }
        }

        errors.extend(
            self.backbone
                .resolve()
                .validation_errors()
                .into_iter()
                .map(|e| format!("backbone: {e}")),
        );

        if self.methods.is_empty() {
            errors.push("methods must list at least one method".into());
        }
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        if methods.len() != self.methods.len() {
            errors.push("methods contains duplicates".into());
        }

        if self.noise.is_empty() {
            errors.push("noise must list at least one setting (use {\"kind\": \"none\"})".into());
        }
        let num_classes = self.static_num_classes();
        for (i, noise) in self.noise.iter().enumerate() {
            let p = noise.rate();
            if !(0.0..=1.0).contains(&p) {
                errors.push(format!("noise[{i}]: rate {p} is not a probability"));
            }
            match noise {
                NoiseSpec::Uniform { .. } => {
                    if num_classes.is_some_and(|k| k < 2) {
                        errors.push(format!("noise[{i}]: uniform noise needs at least two classes"));
                    }
                }
                NoiseSpec::Pair { pair_map, .. } => match (pair_map, num_classes) {
                    (_, Some(k)) if k < 2 => errors.push(format!(
                        "noise[{i}]: pair noise needs at least two classes for a fixed-point-free pair map"
                    )),
                    (Some(map), Some(k)) if map.num_classes() != k => errors.push(format!(
                        "noise[{i}]: pair_map covers {} classes but the dataset has {k}",
                        map.num_classes()
                    )),
                    _ => {}
                },
                NoiseSpec::None => {}
            }
        }

        let curriculum = self.methods.iter().any(|m| m.is_curriculum());
        if curriculum {
            if self.schedules.is_empty() {
                errors.push("schedules must list at least one pacing schedule".into());
            }
            for (i, s) in self.schedules.iter().enumerate() {
                for e in s.validation_errors() {
                    errors.push(format!("schedules[{i}]: {e}"));
                }
                if s.horizon > self.trainer.max_epochs {
                    errors.push(format!(
                        "schedules[{i}]: horizon {} exceeds trainer.max_epochs {}",
                        s.horizon, self.trainer.max_epochs
                    ));
                }
            }
            if !self.alpha.is_finite() || self.alpha < 0.0 {
                errors.push(format!(
                    "alpha {} must be a finite non-negative real",
                    self.alpha
                ));
            }
            if !(self.log_base > 1.0 && self.log_base.is_finite()) {
                errors.push(format!("log_base {} must exceed 1", self.log_base));
            }
        }

        if self.trainer.patience == 0 {
            errors.push("trainer.patience must be at least 1".into());
        }
        if self.trainer.max_epochs == 0 {
            errors.push("trainer.max_epochs must be at least 1".into());
        }
        if self.seeds.is_empty() {
            errors.push("seeds must list at least one seed".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            errors.push("seeds contains duplicates".into());
        }
        if self.output.as_os_str().is_empty() {
            errors.push("output must be a file path".into());
        }
        errors
    }

    fn check_split_fits(&self, params: &SbmParams, errors: &mut Vec<String>) {
        let SplitSpec::Standard {
            per_class,
            val_size,
            test_size,
        } = &self.split
        else {
            return;
        };
        if params.num_classes == 0 || params.num_nodes < params.num_classes {
            return;
        }
        let smallest = params.num_nodes / params.num_classes;
        if *per_class > smallest {
            errors.push(format!(
                "split.standard.per_class {per_class} exceeds the smallest SBM class ({smallest} nodes)"
            ));
        } else if per_class * params.num_classes + val_size + test_size > params.num_nodes {
            errors.push(format!(
                "split.standard needs {} nodes but the SBM graph has {}",
                per_class * params.num_classes + val_size + test_size,
                params.num_nodes
            ));
        }
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidInput(m) => m.clone(),
        other => other.to_string(),
    }
}
