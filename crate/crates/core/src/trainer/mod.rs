//! Standard and curriculum training loops.

mod early_stop;

use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use early_stop::{EarlyStopping, Verdict};

use crate::backbone::{
    forward, init_params, loss_and_grads, predict, Adam, BackboneConfig, ModelInput, ModelParams,
};
use crate::curriculum::{
    self, difficulty_table, DifficultyMeasure, DifficultyTable, MergedLabels, PacingSchedule,
};
use crate::data::{Dataset, SplitMasks};
use crate::graph::normalized_adjacency;
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub patience: usize,
    pub max_epochs: usize,
    /// Only read by the curriculum loop.
    pub schedule: PacingSchedule,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            patience: 50,
            max_epochs: 500,
            schedule: PacingSchedule::default(),
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validation_errors(&self, curriculum: bool) -> Vec<String> {
        let mut errors = Vec::new();
        if self.patience == 0 {
            errors.push("patience must be at least 1".to_string());
        }
        if self.max_epochs == 0 {
            errors.push("max_epochs must be at least 1".to_string());
        }
        if curriculum {
            errors.extend(self.schedule.validation_errors());
            if self.max_epochs < self.schedule.horizon {
                errors.push(format!(
                    "max_epochs ({}) must be at least the pacing horizon ({})",
                    self.max_epochs, self.schedule.horizon
                ));
            }
        }
        errors
    }

    fn validate(&self, curriculum: bool) -> Result<()> {
        match self.validation_errors(curriculum).into_iter().next() {
            Some(e) => Err(Error::invalid(e)),
            None => Ok(()),
        }
    }
}

/// How a difficulty table is built for the curriculum loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyConfig {
    pub measure: DifficultyMeasure,
    pub log_base: f64,
}

impl Default for DifficultyConfig {
    fn default() -> Self {
        Self {
            measure: DifficultyMeasure::default(),
            log_base: curriculum::DEFAULT_LOG_BASE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub subset_size: usize,
    pub train_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    /// Accuracy of the best-validation snapshot on the test mask, against
    /// clean labels.
    pub test_acc: f64,
    pub wall_clock_s: Option<f64>,
    pub seed: u64,
}

/// Everything produced by one curriculum run.
#[derive(Debug, Clone)]
pub struct ClnodeOutcome {
    pub params: ModelParams,
    pub report: TrainReport,
    pub pseudo_report: TrainReport,
    pub merged: MergedLabels,
    pub table: DifficultyTable,
}

pub fn prepare_input(dataset: &Dataset, backbone: &BackboneConfig) -> ModelInput {
    ModelInput::new(
        backbone,
        normalized_adjacency(&dataset.graph),
        &dataset.features,
    )
}

/// Fraction of `mask` whose prediction equals the label.
pub fn accuracy(predictions: &[usize], mask: &[usize], labels: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty mask"));
    }
    let correct = mask
        .iter()
        .filter(|&&i| predictions[i] == labels[i])
        .count();
    Ok(correct as f64 / mask.len() as f64)
}

/// Accuracy of `params` on `mask` with dropout disabled.
pub fn evaluate(
    params: &ModelParams,
    backbone: &BackboneConfig,
    input: &ModelInput,
    mask: &[usize],
    clean_labels: &[usize],
) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty mask"));
    }
    let cache = forward(params, backbone, input, None)?;
    accuracy(&predict(&cache), mask, clean_labels)
}

enum Mode<'a> {
    Standard,
    Curriculum {
        table: &'a DifficultyTable,
        schedule: PacingSchedule,
    },
}

struct Streams {
    init: Stream,
    dropout: Stream,
}

const MAIN: Streams = Streams {
    init: Stream::Model,
    dropout: Stream::Dropout,
};

const PRELIMINARY: Streams = Streams {
    init: Stream::PseudoModel,
    dropout: Stream::PseudoDropout,
};

struct RunInputs<'a> {
    input: &'a ModelInput,
    dataset: &'a Dataset,
    masks: &'a SplitMasks,
    labels: &'a [usize],
    backbone: &'a BackboneConfig,
    trainer: &'a TrainerConfig,
}

fn check_inputs(dataset: &Dataset, masks: &SplitMasks, labels: &[usize]) -> Result<()> {
    masks.validate(dataset.num_nodes())?;
    if masks.val.is_empty() {
        return Err(Error::invalid(
            "validation set is empty; early stopping needs one",
        ));
    }
    if labels.len() != dataset.num_nodes() {
        return Err(Error::invalid(
            "observed label array length differs from node count",
        ));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= dataset.num_classes) {
        return Err(Error::invalid(format!("observed label {l} out of range")));
    }
    Ok(())
}

fn run_loop(
    run: &RunInputs<'_>,
    mode: Mode<'_>,
    streams: Streams,
) -> Result<(ModelParams, TrainReport)> {
    let RunInputs {
        input,
        dataset,
        masks,
        labels,
        backbone,
        trainer,
    } = *run;
    let seed = trainer.seed;
    let mut params = init_params(
        backbone,
        dataset.feature_dim(),
        dataset.num_classes,
        &mut rng::stream(seed, streams.init),
    );
    let mut dropout_rng = rng::stream(seed, streams.dropout);
    let adam = Adam::new(backbone.learning_rate);
    let mut stopper = EarlyStopping::new(trainer.patience);
    let mut best = params.clone();
    let mut epochs = Vec::new();

    for epoch in 1..=trainer.max_epochs {
        let (mut subset, counting) = match &mode {
            Mode::Standard => (masks.train.clone(), true),
            Mode::Curriculum { table, schedule } => (
                table.subset(schedule.fraction_at(epoch)),
                epoch > schedule.horizon,
            ),
        };
        // The loss is a mean over a set; a fixed order makes it independent of ranking.
        subset.sort_unstable();
        let dropout_seed: u64 = dropout_rng.random();
        let (train_loss, grads) = loss_and_grads(
            &params,
            backbone,
            input,
            labels,
            &subset,
            Some(dropout_seed),
        )?;
        adam.step(&mut params, &grads);

        let cache = forward(&params, backbone, input, None)?;
        let val_acc = accuracy(&predict(&cache), &masks.val, labels)?;
        epochs.push(EpochRecord {
            epoch,
            subset_size: subset.len(),
            train_loss,
            val_acc,
        });
        let verdict = stopper.observe(epoch, val_acc, counting);
        if verdict.improved {
            best.clone_from(&params);
        }
        if verdict.stop {
            break;
        }
    }

    let test_acc = evaluate(&best, backbone, input, &masks.test, &dataset.labels)?;
    let report = TrainReport {
        epochs,
        best_epoch: stopper.best_epoch().unwrap_or(0),
        test_acc,
        wall_clock_s: None,
        seed,
    };
    Ok((best, report))
}

/// Train on the full labeled set with early stopping on validation accuracy.
///
/// `labels` are the observed labels for training and validation; test
/// accuracy is always measured against `dataset.labels`.
pub fn train_standard(
    dataset: &Dataset,
    masks: &SplitMasks,
    labels: &[usize],
    backbone: &BackboneConfig,
    trainer: &TrainerConfig,
) -> Result<(ModelParams, TrainReport)> {
    let start = Instant::now();
    backbone.validate()?;
    trainer.validate(false)?;
    check_inputs(dataset, masks, labels)?;
    let input = prepare_input(dataset, backbone);
    let run = RunInputs {
        input: &input,
        dataset,
        masks,
        labels,
        backbone,
        trainer,
    };
    let (params, mut report) = run_loop(&run, Mode::Standard, MAIN)?;
    report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    Ok((params, report))
}

/// The pseudo-labeling model: standard training from its own init stream.
pub(crate) fn train_preliminary(
    input: &ModelInput,
    dataset: &Dataset,
    masks: &SplitMasks,
    labels: &[usize],
    backbone: &BackboneConfig,
    trainer: &TrainerConfig,
) -> Result<(ModelParams, TrainReport)> {
    let start = Instant::now();
    backbone.validate()?;
    trainer.validate(false)?;
    check_inputs(dataset, masks, labels)?;
    let run = RunInputs {
        input,
        dataset,
        masks,
        labels,
        backbone,
        trainer,
    };
    let (params, mut report) = run_loop(&run, Mode::Standard, PRELIMINARY)?;
    report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    Ok((params, report))
}

/// Curriculum training.
///
/// 1. Train a preliminary model and pseudo-label every node, keeping the
///    observed labels on the training set.
/// 2. Score and sort the training set by neighborhood difficulty.
/// 3. Train a fresh model where epoch `t` uses the easiest
///    `schedule.fraction_at(t)` share of the training set. Early stopping
///    tracks the best snapshot throughout but can only end training once
///    `t` exceeds the pacing horizon.
pub fn train_clnode(
    dataset: &Dataset,
    masks: &SplitMasks,
    labels: &[usize],
    backbone: &BackboneConfig,
    trainer: &TrainerConfig,
    difficulty: &DifficultyConfig,
) -> Result<ClnodeOutcome> {
    let start = Instant::now();
    backbone.validate()?;
    trainer.validate(true)?;
    check_inputs(dataset, masks, labels)?;
    let input = prepare_input(dataset, backbone);

    let (merged, pseudo_report) =
        curriculum::pseudo_label_with_input(&input, dataset, masks, labels, backbone, trainer)?;
    let table = difficulty_table(
        &dataset.graph,
        &merged.labels,
        &masks.train,
        difficulty.measure,
        difficulty.log_base,
    )?;

    let run = RunInputs {
        input: &input,
        dataset,
        masks,
        labels,
        backbone,
        trainer,
    };
    let mode = Mode::Curriculum {
        table: &table,
        schedule: trainer.schedule,
    };
    let (params, mut report) = run_loop(&run, mode, MAIN)?;
    report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    Ok(ClnodeOutcome {
        params,
        report,
        pseudo_report,
        merged,
        table,
    })
}
