//! Neighborhood-based difficulty measurement and curriculum pacing.
//!
//! A preliminary model assigns pseudo-labels to every node; training nodes
//! keep their given labels. Each training node is then scored by how mixed
//! the labels in its neighborhood are, and a pacing function decides how
//! large a prefix of the easiest-first ordering is trained on per epoch.

mod pacing;
mod scores;

pub use pacing::{PacingKind, PacingSchedule};
pub use scores::{
    difficulty_table, score_cons, score_div, DifficultyEntry, DifficultyMeasure, DifficultyTable,
    DEFAULT_LOG_BASE,
};

use crate::backbone::{forward, predict, BackboneConfig, ModelInput};
use crate::data::{Dataset, SplitMasks};
use crate::trainer::{self, TrainReport, TrainerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    Given,
    Pseudo,
}

/// Labels for every node: given labels on the training set, model
/// predictions elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedLabels {
    pub labels: Vec<usize>,
    pub source: Vec<LabelSource>,
}

/// Overwrite predictions with the given labels on `train`.
pub fn merge_labels(predicted: &[usize], given: &[usize], train: &[usize]) -> Result<MergedLabels> {
    if predicted.len() != given.len() {
        return Err(Error::invalid(
            "predicted and given label arrays differ in length",
        ));
    }
    let mut labels = predicted.to_vec();
    let mut source = vec![LabelSource::Pseudo; labels.len()];
    for &i in train {
        if i >= labels.len() {
            return Err(Error::invalid(format!("training node {i} out of range")));
        }
        labels[i] = given[i];
        source[i] = LabelSource::Given;
    }
    Ok(MergedLabels { labels, source })
}

/// Train the preliminary model on the labeled set, predict every node, and
/// merge the predictions with the given training labels.
///
/// `labels` are the observed (possibly noisy) labels used for training and
/// validation.
pub fn pseudo_label(
    dataset: &Dataset,
    masks: &SplitMasks,
    labels: &[usize],
    backbone: &BackboneConfig,
    trainer_config: &TrainerConfig,
) -> Result<(MergedLabels, TrainReport)> {
    let input = trainer::prepare_input(dataset, backbone);
    pseudo_label_with_input(&input, dataset, masks, labels, backbone, trainer_config)
}

pub(crate) fn pseudo_label_with_input(
    input: &ModelInput,
    dataset: &Dataset,
    masks: &SplitMasks,
    labels: &[usize],
    backbone: &BackboneConfig,
    trainer_config: &TrainerConfig,
) -> Result<(MergedLabels, TrainReport)> {
    let (params, report) =
        trainer::train_preliminary(input, dataset, masks, labels, backbone, trainer_config)?;
    let cache = forward(&params, backbone, input, None)?;
    let merged = merge_labels(&predict(&cache), labels, &masks.train)?;
    Ok((merged, report))
}
