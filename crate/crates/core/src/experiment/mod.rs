//! Experiment harness: runs every (method, noise, schedule) arm over a list
//! of seeds and aggregates test accuracy.
//!
//! Per seed, the dataset, split and noise draws come from data streams of the
//! trial seed, so all arms of a trial see identical corrupted labels. Model
//! initialization and dropout use separate streams.

mod config;
mod report;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    BackboneSpec, DatasetSpec, ExperimentConfig, Method, NoiseSpec, SbmSpec, SplitSpec, TrainerSpec,
};
pub use report::{
    emit_curves, mean_std, pacing_curve_csv, AggregateReport, AggregateRow, CurveKind,
};

use crate::curriculum::{DifficultyTable, PacingSchedule};
use crate::data::{
    inject_pair_noise, inject_uniform_noise, load_dataset, random_split, standard_split, Dataset,
    NoisyLabels, PairMap, SplitMasks,
};
use crate::graph::sbm_generate;
use crate::trainer::{train_clnode, train_standard, TrainReport};
use crate::{Error, Result};

/// Wall-clock of one run; kept out of the report so reports stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub method: Method,
    pub noise: NoiseSpec,
    pub schedule: Option<PacingSchedule>,
    pub seed: u64,
    pub wall_clock_s: f64,
}

/// A difficulty table produced by one curriculum run.
#[derive(Debug, Clone)]
pub struct DifficultyExport {
    pub name: String,
    pub table: DifficultyTable,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: AggregateReport,
    pub timings: Vec<TimingRecord>,
    pub difficulty: Vec<DifficultyExport>,
}

#[derive(Debug, Clone)]
struct Arm {
    method: Method,
    noise_index: usize,
    schedule_index: Option<usize>,
}

fn arms(config: &ExperimentConfig) -> Vec<Arm> {
    let mut out = Vec::new();
    for noise_index in 0..config.noise.len() {
        for &method in &config.methods {
            if method.is_curriculum() {
                for s in 0..config.schedules.len() {
                    out.push(Arm {
                        method,
                        noise_index,
                        schedule_index: Some(s),
                    });
                }
            } else {
                out.push(Arm {
                    method,
                    noise_index,
                    schedule_index: None,
                });
            }
        }
    }
    out
}

/// Read and validate a config file, reporting all problems at once.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)
}

fn build_dataset(spec: &DatasetSpec, base_dir: &Path, seed: u64) -> Result<Dataset> {
    match spec {
        DatasetSpec::Sbm(sbm) => {
            Dataset::from_synthetic(sbm_generate(&sbm.params(), sbm.seed.unwrap_or(seed))?)
        }
        DatasetSpec::Files {
            edges,
            features,
            labels,
            row_normalize,
        } => {
            let mut d = load_dataset(
                base_dir.join(edges),
                base_dir.join(features),
                base_dir.join(labels),
            )?;
            if *row_normalize {
                d.row_normalize();
            }
            Ok(d)
        }
    }
}

fn build_split(
    spec: &SplitSpec,
    dataset: &Dataset,
    base_dir: &Path,
    seed: u64,
) -> Result<SplitMasks> {
    let masks = match spec {
        SplitSpec::Standard {
            per_class,
            val_size,
            test_size,
        } => standard_split(dataset, *per_class, *val_size, *test_size, seed)?,
        SplitSpec::Random {
            label_rate,
            val_size,
            test_size,
        } => random_split(dataset, *label_rate, *val_size, *test_size, seed)?,
        SplitSpec::File { path } => SplitMasks::read_json(base_dir.join(path))?,
    };
    masks.validate(dataset.num_nodes())?;
    Ok(masks)
}

/// Corrupt the train and validation labels; test labels stay clean.
fn apply_noise(
    spec: &NoiseSpec,
    dataset: &Dataset,
    masks: &SplitMasks,
    seed: u64,
) -> Result<NoisyLabels> {
    let targets = masks.train_and_val();
    match spec {
        NoiseSpec::None => Ok(NoisyLabels::clean(&dataset.labels)),
        NoiseSpec::Uniform { p } => {
            inject_uniform_noise(&dataset.labels, &targets, *p, dataset.num_classes, seed)
        }
        NoiseSpec::Pair { p, pair_map } => {
            let map = match pair_map {
                Some(m) => m.clone(),
                None => PairMap::cyclic(dataset.num_classes)?,
            };
            if map.num_classes() != dataset.num_classes {
                return Err(Error::invalid(format!(
                    "pair map covers {} classes, dataset has {}",
                    map.num_classes(),
                    dataset.num_classes
                )));
            }
            inject_pair_noise(&dataset.labels, &targets, *p, &map, seed)
        }
    }
}

struct TrialResult {
    seed: u64,
    reports: Vec<TrainReport>,
    tables: Vec<Option<DifficultyTable>>,
}

fn run_trial(
    config: &ExperimentConfig,
    base_dir: &Path,
    shared: Option<&Dataset>,
    arms: &[Arm],
    seed: u64,
) -> Result<TrialResult> {
    let owned;
    let dataset = match shared {
        Some(d) => d,
        None => {
            owned = build_dataset(&config.dataset, base_dir, seed)?;
            &owned
        }
    };
    let masks = build_split(&config.split, dataset, base_dir, seed)?;
    let noisy = config
        .noise
        .iter()
        .map(|spec| apply_noise(spec, dataset, &masks, seed))
        .collect::<Result<Vec<_>>>()?;
    let backbone = config.backbone.resolve();

    let mut reports = Vec::with_capacity(arms.len());
    let mut tables = Vec::with_capacity(arms.len());
    for arm in arms {
        let labels = &noisy[arm.noise_index].observed;
        match arm.schedule_index {
            None => {
                let trainer = config.trainer_config(PacingSchedule::default(), seed);
                let (_, report) = train_standard(dataset, &masks, labels, &backbone, &trainer)?;
                reports.push(report);
                tables.push(None);
            }
            Some(s) => {
                let trainer = config.trainer_config(config.schedules[s], seed);
                let difficulty = config
                    .difficulty_config(arm.method)
                    .expect("curriculum arm has a difficulty measure");
                let outcome =
                    train_clnode(dataset, &masks, labels, &backbone, &trainer, &difficulty)?;
                reports.push(outcome.report);
                tables.push(config.export_difficulty.then_some(outcome.table));
            }
        }
        log::debug!(
            "seed {seed}: {} noise[{}] done, test acc {:.4}",
            arm.method.name(),
            arm.noise_index,
            reports.last().map_or(f64::NAN, |r| r.test_acc)
        );
    }
    log::info!("seed {seed} finished {} runs", reports.len());
    Ok(TrialResult {
        seed,
        reports,
        tables,
    })
}

/// Run every arm for every seed. Relative data paths resolve against `base_dir`.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentOutput> {
    let errors = config.validation_errors(Some(base_dir));
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let shared = match &config.dataset {
        DatasetSpec::Sbm(sbm) if sbm.seed.is_none() => None,
        spec => Some(build_dataset(spec, base_dir, 0)?),
    };
    let arms = arms(config);
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    let trials = seeds
        .par_iter()
        .map(|&seed| run_trial(config, base_dir, shared.as_ref(), &arms, seed))
        .collect::<Result<Vec<_>>>()?;

    let mut timings = Vec::new();
    let mut difficulty = Vec::new();
    let mut rows = Vec::with_capacity(arms.len());
    for (a, arm) in arms.iter().enumerate() {
        let noise = config.noise[arm.noise_index].clone();
        let schedule = arm.schedule_index.map(|s| config.schedules[s]);
        let mut runs = Vec::with_capacity(trials.len());
        for trial in &trials {
            let mut report = trial.reports[a].clone();
            timings.push(TimingRecord {
                method: arm.method,
                noise: noise.clone(),
                schedule,
                seed: trial.seed,
                wall_clock_s: report.wall_clock_s.take().unwrap_or(0.0),
            });
            if let Some(table) = &trial.tables[a] {
                let sched = arm
                    .schedule_index
                    .map_or(String::new(), |s| format!("_sched{s}"));
                difficulty.push(DifficultyExport {
                    name: format!(
                        "{}_noise{}{sched}_seed{}.txt",
                        arm.method.name(),
                        arm.noise_index,
                        trial.seed
                    ),
                    table: table.clone(),
                });
            }
            runs.push(report);
        }
        rows.push(AggregateRow::new(arm.method, noise, schedule, runs));
    }
    Ok(ExperimentOutput {
        report: AggregateReport {
            config: config.clone(),
            rows,
        },
        timings,
        difficulty,
    })
}

/// Paths written by [`run`].
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub report: PathBuf,
    pub timings: PathBuf,
    pub difficulty_dir: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Load `config_path`, run it and write the report.
///
/// The report goes to the config's `output` (relative to the config file),
/// or to `out_dir/<file name of output>` when `out_dir` is given. Timings go
/// to a `.timings.json` sidecar.
pub fn run(
    config_path: impl AsRef<Path>,
    out_dir: Option<&Path>,
) -> Result<(ExperimentOutput, RunPaths)> {
    let config_path = config_path.as_ref();
    let config = ExperimentConfig::load(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let output = run_experiment(&config, base_dir)?;

    let report_path = match out_dir {
        Some(dir) => dir.join(config.output.file_name().unwrap_or("report.json".as_ref())),
        None => base_dir.join(&config.output),
    };
    write_file(&report_path, &output.report.to_json()?)?;
    let timings_path = report_path.with_extension("timings.json");
    write_file(
        &timings_path,
        &serde_json::to_string_pretty(&output.timings)?,
    )?;

    let difficulty_dir = if output.difficulty.is_empty() {
        None
    } else {
        let dir = report_path.with_extension("difficulty");
        for export in &output.difficulty {
            write_file(&dir.join(&export.name), &export.table.to_text())?;
        }
        Some(dir)
    };
    Ok((
        output,
        RunPaths {
            report: report_path,
            timings: timings_path,
            difficulty_dir,
        },
    ))
}
