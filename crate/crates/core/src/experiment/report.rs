use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method, NoiseSpec};
use crate::curriculum::{PacingKind, PacingSchedule};
use crate::trainer::TrainReport;
use crate::{Error, Result};

/// One (method, noise, schedule) arm aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub noise: NoiseSpec,
    /// `None` for the baseline, which has no curriculum.
    pub schedule: Option<PacingSchedule>,
    pub mean_test_acc: f64,
    pub std_test_acc: f64,
    /// Per-seed reports, sorted by seed.
    pub runs: Vec<TrainReport>,
}

impl AggregateRow {
    pub fn new(
        method: Method,
        noise: NoiseSpec,
        schedule: Option<PacingSchedule>,
        mut runs: Vec<TrainReport>,
    ) -> Self {
        runs.sort_by_key(|r| r.seed);
        let accs: Vec<f64> = runs.iter().map(|r| r.test_acc).collect();
        let (mean_test_acc, std_test_acc) = mean_std(&accs);
        Self {
            method,
            noise,
            schedule,
            mean_test_acc,
            std_test_acc,
            runs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub config: ExperimentConfig,
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rows matching `method` and `noise`, in report order.
    pub fn rows_for<'a>(
        &'a self,
        method: Method,
        noise: &'a NoiseSpec,
    ) -> impl Iterator<Item = &'a AggregateRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.method == method && &r.noise == noise)
    }
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// One row per aggregate arm.
    Aggregate,
    /// One row per (arm, seed, epoch).
    Epochs,
}

fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn arm_fields(row: &AggregateRow) -> [String; 6] {
    let (pacing, l0, horizon) = match &row.schedule {
        Some(s) => (
            s.kind.name().to_string(),
            s.initial_fraction.to_string(),
            s.horizon.to_string(),
        ),
        None => (String::new(), String::new(), String::new()),
    };
    [
        row.method.name().to_string(),
        row.noise.name().to_string(),
        row.noise.rate().to_string(),
        pacing,
        l0,
        horizon,
    ]
}

const ARM_HEADER: [&str; 6] = [
    "method",
    "noise",
    "noise_p",
    "pacing",
    "initial_fraction",
    "horizon",
];

/// Plot-ready CSV of a report with a fixed column order.
pub fn emit_curves(report: &AggregateReport, kind: CurveKind) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match kind {
        CurveKind::Aggregate => {
            let header = ARM_HEADER
                .iter()
                .chain(&["trials", "mean_test_acc", "std_test_acc"]);
            w.write_record(header).map_err(csv_error)?;
            for row in &report.rows {
                let arm = arm_fields(row);
                let stats = [
                    row.runs.len().to_string(),
                    row.mean_test_acc.to_string(),
                    row.std_test_acc.to_string(),
                ];
                w.write_record(arm.iter().chain(&stats))
                    .map_err(csv_error)?;
            }
        }
        CurveKind::Epochs => {
            let header =
                ARM_HEADER
                    .iter()
                    .chain(&["seed", "epoch", "subset_size", "train_loss", "val_acc"]);
            w.write_record(header).map_err(csv_error)?;
            for row in &report.rows {
                let arm = arm_fields(row);
                for run in &row.runs {
                    for e in &run.epochs {
                        let fields = [
                            run.seed.to_string(),
                            e.epoch.to_string(),
                            e.subset_size.to_string(),
                            e.train_loss.to_string(),
                            e.val_acc.to_string(),
                        ];
                        w.write_record(arm.iter().chain(&fields))
                            .map_err(csv_error)?;
                    }
                }
            }
        }
    }
    finish(w)
}

/// `t, linear, root, geometric` for `t` in `0..=horizon`.
pub fn pacing_curve_csv(initial_fraction: f64, horizon: usize) -> Result<String> {
    let schedules = PacingKind::ALL
        .map(|kind| PacingSchedule::new(kind, initial_fraction, horizon))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "linear", "root", "geometric"])
        .map_err(csv_error)?;
    for t in 0..=horizon {
        let mut record = vec![t.to_string()];
        record.extend(schedules.iter().map(|s| s.fraction_at(t).to_string()));
        w.write_record(&record).map_err(csv_error)?;
    }
    finish(w)
}
