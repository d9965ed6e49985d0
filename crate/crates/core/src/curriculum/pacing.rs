use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacingKind {
    Linear,
    Root,
    Geometric,
}

impl PacingKind {
    pub const ALL: [PacingKind; 3] = [PacingKind::Linear, PacingKind::Root, PacingKind::Geometric];

    pub fn name(self) -> &'static str {
        match self {
            PacingKind::Linear => "linear",
            PacingKind::Root => "root",
            PacingKind::Geometric => "geometric",
        }
    }
}

/// Maps epoch `t` to the fraction of easiest training nodes in use.
///
/// Starts at `initial_fraction` for `t = 0` and reaches 1 at `t = horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacingSchedule {
    pub kind: PacingKind,
    pub initial_fraction: f64,
    pub horizon: usize,
}

impl Default for PacingSchedule {
    fn default() -> Self {
        Self {
            kind: PacingKind::Geometric,
            initial_fraction: 0.5,
            horizon: 100,
        }
    }
}

impl PacingSchedule {
    pub fn new(kind: PacingKind, initial_fraction: f64, horizon: usize) -> Result<Self> {
        let s = Self {
            kind,
            initial_fraction,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.initial_fraction.is_nan() || self.initial_fraction <= 0.0 {
            errors.push(format!(
                "initial fraction must be positive (got {})",
                self.initial_fraction
            ));
        } else if self.initial_fraction > 1.0 {
            errors.push(format!(
                "initial fraction must be at most 1 (got {})",
                self.initial_fraction
            ));
        }
        if self.horizon == 0 {
            errors.push("pacing horizon must be at least 1 epoch".to_string());
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        match self.validation_errors().into_iter().next() {
            Some(e) => Err(Error::invalid(e)),
            None => Ok(()),
        }
    }

    /// Fraction of the training set in use at epoch `t`, in `(0, 1]`.
    pub fn fraction_at(&self, t: usize) -> f64 {
        let l0 = self.initial_fraction;
        if t >= self.horizon {
            return 1.0;
        }
        if t == 0 {
            return l0;
        }
        let progress = t as f64 / self.horizon as f64;
        let g = match self.kind {
            PacingKind::Linear => l0 + (1.0 - l0) * progress,
            PacingKind::Root => (l0 * l0 + (1.0 - l0 * l0) * progress).sqrt(),
            PacingKind::Geometric => (l0.log2() * (1.0 - progress)).exp2(),
        };
        g.min(1.0)
    }
}
