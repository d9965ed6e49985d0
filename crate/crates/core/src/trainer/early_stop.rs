/// Patience-based early stopping on validation accuracy.
///
/// Only strict improvements count, so ties keep the earliest best epoch.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    stale_epochs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: None,
            stale_epochs: 0,
        }
    }

    /// Record `accuracy` for `epoch`. Non-improving epochs only drain
    /// patience when `counting` is set.
    pub fn observe(&mut self, epoch: usize, accuracy: f64, counting: bool) -> Verdict {
        let improved = self.best.is_none_or(|(_, best)| accuracy > best);
        if improved {
            self.best = Some((epoch, accuracy));
            self.stale_epochs = 0;
        } else if counting {
            self.stale_epochs += 1;
        }
        Verdict {
            improved,
            stop: self.stale_epochs >= self.patience,
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.map(|(e, _)| e)
    }
}
