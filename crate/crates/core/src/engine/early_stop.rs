use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopDecision {
    Continue,
    /// Stop; `best_epoch` is 1-based.
    Stop {
        best_epoch: usize,
    },
}

/// Tracks the best validation loss; stops after `patience` epochs without strict improvement.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    epoch: usize,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be at least 1");
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            epoch: 0,
            wait: 0,
        }
    }

    /// Records one epoch's validation loss.
    pub fn observe(&mut self, loss: f64) -> StopDecision {
        self.epoch += 1;
        if loss < self.best {
            self.best = loss;
            self.best_epoch = self.epoch;
            self.wait = 0;
        } else {
            self.wait += 1;
        }
        if self.wait >= self.patience {
            StopDecision::Stop {
                best_epoch: self.best_epoch,
            }
        } else {
            StopDecision::Continue
        }
    }

    /// Whether the most recent observation set a new best.
    pub fn improved(&self) -> bool {
        self.best_epoch == self.epoch && self.epoch > 0
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

pub fn early_stopping(history: &[f64], patience: usize) -> StopDecision {
    let mut es = EarlyStopping::new(patience);
    for &l in history {
        if let stop @ StopDecision::Stop { .. } = es.observe(l) {
            return stop;
        }
    }
    StopDecision::Continue
}
