use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use super::loss::LossFunction;

/// Which losses a learner may read after playing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackModel {
    /// Only the played action.
    Bandit,
    /// Every action at or above the played one.
    OneSidedFull,
    /// Every action.
    Full,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeedbackError {
    #[error("{model:?} feedback forbids reading y = {requested} (played {played:?})")]
    ForbiddenQuery { model: FeedbackModel, played: Option<f64>, requested: f64 },
    #[error("an action was already recorded this round")]
    AlreadyPlayed,
}

static TOTAL_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Violations recorded by every guard in this process so far.
pub fn total_violations() -> u64 {
    TOTAL_VIOLATIONS.load(Ordering::Relaxed)
}

/// Per-round loss oracle enforcing a feedback model.
#[derive(Debug)]
pub struct GuardedFeedback<'a> {
    model: FeedbackModel,
    loss: &'a LossFunction,
    played: Option<(usize, f64)>,
    queries: u64,
    violations: u64,
}

impl<'a> GuardedFeedback<'a> {
    pub fn new(model: FeedbackModel, loss: &'a LossFunction) -> Self {
        Self { model, loss, played: None, queries: 0, violations: 0 }
    }

    pub fn model(&self) -> FeedbackModel {
        self.model
    }

    pub fn record_play(&mut self, index: usize, value: f64) -> Result<(), FeedbackError> {
        if self.played.is_some() {
            return Err(FeedbackError::AlreadyPlayed);
        }
        self.played = Some((index, value));
        Ok(())
    }

    pub fn played_index(&self) -> Option<usize> {
        self.played.map(|p| p.0)
    }

    pub fn played_value(&self) -> Option<f64> {
        self.played.map(|p| p.1)
    }

    pub fn permits(&self, y: f64) -> bool {
        match (self.model, self.played) {
            (_, None) => false,
            (FeedbackModel::Bandit, Some((_, p))) => y == p,
            (FeedbackModel::OneSidedFull, Some((_, p))) => y >= p,
            (FeedbackModel::Full, Some(_)) => true,
        }
    }

    pub fn query(&mut self, y: f64) -> Result<f64, FeedbackError> {
        if !self.permits(y) {
            self.violations += 1;
            TOTAL_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            return Err(FeedbackError::ForbiddenQuery {
                model: self.model,
                played: self.played_value(),
                requested: y,
            });
        }
        self.queries += 1;
        Ok(self.loss.eval(y))
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }
}

/// Losses indexed by action index, possibly behind a guard.
pub trait LossSource {
    fn loss_at(&mut self, index: usize) -> Result<f64, FeedbackError>;
}

/// Fully known loss vector (tests and full-information updates).
#[derive(Debug, Clone, Copy)]
pub struct KnownLosses<'a>(pub &'a [f64]);

impl LossSource for KnownLosses<'_> {
    fn loss_at(&mut self, index: usize) -> Result<f64, FeedbackError> {
        Ok(self.0[index])
    }
}

/// Guard-backed reads of action values by index, each read at most once.
pub struct ObservedGrid<'g, 'a> {
    guard: &'g mut GuardedFeedback<'a>,
    values: &'g [f64],
    cache: Vec<f64>,
}

impl<'g, 'a> ObservedGrid<'g, 'a> {
    pub fn new(guard: &'g mut GuardedFeedback<'a>, values: &'g [f64]) -> Self {
        let cache = vec![f64::NAN; values.len()];
        Self { guard, values, cache }
    }
}

impl LossSource for ObservedGrid<'_, '_> {
    fn loss_at(&mut self, index: usize) -> Result<f64, FeedbackError> {
        let c = self.cache[index];
        if !c.is_nan() {
            return Ok(c);
        }
        let v = self.guard.query(self.values[index])?;
        self.cache[index] = v;
        Ok(v)
    }
}
