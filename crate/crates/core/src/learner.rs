//! The common interface the harness drives.

use thiserror::Error;

use crate::chaining::TreeError;
use crate::domain::{Context, FeedbackError, FeedbackModel, GuardedFeedback, RandomSource};
use crate::experts::EstimateError;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("context has dimension {got}, learner expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// What a learner did in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Play {
    pub index: usize,
    pub value: f64,
    /// Sampling distribution as `(action value, probability)` atoms.
    pub distribution: Vec<(f64, f64)>,
}

impl Play {
    pub fn from_dense(index: usize, values: &[f64], probs: &[f64]) -> Self {
        let distribution = values
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&v, &p)| (v, p))
            .collect();
        Self { index, value: values[index], distribution }
    }
}

pub trait Learner: Send {
    fn feedback_model(&self) -> FeedbackModel;

    /// Picks an action for `context`, records it on `guard`, reads whatever
    /// feedback it needs and updates its state.
    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError>;
}
