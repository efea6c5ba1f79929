//! Shared domain types: action grids, contexts, losses, feedback guards and
//! seeded randomness.

mod context;
mod feedback;
mod grid;
mod loss;
mod random;

pub use context::Context;
pub use feedback::{
    total_violations, FeedbackError, FeedbackModel, GuardedFeedback, KnownLosses, LossSource,
    ObservedGrid,
};
pub use grid::{ActionGrid, GridError};
pub use loss::{verify_regularity, Dip, LossFunction, LossShape, Regularity};
pub use random::{is_distribution, sample_inverse_cdf, RandomSource};
