//! Contextual online learning on `[0,1]` actions under bandit, one-sided and
//! full-information feedback.
//!
//! Learners range from flat ball covers running Exp3 / Exp3-RTB, through
//! chaining over covering trees of a function dictionary, to a dyadic
//! wavelet-style tree whose per-round cost does not depend on a dictionary.
//! [`harness`] runs them against generated environments and measures regret.

pub mod chaining;
pub mod chaining_efficient;
pub mod domain;
pub mod environments;
pub mod experts;
pub mod flat_contextual;
pub mod harness;
pub mod learner;

pub use learner::{Learner, LearnerError, Play};
