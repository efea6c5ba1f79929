//! Dyadic partitions, wavelet-style approximation of Lipschitz functions and
//! the binning/Exp4 tree learner with penalized estimates.

mod dyadic;
mod schedule;
mod star;

pub use dyadic::{DyadicIndex, WaveletCoefficients};
pub use schedule::{star_schedule, ScheduleError, StarSchedule};
pub use star::{
    enumerate_exp4_nodes, exp4_node_count, leaf_action, DyadicTree, HierExp4Star, NodeKey,
    StarPlan,
};
