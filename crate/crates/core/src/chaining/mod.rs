//! Covering trees over a finite function dictionary and the chaining
//! learners that run on them.

mod dictionary;
mod hier_exp4;
mod hier_hedge;
mod tree;

pub use dictionary::{FunctionDictionary, Policy, PolicyFn};
pub use hier_exp4::{default_gamma, depth_for, HierExp4};
pub use tree::SparseDist;
pub use hier_hedge::{hedge_epsilon, HierHedge};
pub use tree::{CoveringTree, RoundPlan, TreeError, TreeNode};
