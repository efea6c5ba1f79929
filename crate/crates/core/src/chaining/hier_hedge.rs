use super::dictionary::FunctionDictionary;
use super::tree::{CoveringTree, RoundPlan, TreeError};
use crate::domain::{
    ActionGrid, Context, FeedbackModel, GuardedFeedback, LossSource, ObservedGrid, RandomSource,
};
use crate::experts::AdaptiveRate;
use crate::learner::{Learner, LearnerError, Play};

/// Cover radius `(1/T)^(1/d)`.
pub fn hedge_epsilon(horizon: u64, dimension: usize) -> f64 {
    (1.0 / horizon as f64).powf(1.0 / dimension.max(1) as f64)
}

/// Hedge instances on a covering tree with full information.
#[derive(Debug, Clone)]
pub struct HierHedge {
    dict: FunctionDictionary,
    tree: CoveringTree,
    actions: Vec<f64>,
}

impl HierHedge {
    /// Tree of depth `floor(log2(1/epsilon))` over the uniform `epsilon`-cover.
    pub fn new(dict: FunctionDictionary, epsilon: f64) -> Result<Self, TreeError> {
        let actions = ActionGrid::cover(epsilon)
            .map(|g| g.values())
            .map_err(|_| TreeError::BadGrid { dimension: dict.dimension(), resolution: 0 })?;
        Self::with_actions(dict, super::depth_for(epsilon), actions)
    }

    /// Explicit depth and finite action set (sorted ascending).
    pub fn with_actions(
        dict: FunctionDictionary,
        depth: usize,
        mut actions: Vec<f64>,
    ) -> Result<Self, TreeError> {
        actions.sort_by(f64::total_cmp);
        let mut tree = CoveringTree::build(&dict, depth)?;
        tree.reset_weights(|level, children| {
            AdaptiveRate::with_cap(children, 1.0 / (8.0 * 0.5f64.powi(level as i32)).min(1.0))
        });
        Ok(Self { dict, tree, actions })
    }

    pub fn tree(&self) -> &CoveringTree {
        &self.tree
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    /// Closest action to `y`, lower one on ties.
    pub fn nearest_action(&self, y: f64) -> usize {
        let a = &self.actions;
        let hi = a.partition_point(|&v| v < y);
        if hi == 0 {
            return 0;
        }
        if hi == a.len() {
            return a.len() - 1;
        }
        if y - a[hi - 1] <= a[hi] - y {
            hi - 1
        } else {
            hi
        }
    }

    pub fn plan(&self, x: &Context) -> RoundPlan {
        self.tree.plan(
            |member| self.nearest_action(self.dict.eval(member, x)),
            self.actions.len(),
            0.0,
        )
    }

    /// Updates every internal node with exact expert losses.
    pub fn update<S: LossSource + ?Sized>(
        &mut self,
        plan: &RoundPlan,
        src: &mut S,
    ) -> Result<(), LearnerError> {
        let internal = self.tree.branching_nodes().to_vec();
        for v in internal {
            let mut losses = Vec::with_capacity(self.tree.node(v).children.len());
            for &w in &self.tree.node(v).children {
                let mut l = 0.0;
                for &(i, p) in plan.dist(w) {
                    l += p * src.loss_at(i)?;
                }
                losses.push(l);
            }
            self.tree.apply_expert_losses(v, &plan.weights[v], &losses);
        }
        Ok(())
    }
}

impl Learner for HierHedge {
    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::Full
    }

    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        let plan = self.plan(context);
        let played = rng.categorical(&plan.root_mixture);
        guard.record_play(played, self.actions[played])?;
        let actions = self.actions.clone();
        let mut src = ObservedGrid::new(guard, &actions);
        self.update(&plan, &mut src)?;
        Ok(Play::from_dense(played, &actions, &plan.root_mixture))
    }
}
