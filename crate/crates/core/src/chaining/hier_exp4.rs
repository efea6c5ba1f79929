use super::dictionary::FunctionDictionary;
use super::tree::{CoveringTree, RoundPlan, TreeError};
use crate::domain::{
    ActionGrid, Context, FeedbackModel, GuardedFeedback, LossSource, ObservedGrid, RandomSource,
};
use crate::experts::{cumulative, exp4_range_estimates, AdaptiveRate, EstimateError};
use crate::learner::{Learner, LearnerError, Play};

/// `floor(log2(1/gamma))`, clamped at 0.
pub fn depth_for(gamma: f64) -> usize {
    if gamma >= 1.0 {
        return 0;
    }
    ((1.0 / gamma).log2() + 1e-9).floor().max(0.0) as usize
}

/// Exploration rate balancing the chaining bound for Lipschitz policies.
pub fn default_gamma(horizon: u64, dimension: usize) -> f64 {
    let t = horizon as f64;
    let g = match dimension {
        0 | 1 => t.powf(-1.0 / 3.0),
        2 => t.powf(-1.0 / 3.0) * t.ln().powf(2.0 / 3.0),
        d => t.powf(-1.0 / (d as f64 + 1.0)),
    };
    g.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Exp4 instances on a covering tree with one-sided feedback.
#[derive(Debug, Clone)]
pub struct HierExp4 {
    dict: FunctionDictionary,
    tree: CoveringTree,
    grid: ActionGrid,
    values: Vec<f64>,
    gamma: f64,
}

impl HierExp4 {
    pub fn new(dict: FunctionDictionary, gamma: f64) -> Result<Self, TreeError> {
        let depth = depth_for(gamma);
        Self::with_depth(dict, gamma, depth)
    }

    pub fn with_depth(
        dict: FunctionDictionary,
        gamma: f64,
        depth: usize,
    ) -> Result<Self, TreeError> {
        let mut tree = CoveringTree::build(&dict, depth)?;
        tree.reset_weights(|level, children| {
            AdaptiveRate::with_floor(children, gamma, (8.0 * 0.5f64.powi(level as i32)).min(1.0))
        });
        let grid = ActionGrid::hier(depth as u32);
        Ok(Self { values: grid.values(), dict, tree, grid, gamma })
    }

    pub fn tree(&self) -> &CoveringTree {
        &self.tree
    }

    pub fn dictionary(&self) -> &FunctionDictionary {
        &self.dict
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn plan(&self, x: &Context) -> RoundPlan {
        let (dict, grid) = (&self.dict, &self.grid);
        self.tree.plan(|member| grid.nearest_index(dict.eval(member, x)), grid.count(), self.gamma)
    }

    /// Range-adaptive Exp4 update of every internal node.
    pub fn update<S: LossSource + ?Sized>(
        &mut self,
        plan: &RoundPlan,
        played: usize,
        src: &mut S,
    ) -> Result<(), EstimateError> {
        let cdf = cumulative(&plan.root_mixture);
        let mut scratch = vec![0.0; self.grid.count()];
        let internal = self.tree.branching_nodes().to_vec();
        for v in internal {
            let support = plan.support(v);
            let est = exp4_range_estimates(src, &support, &cdf, played)?;
            for (&i, &e) in support.iter().zip(&est) {
                scratch[i] = e;
            }
            let losses: Vec<f64> = self
                .tree
                .node(v)
                .children
                .iter()
                .map(|&w| plan.dist(w).iter().map(|&(i, p)| p * scratch[i]).sum())
                .collect();
            for &i in &support {
                scratch[i] = 0.0;
            }
            self.tree.apply_expert_losses(v, &plan.weights[v], &losses);
        }
        Ok(())
    }
}

impl Learner for HierExp4 {
    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::OneSidedFull
    }

    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        let plan = self.plan(context);
        let played = rng.categorical(&plan.root_mixture);
        guard.record_play(played, self.values[played])?;
        let values = self.values.clone();
        let mut src = ObservedGrid::new(guard, &values);
        self.update(&plan, played, &mut src)?;
        Ok(Play::from_dense(played, &values, &plan.root_mixture))
    }
}
