use std::collections::HashMap;

use super::dyadic::DyadicIndex;
use super::schedule::StarSchedule;
use crate::domain::{
    ActionGrid, Context, FeedbackModel, GuardedFeedback, LossSource, ObservedGrid, RandomSource,
};
use crate::experts::{cumulative, exp4_penalized_estimates, hedge_distribution, EstimateError};
use crate::learner::{Learner, LearnerError, Play};

/// Identifies an Exp4 node: its level `m` (it sits between binning depths
/// `m` and `m + 1`), the depth-`m+1` cube, and the coefficient prefix
/// `c_1..c_m` in base 3 (digit `c + 1`, `c_1` most significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub level: u32,
    pub cube: u64,
    pub code: u64,
}

/// 1-based action index of the leaf with coefficient code `code` (length
/// `depth`), projected onto `1..=2^depth`.
pub fn leaf_action(code: u64, depth: u32) -> usize {
    let mut label: i64 = 1 << (depth - 1);
    let mut rest = code;
    for j in (1..=depth).rev() {
        let c = (rest % 3) as i64 - 1;
        rest /= 3;
        label += c << (depth - j);
    }
    label.clamp(1, 1 << depth) as usize
}

/// `sum_{m < M} 3^m 2^(d (m + 1))`.
pub fn exp4_node_count(dimension: usize, depth: u32) -> u128 {
    (0..depth).map(|m| 3u128.pow(m) << (dimension as u32 * (m + 1))).sum()
}

/// Counts Exp4 nodes by walking every binning node of the full tree.
pub fn enumerate_exp4_nodes(dimension: usize, depth: u32) -> u128 {
    let children = 1u64 << dimension;
    // binning nodes at depth m are (cube at depth m, prefix code)
    let mut binning: Vec<(u64, u64)> = vec![(0, 0)];
    let mut total = 0u128;
    for m in 0..depth {
        let mut next = Vec::with_capacity(binning.len() * children as usize * 3);
        for &(cube, code) in &binning {
            let parent = DyadicIndex::from_flat(cube, m, dimension);
            for sigma in 0..children {
                let child: u64 = parent
                    .cells()
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| ((c << 1) | ((sigma >> i) & 1)) << ((m as usize + 1) * i))
                    .sum();
                total += 1;
                if m + 1 < depth {
                    for digit in 0..3 {
                        next.push((child, code * 3 + digit));
                    }
                }
            }
        }
        binning = next;
    }
    total
}

/// Sparse per-node weight state of the binning/Exp4 tree.
#[derive(Debug, Clone)]
pub struct DyadicTree {
    dimension: usize,
    depth: u32,
    cum: HashMap<NodeKey, [f64; 3]>,
}

impl DyadicTree {
    pub fn new(dimension: usize, depth: u32) -> Self {
        Self { dimension, depth, cum: HashMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Exp4 nodes on the path of `x`, level by level, codes ascending.
    pub fn activate_path(&self, x: &[f64]) -> Vec<NodeKey> {
        let mut out = Vec::new();
        for level in 0..self.depth {
            let cube = DyadicIndex::of(x, level + 1).flat();
            for code in 0..3u64.pow(level) {
                out.push(NodeKey { level, cube, code });
            }
        }
        out
    }

    /// Cumulative estimated losses of the three children; zeros if unseen.
    pub fn cumulative(&self, key: &NodeKey) -> [f64; 3] {
        self.cum.get(key).copied().unwrap_or([0.0; 3])
    }

    pub fn add(&mut self, key: NodeKey, losses: [f64; 3]) {
        let e = self.cum.entry(key).or_insert([0.0; 3]);
        for (c, l) in e.iter_mut().zip(losses) {
            *c += l;
        }
    }

    /// Nodes that have been updated at least once.
    pub fn stored_nodes(&self) -> usize {
        self.cum.len()
    }
}

/// Distribution over a contiguous index range.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDist {
    pub start: usize,
    pub probs: Vec<f64>,
}

impl RangeDist {
    fn unit(i: usize) -> Self {
        Self { start: i, probs: vec![1.0] }
    }

    fn mix(parts: [&RangeDist; 3], q: [f64; 3]) -> Self {
        let start = parts.iter().map(|p| p.start).min().unwrap();
        let end = parts.iter().map(|p| p.start + p.probs.len()).max().unwrap();
        let mut probs = vec![0.0; end - start];
        for (p, w) in parts.iter().zip(q) {
            for (k, &v) in p.probs.iter().enumerate() {
                probs[p.start + k - start] += w * v;
            }
        }
        Self { start, probs }
    }

    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, _)| self.start + k)
            .collect()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.probs.iter().zip(&dense[self.start..]).map(|(p, l)| p * l).sum()
    }
}

/// Per-round state of the dyadic learner before sampling.
#[derive(Debug, Clone)]
pub struct StarPlan {
    /// `keys[m][code]` for the active Exp4 nodes.
    pub keys: Vec<Vec<NodeKey>>,
    /// `dists[m][code]`; `dists[depth]` holds the leaves.
    pub dists: Vec<Vec<RangeDist>>,
    pub weights: Vec<Vec<[f64; 3]>>,
    pub root_mixture: Vec<f64>,
}

/// Binning/Exp4 tree learner with penalized estimates and fixed per-level rates.
#[derive(Debug, Clone)]
pub struct HierExp4Star {
    tree: DyadicTree,
    schedule: StarSchedule,
    grid: ActionGrid,
    values: Vec<f64>,
}

impl HierExp4Star {
    pub fn new(schedule: StarSchedule) -> Self {
        let grid = ActionGrid::star(schedule.depth);
        Self {
            tree: DyadicTree::new(schedule.dimension, schedule.depth),
            values: grid.values(),
            grid,
            schedule,
        }
    }

    pub fn tree(&self) -> &DyadicTree {
        &self.tree
    }

    pub fn schedule(&self) -> &StarSchedule {
        &self.schedule
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn plan(&self, x: &Context) -> StarPlan {
        let depth = self.schedule.depth;
        let leaves: Vec<RangeDist> =
            (0..3u64.pow(depth)).map(|code| RangeDist::unit(leaf_action(code, depth) - 1)).collect();
        let mut dists = vec![Vec::new(); depth as usize + 1];
        let mut keys = vec![Vec::new(); depth as usize];
        let mut weights = vec![Vec::new(); depth as usize];
        dists[depth as usize] = leaves;
        for level in (0..depth).rev() {
            let cube = DyadicIndex::of(x.coords(), level + 1).flat();
            let eta = self.schedule.rates[level as usize];
            let below = &dists[level as usize + 1];
            let mut here = Vec::with_capacity(3usize.pow(level));
            let mut lk = Vec::with_capacity(here.capacity());
            let mut lw = Vec::with_capacity(here.capacity());
            for code in 0..3u64.pow(level) {
                let key = NodeKey { level, cube, code };
                let q = hedge_distribution(&self.tree.cumulative(&key), eta);
                let q = [q[0], q[1], q[2]];
                let c = 3 * code as usize;
                here.push(RangeDist::mix([&below[c], &below[c + 1], &below[c + 2]], q));
                lk.push(key);
                lw.push(q);
            }
            dists[level as usize] = here;
            keys[level as usize] = lk;
            weights[level as usize] = lw;
        }
        let gamma = self.schedule.gamma;
        let mut root_mixture = vec![0.0; self.grid.count()];
        let root = &dists[0][0];
        for (k, &p) in root.probs.iter().enumerate() {
            root_mixture[root.start + k] = (1.0 - gamma) * p;
        }
        root_mixture[0] += gamma;
        StarPlan { keys, dists, weights, root_mixture }
    }

    /// Penalized Exp4 update of every active node.
    pub fn update<S: LossSource + ?Sized>(
        &mut self,
        plan: &StarPlan,
        played: usize,
        src: &mut S,
    ) -> Result<(), EstimateError> {
        let cdf = cumulative(&plan.root_mixture);
        let gamma = self.schedule.gamma;
        let mut scratch = vec![0.0; self.grid.count()];
        for level in 0..self.schedule.depth as usize {
            let range = 2.0 * 0.5f64.powi(level as i32);
            let alpha = self.schedule.penalties[level];
            for (code, key) in plan.keys[level].iter().enumerate() {
                let dist = &plan.dists[level][code];
                let support = dist.support();
                let est =
                    exp4_penalized_estimates(src, &support, &cdf, played, range, alpha, gamma)?;
                for (&i, &e) in support.iter().zip(&est) {
                    scratch[i] = e;
                }
                let below = &plan.dists[level + 1];
                let losses = [0, 1, 2].map(|c| below[3 * code + c].dot(&scratch));
                for &i in &support {
                    scratch[i] = 0.0;
                }
                self.tree.add(*key, losses);
            }
        }
        Ok(())
    }
}

impl Learner for HierExp4Star {
    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::OneSidedFull
    }

    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        if context.dimension() != self.schedule.dimension {
            return Err(LearnerError::DimensionMismatch {
                expected: self.schedule.dimension,
                got: context.dimension(),
            });
        }
        let plan = self.plan(context);
        let played = rng.categorical(&plan.root_mixture);
        guard.record_play(played, self.values[played])?;
        let values = self.values.clone();
        let mut src = ObservedGrid::new(guard, &values);
        self.update(&plan, played, &mut src)?;
        Ok(Play::from_dense(played, &values, &plan.root_mixture))
    }
}
