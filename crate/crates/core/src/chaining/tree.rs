use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use super::dictionary::FunctionDictionary;
use crate::experts::{hedge_distribution, AdaptiveRate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("dictionary is empty")]
    EmptyDictionary,
    #[error("invalid evaluation grid: dimension {dimension}, resolution {resolution}")]
    BadGrid { dimension: usize, resolution: usize },
    #[error("dictionary member {0} is not 1-Lipschitz on the evaluation grid")]
    NotLipschitz(String),
    #[error("level {level} net has radius {radius}, above {bound}")]
    CoverTooCoarse { level: usize, radius: f64, bound: f64 },
    #[error("node {node} at level {level} has leaf spread {spread}, above {bound}")]
    LeafSpread { node: usize, level: usize, spread: f64, bound: f64 },
}

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub level: usize,
    /// Index of the node's function in the dictionary.
    pub member: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Expert weights of an internal node over its children.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub cum: Vec<f64>,
    pub rate: AdaptiveRate,
}

/// Nested sup-norm nets of a dictionary, level `m` being a `2^-m` cover.
///
/// Nodes are numbered level by level, so node 0 is the root and the leaves
/// are the last level.
#[derive(Debug, Clone)]
pub struct CoveringTree {
    depth: usize,
    nodes: Vec<TreeNode>,
    levels: Vec<Vec<usize>>,
    states: Vec<Option<NodeState>>,
    /// First level from which every node has a single child down to a leaf.
    collapse: usize,
    /// Plan slot of each node; chain nodes share their leaf's slot.
    slot: Arc<[usize]>,
    branching: Vec<usize>,
}

/// Sparse action distribution, sorted by index, positive masses only.
pub type SparseDist = Vec<(usize, f64)>;

/// Everything computed before sampling in one round.
#[derive(Debug, Clone)]
pub struct RoundPlan {
    /// Concatenated sparse distributions; `spans` gives each slot's range.
    pub entries: Vec<(usize, f64)>,
    /// Ranges by slot: branching nodes first, then leaves.
    pub spans: Vec<(usize, usize)>,
    pub slot: Arc<[usize]>,
    /// Weights over children per branching node.
    pub weights: Vec<Vec<f64>>,
    /// Root distribution mixed with the exploration floor on index 0.
    pub root_mixture: Vec<f64>,
}

impl RoundPlan {
    pub fn dist(&self, v: usize) -> &[(usize, f64)] {
        let (lo, hi) = self.spans[self.slot[v]];
        &self.entries[lo..hi]
    }

    /// Action recommended by the leaf below `v`, if `v` is on a chain.
    pub fn recommendation(&self, v: usize) -> Option<usize> {
        if self.slot[v] < self.weights.len() {
            return None;
        }
        self.dist(v).first().map(|e| e.0)
    }

    /// Indices with positive mass at node `v`.
    pub fn support(&self, v: usize) -> Vec<usize> {
        self.dist(v).iter().map(|e| e.0).collect()
    }

    pub fn anchor(&self, v: usize) -> Option<usize> {
        self.dist(v).last().map(|e| e.0)
    }

    /// Weights over children; a single child always gets weight 1.
    pub fn weights_at(&self, v: usize) -> &[f64] {
        if v >= self.weights.len() {
            &[1.0]
        } else {
            &self.weights[v]
        }
    }
}

/// Farthest-point ordering from `start`; returns the order and the covering
/// radius after each prefix (`radii[k]` for the first `k + 1` centers).
fn farthest_point_order(
    dict: &FunctionDictionary,
    start: usize,
    stop_radius: f64,
) -> (Vec<usize>, Vec<f64>) {
    let n = dict.len();
    let mut order = vec![start];
    let mut mind: Vec<f64> = (0..n).map(|i| dict.distance(start, i)).collect();
    let mut radii = Vec::new();
    loop {
        let (far, r) = mind
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        radii.push(r);
        if r <= stop_radius + TOL {
            break;
        }
        order.push(far);
        for (i, m) in mind.iter_mut().enumerate() {
            *m = m.min(dict.distance(far, i));
        }
    }
    (order, radii)
}

/// Member minimizing the largest distance to all others.
fn central_member(dict: &FunctionDictionary) -> usize {
    let n = dict.len();
    let mut best = (0, f64::INFINITY);
    for i in 0..n {
        let ecc = (0..n).map(|j| dict.distance(i, j)).fold(0.0, f64::max);
        if ecc < best.1 {
            best = (i, ecc);
        }
    }
    best.0
}

impl CoveringTree {
    pub fn build(dict: &FunctionDictionary, depth: usize) -> Result<Self, TreeError> {
        if dict.is_empty() {
            return Err(TreeError::EmptyDictionary);
        }
        let finest = 0.5f64.powi(depth as i32);
        let (order, radii) = farthest_point_order(dict, central_member(dict), finest);

        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut levels: Vec<Vec<usize>> = Vec::new();
        for m in 0..=depth {
            let bound = 0.5f64.powi(m as i32);
            let size = radii.iter().position(|&r| r <= bound + TOL).map_or(order.len(), |k| k + 1);
            if radii[size - 1] > bound + TOL {
                return Err(TreeError::CoverTooCoarse { level: m, radius: radii[size - 1], bound });
            }
            let mut ids = Vec::with_capacity(size);
            for &member in &order[..size] {
                let id = nodes.len();
                let parent = levels.last().map(|prev: &Vec<usize>| {
                    let mut best = (prev[0], f64::INFINITY);
                    for &p in prev {
                        let d = dict.distance(nodes[p].member, member);
                        if d < best.1 {
                            best = (p, d);
                        }
                    }
                    best.0
                });
                if let Some(p) = parent {
                    nodes[p].children.push(id);
                }
                nodes.push(TreeNode { level: m, member, parent, children: Vec::new() });
                ids.push(id);
            }
            levels.push(ids);
        }
        let states = vec![None; nodes.len()];
        let leaf_count = levels[depth].len();
        let collapse = (0..=depth)
            .find(|&m| levels[m..].iter().all(|l| l.len() == leaf_count))
            .unwrap_or(depth);
        let branching: Vec<usize> =
            (0..nodes.len()).filter(|&v| nodes[v].level < collapse).collect();
        let first_leaf = levels[depth][0];
        let mut slot: Vec<usize> = (0..nodes.len()).collect();
        for v in branching.len()..nodes.len() {
            let mut u = v;
            while let Some(&c) = nodes[u].children.first() {
                u = c;
            }
            slot[v] = branching.len() + u - first_leaf;
        }
        let tree =
            Self { depth, nodes, levels, states, collapse, slot: slot.into(), branching };
        tree.check_leaf_spread(dict)?;
        Ok(tree)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &TreeNode {
        &self.nodes[v]
    }

    pub fn level(&self, m: usize) -> &[usize] {
        &self.levels[m]
    }

    pub fn leaves(&self) -> &[usize] {
        &self.levels[self.depth]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].level == self.depth
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&v| !self.is_leaf(v))
    }

    /// Internal nodes with more than a pass-through role, i.e. above the
    /// level where the nets stop growing. Nodes below it have one child and
    /// weight 1 on it whatever their losses, so learners skip them.
    pub fn branching_nodes(&self) -> &[usize] {
        &self.branching
    }

    pub fn collapse_level(&self) -> usize {
        self.collapse
    }

    pub fn leaves_under(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if self.is_leaf(u) {
                out.push(u);
            } else {
                stack.extend(self.nodes[u].children.iter().rev());
            }
        }
        out.sort_unstable();
        out
    }

    /// Largest sup distance between two leaves below `v`.
    pub fn leaf_spread(&self, dict: &FunctionDictionary, v: usize) -> f64 {
        let leaves = self.leaves_under(v);
        let mut spread: f64 = 0.0;
        for (a, &u) in leaves.iter().enumerate() {
            for &w in &leaves[a + 1..] {
                spread = spread.max(dict.distance(self.nodes[u].member, self.nodes[w].member));
            }
        }
        spread
    }

    /// Checks `leaf_spread(v) <= 2^(2 - level)` at every internal node.
    pub fn check_leaf_spread(&self, dict: &FunctionDictionary) -> Result<(), TreeError> {
        for v in self.internal_nodes() {
            let level = self.nodes[v].level;
            let bound = 4.0 * 0.5f64.powi(level as i32);
            let spread = self.leaf_spread(dict, v);
            if spread > bound + TOL {
                return Err(TreeError::LeafSpread { node: v, level, spread, bound });
            }
        }
        Ok(())
    }

    /// Tab-separated `id level parent label`, `-` for the root's parent.
    pub fn dump(&self, dict: &FunctionDictionary) -> String {
        let mut s = String::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let parent = n.parent.map_or_else(|| "-".to_string(), |p| p.to_string());
            let _ = writeln!(s, "{id}\t{}\t{parent}\t{}", n.level, dict.member(n.member).label);
        }
        s
    }

    // ── learning state ──

    /// Fresh uniform weights at every internal node; `rate(level, children)`.
    pub fn reset_weights(&mut self, rate: impl Fn(usize, usize) -> AdaptiveRate) {
        for v in 0..self.nodes.len() {
            let n = &self.nodes[v];
            self.states[v] = if n.children.is_empty() {
                None
            } else {
                Some(NodeState {
                    cum: vec![0.0; n.children.len()],
                    rate: rate(n.level, n.children.len()),
                })
            };
        }
    }

    pub fn state(&self, v: usize) -> Option<&NodeState> {
        self.states[v].as_ref()
    }

    pub fn weights(&self, v: usize) -> Vec<f64> {
        match &self.states[v] {
            Some(s) => hedge_distribution(&s.cum, s.rate.rate()),
            None => Vec::new(),
        }
    }

    /// Records one round of expert losses at `v` given the weights in play.
    pub fn apply_expert_losses(&mut self, v: usize, weights: &[f64], losses: &[f64]) {
        if let Some(s) = self.states[v].as_mut() {
            s.rate.observe(weights, losses);
            for (c, l) in s.cum.iter_mut().zip(losses) {
                *c += l;
            }
        }
    }

    /// Bottom-up mixture given each leaf's recommended index.
    pub fn plan(
        &self,
        recommend: impl Fn(usize) -> usize,
        actions: usize,
        gamma: f64,
    ) -> RoundPlan {
        let b = self.branching.len();
        let leaves = self.leaves();
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(2 * leaves.len());
        let mut spans = vec![(0, 0); b + leaves.len()];
        for (k, &leaf) in leaves.iter().enumerate() {
            entries.push((recommend(self.nodes[leaf].member), 1.0));
            spans[b + k] = (k, k + 1);
        }
        let mut weights: Vec<Vec<f64>> = vec![Vec::new(); b];
        let mut acc = vec![0.0; actions];
        let mut touched: Vec<usize> = Vec::new();
        for m in (0..self.collapse).rev() {
            for &v in &self.levels[m] {
                let q = self.weights(v);
                for (&w, &qw) in self.nodes[v].children.iter().zip(&q) {
                    let (lo, hi) = spans[self.slot[w]];
                    for &(i, p) in &entries[lo..hi] {
                        if acc[i] == 0.0 {
                            touched.push(i);
                        }
                        acc[i] += qw * p;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let start = entries.len();
                for &i in &touched {
                    if acc[i] > 0.0 {
                        entries.push((i, acc[i]));
                    }
                    acc[i] = 0.0;
                }
                touched.clear();
                spans[v] = (start, entries.len());
                weights[v] = q;
            }
        }
        let mut root_mixture = vec![0.0; actions];
        let (lo, hi) = spans[self.slot[0]];
        for &(i, p) in &entries[lo..hi] {
            root_mixture[i] = (1.0 - gamma) * p;
        }
        root_mixture[0] += gamma;
        RoundPlan { entries, spans, slot: self.slot.clone(), weights, root_mixture }
    }
}
