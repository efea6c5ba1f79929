use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domain::{Context, Regularity};
use crate::environments::Round;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComparatorError {
    #[error("brute-force comparator needs {0} occupied bins, above the limit of 6")]
    TooManyBins(usize),
    #[error("brute-force comparator exceeded its budget of {0} states")]
    TooLarge(u64),
    #[error("comparator needs at least one round")]
    Empty,
    #[error("unknown comparator class {0:?}")]
    UnknownClass(String),
    #[error("context bins and action points must be at least 1 and 2")]
    BadResolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparatorClass {
    /// Best single action.
    BestConstant,
    /// Best 1-Lipschitz map from contexts to actions.
    Lipschitz,
}

impl fmt::Display for ComparatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComparatorClass::BestConstant => "constant",
            ComparatorClass::Lipschitz => "lipschitz",
        })
    }
}

impl FromStr for ComparatorClass {
    type Err = ComparatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(ComparatorClass::BestConstant),
            "lipschitz" => Ok(ComparatorClass::Lipschitz),
            other => Err(ComparatorError::UnknownClass(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparatorSpec {
    pub class: ComparatorClass,
    /// Context bins per axis.
    pub context_bins: usize,
    /// Action grid `{0, 1/(A-1), ..., 1}`.
    pub action_points: usize,
    /// Search states allowed for the brute force in `d >= 2`.
    pub budget: u64,
}

impl ComparatorSpec {
    pub fn new(class: ComparatorClass, context_bins: usize, action_points: usize) -> Self {
        Self { class, context_bins, action_points, budget: 20_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorResult {
    pub total: f64,
    /// Loss of the optimizer at each round.
    pub per_round: Vec<f64>,
    /// Discretization allowance: `T` times the grid resolution(s).
    pub slack: f64,
}

impl ComparatorResult {
    pub fn prefix(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.per_round
            .iter()
            .map(|l| {
                acc += l;
                acc
            })
            .collect()
    }
}

fn action_value(k: usize, points: usize) -> f64 {
    k as f64 / (points - 1) as f64
}

/// Minimal cumulative loss over the comparator class.
pub fn comparator_value(
    rounds: &[Round],
    spec: &ComparatorSpec,
) -> Result<ComparatorResult, ComparatorError> {
    if rounds.is_empty() {
        return Err(ComparatorError::Empty);
    }
    if spec.context_bins == 0 || spec.action_points < 2 {
        return Err(ComparatorError::BadResolution);
    }
    let t = rounds.len() as f64;
    let step = 1.0 / (spec.action_points - 1) as f64;
    match spec.class {
        ComparatorClass::BestConstant => {
            let mut result = best_constant(rounds, spec.action_points);
            result.slack = t * step;
            Ok(result)
        }
        ComparatorClass::Lipschitz => {
            let d = rounds[0].context.dimension();
            let mut result = if d == 1 {
                lipschitz_dp(rounds, spec.context_bins, spec.action_points)
            } else {
                lipschitz_brute_force(rounds, spec.context_bins, spec.action_points, spec.budget)?
            };
            result.slack = t * (step + 1.0 / spec.context_bins as f64);
            Ok(result)
        }
    }
}

/// Grid search, plus the breakpoints of any discontinuous loss, where the
/// optimum of such sums sits.
pub fn best_constant(rounds: &[Round], action_points: usize) -> ComparatorResult {
    let mut candidates: Vec<f64> = (0..action_points).map(|k| action_value(k, action_points)).collect();
    for r in rounds {
        if r.loss.regularity == Regularity::SemiLipschitz {
            candidates.extend(r.loss.breakpoints());
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = (f64::INFINITY, 0.0);
    for &y in &candidates {
        let total: f64 = rounds.iter().map(|r| r.loss.eval(y)).sum();
        if total < best.0 {
            best = (total, y);
        }
    }
    let per_round = rounds.iter().map(|r| r.loss.eval(best.1)).collect();
    ComparatorResult { total: best.0, per_round, slack: 0.0 }
}

fn bin_of(x: &Context, bins: usize) -> Vec<usize> {
    x.coords()
        .iter()
        .map(|&v| ((v.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1))
        .collect()
}

/// Largest index shift between two bins `cells` apart.
fn max_shift(cells: usize, bins: usize, action_points: usize) -> usize {
    (cells as f64 / bins as f64 * (action_points - 1) as f64 + 1e-9).floor() as usize
}

struct Binned {
    keys: Vec<Vec<usize>>,
    /// `costs[b][k]`: total loss of bin `b`'s rounds at action `k`.
    costs: Vec<Vec<f64>>,
    round_bin: Vec<usize>,
}

fn bin_rounds(rounds: &[Round], bins: usize, action_points: usize) -> Binned {
    let mut keys: Vec<Vec<usize>> = rounds.iter().map(|r| bin_of(&r.context, bins)).collect();
    keys.sort();
    keys.dedup();
    let round_bin: Vec<usize> = rounds
        .iter()
        .map(|r| keys.binary_search(&bin_of(&r.context, bins)).unwrap())
        .collect();
    let mut costs = vec![vec![0.0; action_points]; keys.len()];
    for (r, &b) in rounds.iter().zip(&round_bin) {
        for (k, c) in costs[b].iter_mut().enumerate() {
            *c += r.loss.eval(action_value(k, action_points));
        }
    }
    Binned { keys, costs, round_bin }
}

fn finish(rounds: &[Round], binned: &Binned, assignment: &[usize], points: usize) -> ComparatorResult {
    let per_round: Vec<f64> = rounds
        .iter()
        .zip(&binned.round_bin)
        .map(|(r, &b)| r.loss.eval(action_value(assignment[b], points)))
        .collect();
    ComparatorResult { total: per_round.iter().sum(), per_round, slack: 0.0 }
}

/// Dynamic program over occupied bins in order for `d = 1`.
pub fn lipschitz_dp(rounds: &[Round], bins: usize, action_points: usize) -> ComparatorResult {
    let binned = bin_rounds(rounds, bins, action_points);
    let n = binned.keys.len();
    let mut value = binned.costs[0].clone();
    let mut choice: Vec<Vec<usize>> = vec![Vec::new(); n];
    for b in 1..n {
        let shift = max_shift(binned.keys[b][0] - binned.keys[b - 1][0], bins, action_points);
        let mut next = vec![0.0; action_points];
        let mut arg = vec![0; action_points];
        for k in 0..action_points {
            let lo = k.saturating_sub(shift);
            let hi = (k + shift).min(action_points - 1);
            let mut best = (f64::INFINITY, lo);
            for (j, &v) in value.iter().enumerate().take(hi + 1).skip(lo) {
                if v < best.0 {
                    best = (v, j);
                }
            }
            next[k] = binned.costs[b][k] + best.0;
            arg[k] = best.1;
        }
        value = next;
        choice[b] = arg;
    }
    let mut k = (0..action_points).fold(0, |best, k| if value[k] < value[best] { k } else { best });
    let mut assignment = vec![0; n];
    for b in (0..n).rev() {
        assignment[b] = k;
        if b > 0 {
            k = choice[b][k];
        }
    }
    finish(rounds, &binned, &assignment, action_points)
}

/// Exhaustive search over assignments of occupied bins to grid actions
/// respecting the pairwise Lipschitz constraint.
pub fn lipschitz_brute_force(
    rounds: &[Round],
    bins: usize,
    action_points: usize,
    budget: u64,
) -> Result<ComparatorResult, ComparatorError> {
    let binned = bin_rounds(rounds, bins, action_points);
    let n = binned.keys.len();
    if n > 6 {
        return Err(ComparatorError::TooManyBins(n));
    }
    let shift: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let cells = binned.keys[a]
                        .iter()
                        .zip(&binned.keys[b])
                        .map(|(x, y)| x.abs_diff(*y))
                        .max()
                        .unwrap_or(0);
                    max_shift(cells, bins, action_points)
                })
                .collect()
        })
        .collect();
    let mins: Vec<f64> =
        binned.costs.iter().map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let mut rest = vec![0.0; n + 1];
    for b in (0..n).rev() {
        rest[b] = rest[b + 1] + mins[b];
    }
    struct Search<'a> {
        costs: &'a [Vec<f64>],
        shift: &'a [Vec<usize>],
        rest: &'a [f64],
        current: Vec<usize>,
        best: (f64, Vec<usize>),
        visited: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn go(&mut self, b: usize, acc: f64) -> Result<(), ComparatorError> {
            if b == self.costs.len() {
                if acc < self.best.0 {
                    self.best = (acc, self.current.clone());
                }
                return Ok(());
            }
            for k in 0..self.costs[b].len() {
                self.visited += 1;
                if self.visited > self.budget {
                    return Err(ComparatorError::TooLarge(self.budget));
                }
                let ok = (0..b).all(|a| self.current[a].abs_diff(k) <= self.shift[a][b]);
                let cost = acc + self.costs[b][k];
                if ok && cost + self.rest[b + 1] < self.best.0 {
                    self.current.push(k);
                    self.go(b + 1, cost)?;
                    self.current.pop();
                }
            }
            Ok(())
        }
    }
    let mut search = Search {
        costs: &binned.costs,
        shift: &shift,
        rest: &rest,
        current: Vec::new(),
        best: (f64::INFINITY, Vec::new()),
        visited: 0,
        budget,
    };
    search.go(0, 0.0)?;
    let assignment = search.best.1.clone();
    Ok(finish(rounds, &binned, &assignment, action_points))
}
