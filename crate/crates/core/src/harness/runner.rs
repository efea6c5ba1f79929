use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use super::comparator::{comparator_value, ComparatorClass, ComparatorError, ComparatorResult, ComparatorSpec};
use crate::chaining::{default_gamma, hedge_epsilon, FunctionDictionary, HierExp4, HierHedge, TreeError};
use crate::chaining_efficient::{HierExp4Star, ScheduleError, StarSchedule};
use crate::domain::{Context, FeedbackModel, GridError, GuardedFeedback, RandomSource};
use crate::environments::{generate_environment, EnvironmentError, EnvironmentKind, EnvironmentSpec, Round};
use crate::experts::Exp3Rtb;
use crate::flat_contextual::{ContextualExp3, ContextualRtb, PlainRtb};
use crate::learner::{Learner, LearnerError, Play};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Comparator(#[from] ComparatorError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("replicate {replicate}, round {round}: {source}")]
    Learner { replicate: usize, round: usize, source: LearnerError },
    #[error("replicate {replicate}, round {round}: feedback discipline violated")]
    FeedbackViolation { replicate: usize, round: usize },
}

impl RunError {
    /// Errors that signal a broken invariant rather than bad input.
    pub fn is_property_failure(&self) -> bool {
        matches!(self, RunError::Learner { .. } | RunError::FeedbackViolation { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    ContextualExp3,
    ContextualRtb,
    Exp3Rtb,
    HierExp4,
    HierExp4Star,
    HierHedge,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::ContextualExp3,
        Algorithm::ContextualRtb,
        Algorithm::Exp3Rtb,
        Algorithm::HierExp4,
        Algorithm::HierExp4Star,
        Algorithm::HierHedge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ContextualExp3 => "contextual-exp3",
            Algorithm::ContextualRtb => "contextual-rtb",
            Algorithm::Exp3Rtb => "exp3-rtb",
            Algorithm::HierExp4 => "hier-exp4",
            Algorithm::HierExp4Star => "hier-exp4-star",
            Algorithm::HierHedge => "hier-hedge",
        }
    }

    pub fn feedback_model(self) -> FeedbackModel {
        match self {
            Algorithm::ContextualExp3 => FeedbackModel::Bandit,
            Algorithm::HierHedge => FeedbackModel::Full,
            _ => FeedbackModel::OneSidedFull,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| RunError::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub environment: EnvironmentSpec,
    pub horizon: usize,
    pub replicates: usize,
    pub seed: u64,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub depth: Option<u32>,
    pub comparator: ComparatorSpec,
    pub dictionary_knots: usize,
    pub dictionary_levels: usize,
    pub dictionary_resolution: usize,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, kind: EnvironmentKind, dimension: usize, horizon: usize) -> Self {
        let class = if dimension == 1 { ComparatorClass::Lipschitz } else { ComparatorClass::BestConstant };
        Self {
            algorithm,
            environment: EnvironmentSpec::new(kind, dimension, horizon, 0),
            horizon,
            replicates: 1,
            seed: 0,
            gamma: None,
            epsilon: None,
            depth: None,
            comparator: ComparatorSpec::new(class, 32, 129),
            dictionary_knots: 4,
            dictionary_levels: 8,
            dictionary_resolution: 5,
        }
    }

    /// Same experiment at another horizon.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        let mut c = self.clone();
        c.horizon = horizon;
        c.environment.horizon = horizon;
        c
    }

    pub fn dictionary(&self) -> Result<FunctionDictionary, TreeError> {
        FunctionDictionary::canonical(
            self.environment.dimension,
            self.dictionary_knots,
            self.dictionary_levels,
            self.dictionary_resolution,
        )
    }
}

/// Any of the shipped learners, cloneable so one prototype serves every
/// replicate.
#[derive(Debug, Clone)]
pub enum AnyLearner {
    ContextualExp3(ContextualExp3),
    ContextualRtb(ContextualRtb),
    Exp3Rtb(PlainRtb),
    HierExp4(Box<HierExp4>),
    HierExp4Star(Box<HierExp4Star>),
    HierHedge(Box<HierHedge>),
}

impl Learner for AnyLearner {
    fn feedback_model(&self) -> FeedbackModel {
        match self {
            AnyLearner::ContextualExp3(l) => l.feedback_model(),
            AnyLearner::ContextualRtb(l) => l.feedback_model(),
            AnyLearner::Exp3Rtb(l) => l.feedback_model(),
            AnyLearner::HierExp4(l) => l.feedback_model(),
            AnyLearner::HierExp4Star(l) => l.feedback_model(),
            AnyLearner::HierHedge(l) => l.feedback_model(),
        }
    }

    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        match self {
            AnyLearner::ContextualExp3(l) => l.play_round(context, rng, guard),
            AnyLearner::ContextualRtb(l) => l.play_round(context, rng, guard),
            AnyLearner::Exp3Rtb(l) => l.play_round(context, rng, guard),
            AnyLearner::HierExp4(l) => l.play_round(context, rng, guard),
            AnyLearner::HierExp4Star(l) => l.play_round(context, rng, guard),
            AnyLearner::HierHedge(l) => l.play_round(context, rng, guard),
        }
    }
}

/// Learner with every parameter defaulted from `(T, d)` unless overridden.
pub fn build_learner(config: &ExperimentConfig) -> Result<AnyLearner, RunError> {
    let t = config.horizon as u64;
    let d = config.environment.dimension;
    let learner = match config.algorithm {
        Algorithm::ContextualExp3 => AnyLearner::ContextualExp3(match config.epsilon {
            Some(eps) => ContextualExp3::new(eps, t, d)?,
            None => ContextualExp3::tuned(t, d)?,
        }),
        Algorithm::ContextualRtb => AnyLearner::ContextualRtb(match config.epsilon.or(config.gamma) {
            Some(eps) => ContextualRtb::new(eps, d)?,
            None => ContextualRtb::tuned(t, d)?,
        }),
        Algorithm::Exp3Rtb => {
            let gamma = config.gamma.unwrap_or_else(|| (t as f64).powf(-0.5).min(1.0));
            AnyLearner::Exp3Rtb(PlainRtb(Exp3Rtb::new(gamma)?))
        }
        Algorithm::HierExp4 => {
            let gamma = config.gamma.unwrap_or_else(|| default_gamma(t, d));
            let dict = config.dictionary()?;
            let learner = match config.depth {
                Some(m) => HierExp4::with_depth(dict, gamma, m as usize)?,
                None => HierExp4::new(dict, gamma)?,
            };
            AnyLearner::HierExp4(Box::new(learner))
        }
        Algorithm::HierExp4Star => {
            let schedule = StarSchedule::build(t, d, config.gamma, config.depth)?;
            AnyLearner::HierExp4Star(Box::new(HierExp4Star::new(schedule)))
        }
        Algorithm::HierHedge => {
            let eps = config.epsilon.unwrap_or_else(|| hedge_epsilon(t, d));
            let dict = config.dictionary()?;
            let learner = match config.depth {
                Some(m) => {
                    let actions = crate::domain::ActionGrid::cover(eps)?.values();
                    HierHedge::with_actions(dict, m as usize, actions)?
                }
                None => HierHedge::new(dict, eps)?,
            };
            AnyLearner::HierHedge(Box::new(learner))
        }
    };
    Ok(learner)
}

/// Per-round record of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub replicate: usize,
    pub actions: Vec<f64>,
    pub losses: Vec<f64>,
    /// Loss averaged over the learner's own sampling distribution.
    pub expected_losses: Vec<f64>,
    pub cum_losses: Vec<f64>,
    pub comparator_cum: Vec<f64>,
    pub regret: Vec<f64>,
    pub queries: u64,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_expected_regret(&self) -> f64 {
        self.expected_losses.iter().sum::<f64>() - self.comparator_cum.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub comparator: ComparatorResult,
    pub traces: Vec<RegretTrace>,
}

impl ExperimentResult {
    pub fn mean_final_regret(&self) -> f64 {
        mean(self.traces.iter().map(|t| t.final_regret()))
    }

    pub fn mean_expected_regret(&self) -> f64 {
        mean(self.traces.iter().map(|t| t.final_expected_regret()))
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Plays `learner` through `rounds` once.
pub fn run_replicate<L: Learner>(
    learner: &mut L,
    rounds: &[Round],
    comparator_prefix: &[f64],
    replicate: usize,
    rng: &RandomSource,
) -> Result<RegretTrace, RunError> {
    let model = learner.feedback_model();
    let n = rounds.len();
    let mut trace = RegretTrace {
        replicate,
        actions: Vec::with_capacity(n),
        losses: Vec::with_capacity(n),
        expected_losses: Vec::with_capacity(n),
        cum_losses: Vec::with_capacity(n),
        comparator_cum: comparator_prefix.to_vec(),
        regret: Vec::with_capacity(n),
        queries: 0,
    };
    let mut cum = 0.0;
    for (t, round) in rounds.iter().enumerate() {
        let mut guard = GuardedFeedback::new(model, &round.loss);
        let mut round_rng = rng.split(t as u64);
        let play = learner
            .play_round(&round.context, &mut round_rng, &mut guard)
            .map_err(|source| RunError::Learner { replicate, round: t, source })?;
        if guard.violations() > 0 || guard.played_index() != Some(play.index) {
            return Err(RunError::FeedbackViolation { replicate, round: t });
        }
        trace.queries += guard.queries();
        let loss = round.loss.eval(play.value);
        let expected: f64 = play.distribution.iter().map(|&(y, p)| p * round.loss.eval(y)).sum();
        cum += loss;
        trace.actions.push(play.value);
        trace.losses.push(loss);
        trace.expected_losses.push(expected);
        trace.cum_losses.push(cum);
        trace.regret.push(cum - comparator_prefix[t]);
    }
    Ok(trace)
}

/// Generates the environment, computes the comparator once and runs every
/// replicate (in parallel) from the stream `split(seed, r)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, RunError> {
    if config.replicates == 0 {
        return Err(RunError::Config("replicates must be at least 1".into()));
    }
    if config.environment.horizon != config.horizon {
        return Err(RunError::Config("environment horizon differs from horizon".into()));
    }
    let rounds = generate_environment(&config.environment)?;
    let comparator = comparator_value(&rounds, &config.comparator)?;
    let prefix = comparator.prefix();
    let prototype = build_learner(config)?;
    let root = RandomSource::new(config.seed);
    let traces = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let mut learner = prototype.clone();
            run_replicate(&mut learner, &rounds, &prefix, r, &root.split(r as u64))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResult { comparator, traces })
}
