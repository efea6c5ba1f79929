//! Fixed-radius ball covers of the context space with one expert learner
//! per ball.

use crate::domain::{
    ActionGrid, Context, FeedbackModel, GridError, GuardedFeedback, LossSource, ObservedGrid,
    RandomSource,
};
use crate::experts::{Exp3, Exp3Rtb};
use crate::learner::{Learner, LearnerError, Play};

/// Balls created on demand; a context joins the closest existing center
/// within `radius` (lowest creation index on ties) or opens a new ball.
#[derive(Debug, Clone)]
pub struct BallCover<L> {
    radius: f64,
    centers: Vec<Context>,
    states: Vec<L>,
}

impl<L> BallCover<L> {
    pub fn new(radius: f64) -> Self {
        Self { radius, centers: Vec::new(), states: Vec::new() }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn center(&self, i: usize) -> &Context {
        &self.centers[i]
    }

    pub fn state(&self, i: usize) -> &L {
        &self.states[i]
    }

    pub fn state_mut(&mut self, i: usize) -> &mut L {
        &mut self.states[i]
    }

    /// Closest center within the radius, if any.
    pub fn locate(&self, x: &Context) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.centers.iter().enumerate() {
            let d = c.dist(x);
            if d <= self.radius && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|b| b.0)
    }

    pub fn lookup_or_create(&mut self, x: &Context, make: impl FnOnce() -> L) -> usize {
        if let Some(i) = self.locate(x) {
            return i;
        }
        self.centers.push(x.clone());
        self.states.push(make());
        self.centers.len() - 1
    }
}

/// Largest possible ball count for contexts in `[0,1]^d`.
pub fn packing_bound(radius: f64, dimension: usize) -> f64 {
    (1.0 + 1.0 / radius).powi(dimension as i32)
}

/// Default ball radius for the bandit learner (`p = 1`).
pub fn exp3_radius(horizon: u64, dimension: usize) -> f64 {
    let t = horizon as f64;
    let k = dimension as f64 + 3.0;
    let eps = t.ln().powf(2.0 / k) * t.powf(-1.0 / k);
    if eps.is_finite() && eps > 0.0 {
        eps.min(1.0)
    } else {
        1.0
    }
}

/// Default ball radius (and exploration) for the one-sided learner.
pub fn rtb_radius(horizon: u64, dimension: usize) -> f64 {
    (horizon as f64).powf(-1.0 / (dimension as f64 + 2.0)).min(1.0)
}

/// Fixed per-ball Exp3 rate `sqrt(2 N ln K / (T K))` with `N = (2/eps)^d`.
pub fn exp3_rate(radius: f64, horizon: u64, dimension: usize, arms: usize) -> f64 {
    let n = (2.0 / radius).powi(dimension as i32);
    let k = arms as f64;
    (2.0 * n * k.ln() / (horizon as f64 * k)).sqrt()
}

fn check_dim(expected: usize, x: &Context) -> Result<(), LearnerError> {
    if x.dimension() != expected {
        return Err(LearnerError::DimensionMismatch { expected, got: x.dimension() });
    }
    Ok(())
}

// ── ContextualExp3 ──

#[derive(Debug, Clone)]
pub struct ContextualExp3 {
    dimension: usize,
    cover: BallCover<Exp3>,
    grid: ActionGrid,
    values: Vec<f64>,
    eta: f64,
}

impl ContextualExp3 {
    pub fn new(radius: f64, horizon: u64, dimension: usize) -> Result<Self, GridError> {
        let grid = ActionGrid::cover(radius)?;
        let eta = exp3_rate(radius, horizon, dimension, grid.count());
        Ok(Self {
            dimension,
            cover: BallCover::new(radius),
            values: grid.values(),
            grid,
            eta,
        })
    }

    pub fn tuned(horizon: u64, dimension: usize) -> Result<Self, GridError> {
        Self::new(exp3_radius(horizon, dimension), horizon, dimension)
    }

    pub fn cover(&self) -> &BallCover<Exp3> {
        &self.cover
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn rate(&self) -> f64 {
        self.eta
    }
}

impl Learner for ContextualExp3 {
    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::Bandit
    }

    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        check_dim(self.dimension, context)?;
        let (k, eta) = (self.grid.count(), self.eta);
        let ball = self.cover.lookup_or_create(context, || Exp3::new(k, eta));
        let state = self.cover.state_mut(ball);
        let p = state.distribution();
        let played = rng.categorical(&p);
        guard.record_play(played, self.values[played])?;
        let loss = ObservedGrid::new(guard, &self.values).loss_at(played)?;
        state.update(played, loss, p[played]);
        Ok(Play::from_dense(played, &self.values, &p))
    }
}

// ── ContextualRTB ──

#[derive(Debug, Clone)]
pub struct ContextualRtb {
    dimension: usize,
    cover: BallCover<Exp3Rtb>,
    template: Exp3Rtb,
}

impl ContextualRtb {
    /// Balls of radius `epsilon`, each running Exp3-RTB with `gamma = epsilon`.
    pub fn new(epsilon: f64, dimension: usize) -> Result<Self, GridError> {
        Ok(Self { dimension, cover: BallCover::new(epsilon), template: Exp3Rtb::new(epsilon)? })
    }

    pub fn tuned(horizon: u64, dimension: usize) -> Result<Self, GridError> {
        Self::new(rtb_radius(horizon, dimension), dimension)
    }

    pub fn cover(&self) -> &BallCover<Exp3Rtb> {
        &self.cover
    }
}

impl Learner for ContextualRtb {
    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::OneSidedFull
    }

    fn play_round(
        &mut self,
        context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        check_dim(self.dimension, context)?;
        let template = &self.template;
        let ball = self.cover.lookup_or_create(context, || template.clone());
        let state = self.cover.state_mut(ball);
        let (played, q) = state.round(rng, guard)?;
        Ok(Play::from_dense(played, state.values(), &q))
    }
}

/// Exp3-RTB on its own, ignoring contexts.
#[derive(Debug, Clone)]
pub struct PlainRtb(pub Exp3Rtb);

impl Learner for PlainRtb {
    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::OneSidedFull
    }

    fn play_round(
        &mut self,
        _context: &Context,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<Play, LearnerError> {
        let (played, q) = self.0.round(rng, guard)?;
        Ok(Play::from_dense(played, self.0.values(), &q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_examples() {
        let mut c: BallCover<()> = BallCover::new(0.2);
        assert_eq!(c.lookup_or_create(&Context::new(vec![0.5]), || ()), 0);
        assert_eq!(c.lookup_or_create(&Context::new(vec![0.6]), || ()), 0);
        assert_eq!(c.lookup_or_create(&Context::new(vec![0.8]), || ()), 1);
    }

    #[test]
    fn rtb_radius_d2() {
        assert_eq!(rtb_radius(4096, 2), 0.125);
    }
}
