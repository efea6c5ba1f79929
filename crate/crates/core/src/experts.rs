//! Exponential-weights primitives: Hedge, Exp3, Exp3-RTB and the
//! range-adaptive / penalized Exp4 loss estimators.

use thiserror::Error;

use crate::domain::{
    ActionGrid, FeedbackError, GridError, GuardedFeedback, LossSource, ObservedGrid, RandomSource,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("effective action set is empty")]
    EmptySupport,
    #[error("anchor action {anchor} cannot be read after playing {played}")]
    AnchorUnobservable { anchor: usize, played: usize },
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
}

// ── Hedge ──

/// `p(i) ∝ exp(-eta * cum[i])`, computed with a max-shift.
pub fn hedge_distribution(cum: &[f64], eta: f64) -> Vec<f64> {
    let best = cum.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = cum.iter().map(|&c| (-eta * (c - best)).exp()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

#[derive(Debug, Clone)]
pub struct HedgeState {
    cum: Vec<f64>,
    eta: f64,
}

impl HedgeState {
    pub fn new(experts: usize, eta: f64) -> Self {
        Self { cum: vec![0.0; experts], eta }
    }

    pub fn experts(&self) -> usize {
        self.cum.len()
    }

    pub fn rate(&self) -> f64 {
        self.eta
    }

    pub fn set_rate(&mut self, eta: f64) {
        self.eta = eta;
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn distribution(&self) -> Vec<f64> {
        hedge_distribution(&self.cum, self.eta)
    }

    pub fn update(&mut self, losses: &[f64]) {
        for (c, l) in self.cum.iter_mut().zip(losses) {
            *c += l;
        }
    }
}

// ── Adaptive rate ──

/// `sqrt(2(sqrt2 - 1) ln N / ((e - 2) V))`, infinite when `V = 0`.
pub fn variance_rate(experts: usize, variance: f64) -> f64 {
    if variance <= 0.0 {
        return f64::INFINITY;
    }
    let num = 2.0 * (std::f64::consts::SQRT_2 - 1.0) * (experts as f64).ln();
    (num / ((std::f64::consts::E - 2.0) * variance)).sqrt()
}

/// Variance-adaptive learning rate with a cap and a running minimum.
#[derive(Debug, Clone)]
pub struct AdaptiveRate {
    experts: usize,
    cap: f64,
    variance: f64,
    current: f64,
}

impl AdaptiveRate {
    /// Cap `gamma / (2 range)`, used with importance-weighted estimates.
    pub fn with_floor(experts: usize, gamma: f64, range: f64) -> Self {
        Self::with_cap(experts, gamma / (2.0 * range))
    }

    pub fn with_cap(experts: usize, cap: f64) -> Self {
        Self { experts, cap, variance: 0.0, current: cap }
    }

    pub fn rate(&self) -> f64 {
        self.current
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Adds this round's weighted variance of `losses` under `weights`.
    pub fn observe(&mut self, weights: &[f64], losses: &[f64]) {
        let mean: f64 = weights.iter().zip(losses).map(|(q, l)| q * l).sum();
        let var: f64 = weights.iter().zip(losses).map(|(q, l)| q * (l - mean).powi(2)).sum();
        self.variance += var;
        let next = self.cap.min(variance_rate(self.experts, self.variance));
        self.current = self.current.min(next);
    }
}

// ── Exp3 ──

/// Bandit Exp3 with a fixed rate.
#[derive(Debug, Clone)]
pub struct Exp3 {
    cum: Vec<f64>,
    eta: f64,
}

impl Exp3 {
    pub fn new(arms: usize, eta: f64) -> Self {
        Self { cum: vec![0.0; arms], eta }
    }

    pub fn rate(&self) -> f64 {
        self.eta
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn distribution(&self) -> Vec<f64> {
        hedge_distribution(&self.cum, self.eta)
    }

    /// Importance-weighted update of the played arm.
    pub fn update(&mut self, played: usize, loss: f64, prob: f64) {
        self.cum[played] += loss / prob;
    }
}

// ── Exp3-RTB ──

/// Exp3 on the grid `{0, gamma, 2 gamma, ...}` with one-sided feedback and
/// forced exploration of the smallest price.
#[derive(Debug, Clone)]
pub struct Exp3Rtb {
    gamma: f64,
    eta: f64,
    grid: ActionGrid,
    values: Vec<f64>,
    cum: Vec<f64>,
}

impl Exp3Rtb {
    pub fn new(gamma: f64) -> Result<Self, GridError> {
        let grid = ActionGrid::rtb(gamma)?;
        Ok(Self {
            gamma,
            eta: gamma / 2.0,
            values: grid.values(),
            cum: vec![0.0; grid.count()],
            grid,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rate(&self) -> f64 {
        self.eta
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn sampling_distribution(&self) -> Vec<f64> {
        let mut q = hedge_distribution(&self.cum, self.eta);
        for x in &mut q {
            *x *= 1.0 - self.gamma;
        }
        q[0] += self.gamma;
        q
    }

    /// Draws, plays and learns from one round; returns the played index and
    /// the sampling distribution used.
    pub fn round(
        &mut self,
        rng: &mut RandomSource,
        guard: &mut GuardedFeedback<'_>,
    ) -> Result<(usize, Vec<f64>), FeedbackError> {
        let q = self.sampling_distribution();
        let played = rng.categorical(&q);
        guard.record_play(played, self.values[played])?;
        let est = {
            let mut src = ObservedGrid::new(guard, &self.values);
            rtb_estimates(&q, played, &mut src)?
        };
        self.apply(&est);
        Ok((played, q))
    }

    pub fn apply(&mut self, estimates: &[f64]) {
        for (c, e) in self.cum.iter_mut().zip(estimates) {
            *c += e;
        }
    }
}

/// `l(k) / sum_{j<=k} q(j)` for `k >= played`, zero below.
pub fn rtb_estimates<S: LossSource + ?Sized>(
    q: &[f64],
    played: usize,
    src: &mut S,
) -> Result<Vec<f64>, FeedbackError> {
    let mut out = vec![0.0; q.len()];
    let mut cdf: f64 = q[..played].iter().sum();
    for k in played..q.len() {
        cdf += q[k];
        out[k] = src.loss_at(k)? / cdf;
    }
    Ok(out)
}

// ── Exp4 estimators ──

pub fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn read_anchor<S: LossSource + ?Sized>(
    src: &mut S,
    anchor: usize,
    played: usize,
) -> Result<f64, EstimateError> {
    src.loss_at(anchor).map_err(|e| match e {
        FeedbackError::ForbiddenQuery { .. } => EstimateError::AnchorUnobservable { anchor, played },
        other => other.into(),
    })
}

/// Range-adaptive estimates anchored at `max(support)`.
///
/// `support` is sorted ascending; the result is aligned with it. `cdf[k]` is
/// the sampling mass of indices `<= k`.
pub fn exp4_range_estimates<S: LossSource + ?Sized>(
    src: &mut S,
    support: &[usize],
    cdf: &[f64],
    played: usize,
) -> Result<Vec<f64>, EstimateError> {
    let &anchor = support.last().ok_or(EstimateError::EmptySupport)?;
    let mut out = vec![0.0; support.len()];
    if played > anchor {
        return Ok(out);
    }
    let base = read_anchor(src, anchor, played)?;
    for (slot, &k) in out.iter_mut().zip(support) {
        if k >= played && k != anchor {
            *slot = (src.loss_at(k)? - base) / cdf[k];
        }
    }
    Ok(out)
}

/// Penalized estimates with range `range`, penalty `-alpha / P` and shift
/// `alpha / gamma`.
pub fn exp4_penalized_estimates<S: LossSource + ?Sized>(
    src: &mut S,
    support: &[usize],
    cdf: &[f64],
    played: usize,
    range: f64,
    alpha: f64,
    gamma: f64,
) -> Result<Vec<f64>, EstimateError> {
    let &anchor = support.last().ok_or(EstimateError::EmptySupport)?;
    let shift = alpha / gamma;
    let mut out: Vec<f64> = support.iter().map(|&k| shift - alpha / cdf[k]).collect();
    if played > anchor {
        return Ok(out);
    }
    let base = read_anchor(src, anchor, played)?;
    for (slot, &k) in out.iter_mut().zip(support) {
        if k >= played {
            let diff = if k == anchor { 0.0 } else { src.loss_at(k)? - base };
            *slot += (diff + range) / cdf[k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::KnownLosses;

    #[test]
    fn hedge_examples() {
        assert_eq!(hedge_distribution(&[0.0, 0.0], 3.0), vec![0.5, 0.5]);
        let p = hedge_distribution(&[0.0, 1.0], 2f64.ln());
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        let p = hedge_distribution(&[5.0, 5.0, 5.0 + 1e6], 1.0);
        assert_eq!(p[0], p[1]);
        assert_eq!(p[2], 0.0);
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn rate_cap_and_monotone() {
        let mut r = AdaptiveRate::with_floor(4, 0.1, 8.0);
        assert_eq!(r.rate(), 0.00625);
        r.observe(&[0.5, 0.5, 0.0, 0.0], &[0.0, 1e4, 0.0, 0.0]);
        let a = r.rate();
        r.observe(&[0.5, 0.5, 0.0, 0.0], &[0.0, 1e4, 0.0, 0.0]);
        assert!(r.rate() <= a && a < 0.00625);
    }

    #[test]
    fn rtb_examples() {
        let q = [0.75, 0.25];
        let l = [0.6, 0.2];
        let e = rtb_estimates(&q, 0, &mut KnownLosses(&l)).unwrap();
        assert!((e[0] - 0.8).abs() < 1e-15 && e[1] == 0.2);
        assert_eq!(rtb_estimates(&q, 1, &mut KnownLosses(&l)).unwrap(), vec![0.0, 0.2]);
    }

    #[test]
    fn range_examples() {
        let cdf = [0.4, 0.6, 0.8, 1.0];
        let l = [0.0, 0.9, 0.5, 0.3];
        let mut src = KnownLosses(&l);
        // 0-based: {2,3} -> {1,2}, played 4 -> 3
        assert_eq!(exp4_range_estimates(&mut src, &[1, 2], &cdf, 3).unwrap(), vec![0.0, 0.0]);
        assert_eq!(exp4_range_estimates(&mut src, &[2], &cdf, 1).unwrap(), vec![0.0]);
        let e = exp4_range_estimates(&mut src, &[1, 3], &cdf, 1).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-15 && e[1] == 0.0);
    }

    #[test]
    fn penalized_singleton() {
        let cdf = [0.5, 1.0];
        let l = [0.3, 0.3];
        let gamma = 0.1;
        let e = exp4_penalized_estimates(&mut KnownLosses(&l), &[0], &cdf, 0, 2.0, gamma, gamma)
            .unwrap();
        assert!((e[0] - 4.8).abs() < 1e-12);
    }
}
