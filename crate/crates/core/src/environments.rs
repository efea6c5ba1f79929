//! Oblivious environment generators: second-price auctions and synthetic
//! Lipschitz losses.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domain::{Context, Dip, LossFunction, LossShape, RandomSource, Regularity};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvironmentError {
    #[error("bids must satisfy 0 <= second <= high <= 1, got high {high}, second {second}")]
    InvalidBids { high: f64, second: f64 },
    #[error("invalid environment: {0}")]
    InvalidSpec(String),
}

/// `1 - max(y, b2) * 1{y <= b1}`.
pub fn auction_loss(y: f64, b1: f64, b2: f64) -> Result<f64, EnvironmentError> {
    Ok(auction(b1, b2)?.eval(y))
}

pub fn auction(high: f64, second: f64) -> Result<LossFunction, EnvironmentError> {
    if !(0.0 <= second && second <= high && high <= 1.0) {
        return Err(EnvironmentError::InvalidBids { high, second });
    }
    Ok(LossFunction { shape: LossShape::Auction { high, second }, regularity: Regularity::SemiLipschitz })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvironmentKind {
    AuctionIid,
    AuctionAdversarial,
    LipschitzSynthetic,
}

impl EnvironmentKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvironmentKind::AuctionIid => "auction-iid",
            EnvironmentKind::AuctionAdversarial => "auction-adversarial",
            EnvironmentKind::LipschitzSynthetic => "lipschitz-synthetic",
        }
    }
}

impl fmt::Display for EnvironmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvironmentKind {
    type Err = EnvironmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auction-iid" => Ok(EnvironmentKind::AuctionIid),
            "auction-adversarial" => Ok(EnvironmentKind::AuctionAdversarial),
            "lipschitz-synthetic" => Ok(EnvironmentKind::LipschitzSynthetic),
            other => Err(EnvironmentError::InvalidSpec(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub kind: EnvironmentKind,
    pub dimension: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Bumps in each random Lipschitz field (dips for the synthetic kind).
    pub components: usize,
    /// Fixes the auction bid level instead of a random field.
    pub bid_center: Option<f64>,
    /// Half-width of the uniform noise added to each bid.
    pub bid_noise: f64,
}

impl EnvironmentSpec {
    pub fn new(kind: EnvironmentKind, dimension: usize, horizon: usize, seed: u64) -> Self {
        Self { kind, dimension, horizon, seed, components: 3, bid_center: None, bid_noise: 0.1 }
    }

    fn validate(&self) -> Result<(), EnvironmentError> {
        let bad = |m: &str| Err(EnvironmentError::InvalidSpec(m.to_string()));
        if self.dimension == 0 {
            return bad("dimension must be at least 1");
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if self.components == 0 || self.components > 5 {
            return bad("components must be between 1 and 5");
        }
        if let Some(c) = self.bid_center {
            if !(0.0..=1.0).contains(&c) {
                return bad("bid_center must lie in [0,1]");
            }
        }
        if !(0.0..=1.0).contains(&self.bid_noise) {
            return bad("bid_noise must lie in [0,1]");
        }
        Ok(())
    }
}

/// One round of the environment.
#[derive(Debug, Clone)]
pub struct Round {
    pub context: Context,
    pub loss: LossFunction,
}

impl Round {
    /// Top two bids for auction rounds.
    pub fn bids(&self) -> Option<(f64, f64)> {
        match self.loss.shape {
            LossShape::Auction { high, second } => Some((high, second)),
            _ => None,
        }
    }
}

/// `clamp(offset + sum_j w_j max(0, r_j - |x - c_j|_inf), lo, hi)` with
/// `sum |w_j| <= 1`, hence 1-Lipschitz in the sup norm.
#[derive(Debug, Clone)]
struct LipschitzField {
    offset: f64,
    bumps: Vec<(Vec<f64>, f64, f64)>,
    lo: f64,
    hi: f64,
}

impl LipschitzField {
    fn random(rng: &mut RandomSource, dimension: usize, bumps: usize, lo: f64, hi: f64) -> Self {
        let offset = rng.range(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo));
        let raw: Vec<f64> = (0..bumps).map(|_| rng.range(-1.0, 1.0)).collect();
        let norm: f64 = raw.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
        let bumps = raw
            .iter()
            .map(|w| {
                let center = (0..dimension).map(|_| rng.uniform()).collect();
                (center, rng.range(0.2, 0.6), w / norm)
            })
            .collect();
        Self { offset, bumps, lo, hi }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.offset;
        for (c, r, w) in &self.bumps {
            let d = c.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v += w * (r - d).max(0.0);
        }
        v.clamp(self.lo, self.hi)
    }
}

fn uniform_context(rng: &mut RandomSource, dimension: usize) -> Context {
    Context::new((0..dimension).map(|_| rng.uniform()).collect())
}

fn noisy_bids(rng: &mut RandomSource, level: f64, noise: f64) -> Result<LossFunction, EnvironmentError> {
    let a = (level + rng.range(-noise, noise)).clamp(0.0, 1.0);
    let b = (level + rng.range(-noise, noise)).clamp(0.0, 1.0);
    auction(a.max(b), a.min(b))
}

const IRRATIONALS: [f64; 4] = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877, 0.236_067_977_499_79];

/// Builds the whole `(context, loss)` sequence; depends only on `spec`.
pub fn generate_environment(spec: &EnvironmentSpec) -> Result<Vec<Round>, EnvironmentError> {
    spec.validate()?;
    let root = RandomSource::new(spec.seed);
    let mut setup = root.split(0);
    let mut draws = root.split(1);
    let d = spec.dimension;
    let mut rounds = Vec::with_capacity(spec.horizon);
    match spec.kind {
        EnvironmentKind::AuctionIid => {
            let field = LipschitzField::random(&mut setup, d, spec.components, 0.05, 0.95);
            for _ in 0..spec.horizon {
                let context = uniform_context(&mut draws, d);
                let level = spec.bid_center.unwrap_or_else(|| field.eval(context.coords()));
                let loss = noisy_bids(&mut draws, level, spec.bid_noise)?;
                rounds.push(Round { context, loss });
            }
        }
        EnvironmentKind::AuctionAdversarial => {
            let fields = [
                LipschitzField::random(&mut setup, d, spec.components, 0.05, 0.95),
                LipschitzField::random(&mut setup, d, spec.components, 0.05, 0.95),
            ];
            let start: Vec<f64> = (0..d).map(|_| setup.uniform()).collect();
            let block = ((spec.horizon as f64).sqrt().ceil() as usize).max(1);
            let mut regime = 0;
            for t in 0..spec.horizon {
                if t % block == 0 {
                    regime = setup.below(2);
                }
                let coords = (0..d)
                    .map(|i| {
                        let step = IRRATIONALS[i % IRRATIONALS.len()] / (1 + i / IRRATIONALS.len()) as f64;
                        (start[i] + t as f64 * step).fract()
                    })
                    .collect();
                let context = Context::new(coords);
                let level = spec.bid_center.unwrap_or_else(|| fields[regime].eval(context.coords()));
                let loss = noisy_bids(&mut draws, level, spec.bid_noise)?;
                rounds.push(Round { context, loss });
            }
        }
        EnvironmentKind::LipschitzSynthetic => {
            let centers: Vec<LipschitzField> = (0..spec.components)
                .map(|_| LipschitzField::random(&mut setup, d, 3, 0.05, 0.95))
                .collect();
            let raw: Vec<f64> = (0..spec.components).map(|_| setup.range(0.2, 1.0)).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let radii: Vec<f64> = (0..spec.components).map(|_| setup.range(0.15, 0.4)).collect();
            for _ in 0..spec.horizon {
                let context = uniform_context(&mut draws, d);
                let base = draws.range(0.8, 1.0);
                let dips = centers
                    .iter()
                    .zip(&weights)
                    .zip(&radii)
                    .map(|((f, &weight), &radius)| Dip {
                        center: (f.eval(context.coords()) + draws.range(-0.05, 0.05)).clamp(0.0, 1.0),
                        radius,
                        weight,
                    })
                    .collect();
                let loss = LossFunction {
                    shape: LossShape::Dips { base, dips },
                    regularity: Regularity::Lipschitz,
                };
                rounds.push(Round { context, loss });
            }
        }
    }
    Ok(rounds)
}
