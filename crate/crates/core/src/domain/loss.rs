use std::fmt;
use std::sync::Arc;

/// Regularity class a loss is expected to satisfy on `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// `|l(y) - l(y')| <= |y - y'|`.
    Lipschitz,
    /// `l(y + d) >= l(y) - d` for `d >= 0`.
    SemiLipschitz,
}

/// A downward tent: subtracts `weight * max(0, radius - |y - center|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dip {
    pub center: f64,
    pub radius: f64,
    pub weight: f64,
}

#[derive(Clone)]
pub enum LossShape {
    Constant(f64),
    /// Second-price auction with ordered top bids `high >= second`.
    Auction { high: f64, second: f64 },
    /// `clamp(base - sum of dips, 0, 1)`.
    Dips { base: f64, dips: Vec<Dip> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LossShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossShape::Constant(c) => write!(f, "Constant({c})"),
            LossShape::Auction { high, second } => write!(f, "Auction({high}, {second})"),
            LossShape::Dips { base, dips } => write!(f, "Dips({base}, {} dips)", dips.len()),
            LossShape::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A loss `l : [0,1] -> [0,1]` with its regularity tag.
#[derive(Debug, Clone)]
pub struct LossFunction {
    pub shape: LossShape,
    pub regularity: Regularity,
}

impl LossFunction {
    pub fn constant(c: f64) -> Self {
        Self { shape: LossShape::Constant(c), regularity: Regularity::Lipschitz }
    }

    pub fn custom<F>(f: F, regularity: Regularity) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { shape: LossShape::Custom(Arc::new(f)), regularity }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.shape {
            LossShape::Constant(c) => *c,
            LossShape::Auction { high, second } => {
                if y <= *high {
                    1.0 - y.max(*second)
                } else {
                    1.0
                }
            }
            LossShape::Dips { base, dips } => {
                let drop: f64 = dips
                    .iter()
                    .map(|d| d.weight * (d.radius - (y - d.center).abs()).max(0.0))
                    .sum();
                (base - drop).clamp(0.0, 1.0)
            }
            LossShape::Custom(f) => f(y),
        }
    }

    /// Points where the minimum over `[0,1]` may sit besides grid points.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            LossShape::Constant(_) | LossShape::Custom(_) => Vec::new(),
            LossShape::Auction { high, second } => vec![*second, *high],
            LossShape::Dips { dips, .. } => dips
                .iter()
                .flat_map(|d| [d.center - d.radius, d.center, d.center + d.radius])
                .filter(|y| (0.0..=1.0).contains(y))
                .collect(),
        }
    }
}

/// Grid check of the loss's regularity tag over `i / (resolution - 1)`.
pub fn verify_regularity(loss: &LossFunction, resolution: usize, tolerance: f64) -> bool {
    let n = resolution.max(2);
    let ys: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let ls: Vec<f64> = ys.iter().map(|&y| loss.eval(y)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = ys[j] - ys[i];
            let ok = match loss.regularity {
                Regularity::Lipschitz => (ls[j] - ls[i]).abs() <= delta + tolerance,
                Regularity::SemiLipschitz => ls[j] >= ls[i] - delta - tolerance,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}
