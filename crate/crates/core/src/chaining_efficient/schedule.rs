use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("horizon must be at least 3, got {0}")]
    InvalidHorizon(u64),
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("exploration must lie in (0,1), got {0}")]
    InvalidGamma(f64),
}

/// Exploration, depth, per-level rates and penalties of the dyadic learner.
#[derive(Debug, Clone, PartialEq)]
pub struct StarSchedule {
    pub horizon: u64,
    pub dimension: usize,
    pub gamma: f64,
    pub depth: u32,
    pub c_t: f64,
    /// `rates[m]` for `m = 0..=depth`.
    pub rates: Vec<f64>,
    /// `penalties[m]` for `m = 0..=depth`, `penalties[depth] = 0`.
    pub penalties: Vec<f64>,
}

fn default_gamma(horizon: u64, dimension: usize) -> f64 {
    let t = horizon as f64;
    if dimension == 1 {
        t.powf(-0.5) / t.ln()
    } else {
        t.powf(-1.0 / (dimension as f64 + 2.0 / 3.0))
    }
}

fn depth_for(gamma: f64) -> u32 {
    ((1.0 / gamma).log2() - 1e-9).ceil().max(1.0) as u32
}

pub fn star_schedule(horizon: u64, dimension: usize) -> Result<StarSchedule, ScheduleError> {
    StarSchedule::build(horizon, dimension, None, None)
}

impl StarSchedule {
    /// Schedule with optional overrides of `gamma` and of the depth.
    pub fn build(
        horizon: u64,
        dimension: usize,
        gamma: Option<f64>,
        depth: Option<u32>,
    ) -> Result<Self, ScheduleError> {
        if horizon < 3 {
            return Err(ScheduleError::InvalidHorizon(horizon));
        }
        if dimension == 0 {
            return Err(ScheduleError::InvalidDimension);
        }
        let gamma = gamma.unwrap_or_else(|| default_gamma(horizon, dimension));
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(ScheduleError::InvalidGamma(gamma));
        }
        let depth = depth.unwrap_or_else(|| depth_for(gamma)).max(1);
        let c_t = match dimension {
            1 => 2f64.powf(-1.25) * 0.5f64.sqrt(),
            2..=4 => 2f64.powf(-1.25) / (depth as f64).sqrt(),
            d => 2f64.powf(d as f64 / 4.0 - 3.0),
        };
        let t = horizon as f64;
        let base = c_t * gamma.sqrt() * t.powf(-0.25);
        let slope = dimension as f64 / 4.0 + 1.0;
        let rates: Vec<f64> = (0..=depth).map(|m| base * 2f64.powf(m as f64 * slope)).collect();
        let mut penalties = vec![0.0; depth as usize + 1];
        for m in (1..=depth as usize).rev() {
            penalties[m - 1] = penalties[m] + 2f64.powi(4 - 2 * m as i32) * rates[m];
        }
        Ok(Self { horizon, dimension, gamma, depth, c_t, rates, penalties })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_formulas() {
        let s = star_schedule(4096, 2).unwrap();
        assert!((s.gamma - 4096f64.powf(-0.375)).abs() < 1e-15);
        let s = star_schedule(4096, 1).unwrap();
        assert!((s.gamma - 1.0 / (64.0 * 4096f64.ln())).abs() < 1e-15);
        assert_eq!(s.depth, 10);
        assert_eq!(star_schedule(2, 1), Err(ScheduleError::InvalidHorizon(2)));
    }
}
