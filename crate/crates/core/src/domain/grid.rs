use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid must have at least one action")]
    Empty,
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid values leave [0,1]: offset {offset}, step {step}, count {count}")]
    OutOfRange { offset: f64, step: f64, count: usize },
}

/// A uniform discretization of the action interval `[0,1]`.
///
/// Indices are 0-based: index `i` has value `offset + i * step`, so index 0
/// is the smallest action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionGrid {
    count: usize,
    offset: f64,
    step: f64,
}

const SLACK: f64 = 1e-12;

impl ActionGrid {
    pub fn new(count: usize, offset: f64, step: f64) -> Result<Self, GridError> {
        if count == 0 {
            return Err(GridError::Empty);
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(GridError::BadStep(step));
        }
        let last = offset + (count - 1) as f64 * step;
        if offset < -SLACK || last > 1.0 + SLACK {
            return Err(GridError::OutOfRange { offset, step, count });
        }
        Ok(Self { count, offset, step })
    }

    /// `{0, 2^-M, ..., 1 - 2^-M}`.
    pub fn hier(depth: u32) -> Self {
        let count = 1usize << depth;
        Self { count, offset: 0.0, step: 1.0 / count as f64 }
    }

    /// `{2^-M, 2 * 2^-M, ..., 1}`.
    pub fn star(depth: u32) -> Self {
        let count = 1usize << depth;
        let step = 1.0 / count as f64;
        Self { count, offset: step, step }
    }

    /// `{0, gamma, 2 gamma, ...}` with `ceil(1/gamma)` points.
    pub fn rtb(gamma: f64) -> Result<Self, GridError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(GridError::BadStep(gamma));
        }
        let count = ceil_inverse(gamma);
        Self::new(count, 0.0, gamma)
    }

    /// An `epsilon`-cover of `[0,1]` with `ceil(1/epsilon)` points starting at 0.
    pub fn cover(epsilon: f64) -> Result<Self, GridError> {
        Self::rtb(epsilon)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn value(&self, index: usize) -> f64 {
        debug_assert!(index < self.count);
        (self.offset + index as f64 * self.step).min(1.0)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Index of the grid point closest to `y`; exact ties go to the lower index.
    pub fn nearest_index(&self, y: f64) -> usize {
        let t = (y - self.offset) / self.step;
        if t.is_nan() || t <= 0.0 {
            return 0;
        }
        let base = t.floor();
        let mut i = base as usize;
        if t - base > 0.5 {
            i += 1;
        }
        i.min(self.count - 1)
    }
}

/// `ceil(1/x)` robust to `1/x` landing a hair above an integer.
pub(crate) fn ceil_inverse(x: f64) -> usize {
    let inv = 1.0 / x;
    let r = inv.round();
    if (inv - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        inv.ceil() as usize
    }
}
