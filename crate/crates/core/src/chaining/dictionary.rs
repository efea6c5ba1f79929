use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::tree::TreeError;
use crate::domain::Context;

pub type PolicyFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A labelled map from contexts to actions.
#[derive(Clone)]
pub struct Policy {
    pub label: String,
    eval: PolicyFn,
}

impl fmt::Debug for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Policy({})", self.label)
    }
}

impl Policy {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { label: label.into(), eval: Arc::new(f) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// Finite set of policies with sup-norm distances taken over the grid
/// `{0, 1/(r-1), ..., 1}^d`.
#[derive(Debug, Clone)]
pub struct FunctionDictionary {
    dimension: usize,
    resolution: usize,
    members: Vec<Policy>,
    samples: Vec<Vec<f64>>,
}

const LIPSCHITZ_TOL: f64 = 1e-9;
/// Above this many grid points only neighbouring pairs are checked.
const ALL_PAIRS_LIMIT: usize = 512;

fn grid_points(dimension: usize, resolution: usize) -> Vec<Vec<f64>> {
    let total = resolution.pow(dimension as u32);
    let step = 1.0 / (resolution - 1) as f64;
    (0..total)
        .map(|mut flat| {
            (0..dimension)
                .map(|_| {
                    let c = flat % resolution;
                    flat /= resolution;
                    c as f64 * step
                })
                .collect()
        })
        .collect()
}

impl FunctionDictionary {
    pub fn new(
        dimension: usize,
        resolution: usize,
        members: Vec<Policy>,
    ) -> Result<Self, TreeError> {
        if members.is_empty() {
            return Err(TreeError::EmptyDictionary);
        }
        if dimension == 0 || resolution < 2 {
            return Err(TreeError::BadGrid { dimension, resolution });
        }
        let points = grid_points(dimension, resolution);
        let samples: Vec<Vec<f64>> =
            members.iter().map(|m| points.iter().map(|p| m.eval(p)).collect()).collect();
        let pairs = lipschitz_pairs(&points, dimension, resolution);
        for (m, s) in members.iter().zip(&samples) {
            let lipschitz = pairs.iter().all(|&(a, b, d)| (s[a] - s[b]).abs() <= d + LIPSCHITZ_TOL);
            if !lipschitz {
                return Err(TreeError::NotLipschitz(m.label.clone()));
            }
        }
        Ok(Self { dimension, resolution, members, samples })
    }

    /// Piecewise-linear 1-Lipschitz functions of a single coordinate.
    ///
    /// Knots sit at `j / knots`, knot values are multiples of `1 / levels`
    /// and neighbouring knots differ by at most `levels / knots` such steps.
    /// For `d > 1` the family is repeated for each coordinate (constants
    /// only once). The distance grid has `resolution` points per axis.
    pub fn canonical(
        dimension: usize,
        knots: usize,
        levels: usize,
        resolution: usize,
    ) -> Result<Self, TreeError> {
        let knots = knots.max(1);
        let levels = levels.max(1);
        let max_step = (levels / knots) as i64;
        let mut seqs: Vec<Vec<i64>> = (0..=levels as i64).map(|v| vec![v]).collect();
        for _ in 0..knots {
            let mut next = Vec::new();
            for s in &seqs {
                let last = *s.last().unwrap();
                for delta in -max_step..=max_step {
                    let v = last + delta;
                    if (0..=levels as i64).contains(&v) {
                        let mut n = s.clone();
                        n.push(v);
                        next.push(n);
                    }
                }
            }
            seqs = next;
        }
        let mut members = Vec::new();
        let mut seen_constants = HashSet::new();
        for coord in 0..dimension.max(1) {
            for s in &seqs {
                let constant = s.iter().all(|&v| v == s[0]);
                if constant && !seen_constants.insert(s[0]) {
                    continue;
                }
                let label = if constant {
                    format!("c{}/{}", s[0], levels)
                } else {
                    let vals: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                    format!("x{}:{}/{}", coord, vals.join(","), levels)
                };
                let knot_values: Vec<f64> = s.iter().map(|&v| v as f64 / levels as f64).collect();
                members.push(Policy::new(label, move |x: &[f64]| {
                    piecewise_linear(&knot_values, x[coord])
                }));
            }
        }
        Self::new(dimension.max(1), resolution, members)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &Policy {
        &self.members[i]
    }

    pub fn eval(&self, i: usize, x: &Context) -> f64 {
        self.members[i].eval(x.coords())
    }

    pub fn samples(&self, i: usize) -> &[f64] {
        &self.samples[i]
    }

    /// Sup-norm distance between members `i` and `j` on the grid.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.samples[i]
            .iter()
            .zip(&self.samples[j])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn piecewise_linear(knots: &[f64], x: f64) -> f64 {
    let segments = knots.len() - 1;
    if segments == 0 {
        return knots[0];
    }
    let t = x.clamp(0.0, 1.0) * segments as f64;
    let j = (t.floor() as usize).min(segments - 1);
    let frac = t - j as f64;
    knots[j] + (knots[j + 1] - knots[j]) * frac
}

/// Index pairs and their sup distance used by the Lipschitz check.
fn lipschitz_pairs(
    points: &[Vec<f64>],
    dimension: usize,
    resolution: usize,
) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let dist = |a: usize, b: usize| {
        points[a].iter().zip(&points[b]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let mut pairs = Vec::new();
    if n <= ALL_PAIRS_LIMIT {
        for a in 0..n {
            for b in (a + 1)..n {
                pairs.push((a, b, dist(a, b)));
            }
        }
        return pairs;
    }
    // king-move neighbours in the grid
    let neighbours = 3usize.pow(dimension as u32);
    for a in 0..n {
        let mut coords = Vec::with_capacity(dimension);
        let mut flat = a;
        for _ in 0..dimension {
            coords.push(flat % resolution);
            flat /= resolution;
        }
        'moves: for mv in 0..neighbours {
            let mut m = mv;
            let mut b = 0;
            let mut scale = 1;
            for &c in &coords {
                let shifted = c as i64 + (m % 3) as i64 - 1;
                m /= 3;
                if shifted < 0 || shifted >= resolution as i64 {
                    continue 'moves;
                }
                b += shifted as usize * scale;
                scale *= resolution;
            }
            if b > a {
                pairs.push((a, b, dist(a, b)));
            }
        }
    }
    pairs
}
