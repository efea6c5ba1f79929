use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded, splittable random stream.
///
/// `split(key)` is a pure function of `(seed, key)`, so per-replicate,
/// per-round and per-node streams never depend on how much of the parent
/// stream was consumed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn split(&self, key: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(key.wrapping_add(0x5851_F42D_4C95_7F2D))))
    }

    /// Uniform draw in `[0,1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Inverse-CDF draw from `probs`.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        sample_inverse_cdf(probs, u)
    }
}

/// Smallest `k` with `u * total < cum[k]`; falls back to the last atom with
/// positive mass when rounding leaves `u` past the end.
pub fn sample_inverse_cdf(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut cum = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        cum += p;
        if target < cum && p > 0.0 {
            return k;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Nonnegative entries summing to 1 within `tol`.
pub fn is_distribution(probs: &[f64], tol: f64) -> bool {
    probs.iter().all(|&p| p >= 0.0 && p.is_finite())
        && (probs.iter().sum::<f64>() - 1.0).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_pure() {
        let mut a = RandomSource::new(7);
        let b = a.split(3);
        a.uniform();
        let mut c = a.split(3);
        let mut b = b;
        assert_eq!(b.uniform(), c.uniform());
        assert_ne!(RandomSource::new(7).split(4).uniform(), RandomSource::new(7).split(3).uniform());
    }

    #[test]
    fn inverse_cdf_edges() {
        let p = [0.25, 0.0, 0.75];
        assert_eq!(sample_inverse_cdf(&p, 0.0), 0);
        assert_eq!(sample_inverse_cdf(&p, 0.25), 2);
        assert_eq!(sample_inverse_cdf(&p, 0.9999999), 2);
        assert_eq!(sample_inverse_cdf(&[0.5, 0.5, 0.0], 1.0), 1);
    }
}
