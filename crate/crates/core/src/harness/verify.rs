//! Self-checks behind `chainbench verify`.

use crate::chaining::{CoveringTree, FunctionDictionary};
use crate::chaining_efficient::{
    enumerate_exp4_nodes, exp4_node_count, star_schedule, DyadicTree, WaveletCoefficients,
};
use crate::domain::{is_distribution, total_violations, verify_regularity, KnownLosses, RandomSource};
use crate::environments::{generate_environment, EnvironmentKind, EnvironmentSpec};
use crate::experts::{
    cumulative, exp4_penalized_estimates, exp4_range_estimates, hedge_distribution, rtb_estimates,
};

use super::csv::render_csv;
use super::runner::{run_experiment, Algorithm, ExperimentConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, failures: usize, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed: failures == 0, detail }
}

fn random_dist(rng: &mut RandomSource, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn check_distributions(rng: &mut RandomSource) -> CheckOutcome {
    let mut bad = 0;
    for _ in 0..500 {
        let n = 1 + rng.below(16);
        let cum: Vec<f64> = (0..n).map(|_| rng.range(-1e4, 1e4)).collect();
        if !is_distribution(&hedge_distribution(&cum, rng.range(1e-4, 10.0)), 1e-9) {
            bad += 1;
        }
    }
    outcome("hedge distributions", bad, format!("{bad} of 500 invalid"))
}

fn check_sampling(rng: &mut RandomSource) -> CheckOutcome {
    let p = [0.1, 0.25, 0.05, 0.6];
    let n = 100_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        counts[rng.categorical(&p)] += 1;
    }
    let bad = p
        .iter()
        .zip(&counts)
        .filter(|(&q, &c)| {
            let se = (q * (1.0 - q) / n as f64).sqrt();
            (c as f64 / n as f64 - q).abs() > 4.0 * se
        })
        .count();
    outcome("inverse-cdf sampling", bad, format!("counts {counts:?}"))
}

fn check_unbiased(rng: &mut RandomSource) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = 2 + rng.below(8);
        let mut q = random_dist(rng, k);
        let gamma = 0.05;
        for x in &mut q {
            *x *= 1.0 - gamma;
        }
        q[0] += gamma;
        let cdf = cumulative(&q);
        let loss: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
        let support: Vec<usize> = (0..k).filter(|_| rng.uniform() < 0.6).collect();
        let support = if support.is_empty() { vec![k - 1] } else { support };
        let anchor = *support.last().unwrap();
        let mut rtb = vec![0.0; k];
        let mut range = vec![0.0; support.len()];
        let mut pen = vec![0.0; support.len()];
        let (e, alpha) = (2.0, 0.3);
        for played in 0..k {
            let mut src = KnownLosses(&loss);
            let r = rtb_estimates(&q, played, &mut src).unwrap();
            let a = exp4_range_estimates(&mut src, &support, &cdf, played).unwrap();
            let b = exp4_penalized_estimates(&mut src, &support, &cdf, played, e, alpha, gamma).unwrap();
            for i in 0..k {
                rtb[i] += q[played] * r[i];
            }
            for j in 0..support.len() {
                range[j] += q[played] * a[j];
                pen[j] += q[played] * b[j];
            }
        }
        for i in 0..k {
            worst = worst.max((rtb[i] - loss[i]).abs());
        }
        for (j, &i) in support.iter().enumerate() {
            let diff = loss[i] - loss[anchor];
            worst = worst.max((range[j] - diff).abs());
            worst = worst.max((pen[j] - (diff + e - alpha / cdf[i] + alpha / gamma)).abs());
        }
    }
    outcome("estimator unbiasedness", usize::from(worst > 1e-10), format!("max error {worst:.2e}"))
}

fn check_wavelets(rng: &mut RandomSource) -> CheckOutcome {
    let mut bad = 0;
    for _ in 0..20 {
        let (a, b, c) = (rng.range(-1.0, 1.0), rng.uniform(), rng.uniform());
        let f = move |x: &[f64]| (c + a * (x[0] - b).abs()).clamp(0.0, 1.0);
        for depth in 1..=5 {
            let w = WaveletCoefficients::fit(f, 1, depth);
            let err = (0..=2000)
                .map(|i| {
                    let x = [i as f64 / 2000.0];
                    (w.eval(&x) - f(&x)).abs()
                })
                .fold(0.0, f64::max);
            if err > 0.5f64.powi(depth as i32) + 1e-12 {
                bad += 1;
            }
        }
    }
    outcome("wavelet approximation", bad, format!("{bad} fits above bound"))
}

fn check_tree() -> CheckOutcome {
    let detail = match FunctionDictionary::canonical(1, 4, 4, 5)
        .and_then(|d| CoveringTree::build(&d, 3).map(|t| (d, t)))
        .and_then(|(d, t)| t.check_leaf_spread(&d).map(|_| t.nodes().len()))
    {
        Ok(n) => return outcome("covering tree leaf spread", 0, format!("{n} nodes")),
        Err(e) => e.to_string(),
    };
    outcome("covering tree leaf spread", 1, detail)
}

fn check_schedule() -> CheckOutcome {
    let mut bad = 0;
    for d in 1..=6 {
        for t in [3u64, 100, 4096, 1 << 20] {
            let s = star_schedule(t, d).unwrap();
            for m in 1..=s.depth as usize {
                let lhs = s.penalties[m - 1];
                let rhs = s.penalties[m] + 2f64.powi(4 - 2 * m as i32) * s.rates[m];
                if (lhs - rhs).abs() > 1e-12 {
                    bad += 1;
                }
            }
        }
    }
    outcome("schedule identities", bad, format!("{bad} mismatches"))
}

fn check_counts() -> CheckOutcome {
    let mut bad = 0;
    for d in 1..=3 {
        for m in 1..=4u32 {
            let tree = DyadicTree::new(d, m);
            let active = tree.activate_path(&vec![0.3; d]).len();
            if active as u64 != (3u64.pow(m) - 1) / 2 || exp4_node_count(d, m) != enumerate_exp4_nodes(d, m) {
                bad += 1;
            }
        }
    }
    outcome("dyadic node counts", bad, format!("{bad} mismatches"))
}

fn check_environments() -> CheckOutcome {
    let mut bad = 0;
    for kind in [EnvironmentKind::AuctionIid, EnvironmentKind::AuctionAdversarial, EnvironmentKind::LipschitzSynthetic] {
        let spec = EnvironmentSpec::new(kind, 2, 50, 11);
        for r in generate_environment(&spec).unwrap() {
            if !verify_regularity(&r.loss, 101, 1e-12) {
                bad += 1;
            }
        }
    }
    outcome("environment regularity", bad, format!("{bad} losses fail their tag"))
}

fn check_runs() -> CheckOutcome {
    let before = total_violations();
    let mut bad = 0;
    let mut detail = String::new();
    for algorithm in Algorithm::ALL {
        let mut c = ExperimentConfig::new(algorithm, EnvironmentKind::AuctionIid, 1, 60);
        c.replicates = 2;
        c.seed = 5;
        let runs: Vec<_> = (0..2).map(|_| run_experiment(&c).map(|r| render_csv(&r.traces))).collect();
        match (&runs[0], &runs[1]) {
            (Ok(a), Ok(b)) if a == b => {}
            (Err(e), _) | (_, Err(e)) => {
                bad += 1;
                detail.push_str(&format!("{algorithm}: {e}; "));
            }
            _ => {
                bad += 1;
                detail.push_str(&format!("{algorithm}: nondeterministic; "));
            }
        }
    }
    let violations = total_violations() - before;
    bad += violations as usize;
    outcome("short runs", bad, format!("{detail}{violations} feedback violations"))
}

/// Runs every check; the suite passes when all outcomes pass.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = RandomSource::new(seed);
    vec![
        check_distributions(&mut rng),
        check_sampling(&mut rng),
        check_unbiased(&mut rng),
        check_wavelets(&mut rng),
        check_tree(),
        check_schedule(),
        check_counts(),
        check_environments(),
        check_runs(),
    ]
}
