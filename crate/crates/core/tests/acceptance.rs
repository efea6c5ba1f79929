//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Every tolerance used below is pinned in the constants block.

use std::collections::HashSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use chainbench::chaining::{CoveringTree, FunctionDictionary};
use chainbench::chaining_efficient::{
    exp4_node_count, enumerate_exp4_nodes, star_schedule, DyadicIndex, HierExp4Star, StarSchedule,
    WaveletCoefficients,
};
use chainbench::domain::{
    total_violations, Context, FeedbackModel, GuardedFeedback, KnownLosses, RandomSource,
};
use chainbench::environments::EnvironmentKind;
use chainbench::experts::{
    cumulative, exp4_penalized_estimates, exp4_range_estimates, rtb_estimates, HedgeState,
};
use chainbench::harness::{run_experiment, Algorithm, ComparatorClass, ExperimentConfig};
use chainbench::Learner;

const UNBIASED_TOL: f64 = 1e-10;
const WAVELET_TOL: f64 = 1e-12;
const SPREAD_TOL: f64 = 1e-12;
const HEDGE_TOL: f64 = 1e-9;
const SCHEDULE_TOL: f64 = 1e-12;
const C1_STDERRS: f64 = 3.0;
const C7_STDERRS: f64 = 1.0;
const C8_SLOPE: f64 = 2.0 / 3.0 + 0.1;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn expected_regrets(config: &ExperimentConfig) -> Vec<f64> {
    let result = run_experiment(config).expect("experiment runs");
    result.traces.iter().map(|t| t.final_expected_regret()).collect()
}

fn random_dist(rng: &mut RandomSource, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn exp3_rtb_bound() -> Verdict {
    let t = 4096usize;
    let gamma = (t as f64).powf(-0.5);
    let mut c = ExperimentConfig::new(Algorithm::Exp3Rtb, EnvironmentKind::AuctionAdversarial, 1, t);
    c.gamma = Some(gamma);
    c.comparator.class = ComparatorClass::BestConstant;
    c.comparator.action_points = 4097;
    c.replicates = 50;
    c.seed = 1;
    c.environment.seed = 1;
    let (m, se) = mean_se(&expected_regrets(&c));
    let k = (1.0 / gamma).ceil();
    let bound = gamma * t as f64 * (2.0 + 0.25 * (std::f64::consts::E / gamma).ln())
        + 2.0 * k.ln() / gamma;
    let limit = bound + C1_STDERRS * se;
    verdict(m <= limit, format!("mean regret {m:.1} (se {se:.2}) vs bound {bound:.1} + 3se = {limit:.1}"))
}

fn estimator_unbiasedness() -> Verdict {
    let mut rng = RandomSource::new(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let k = 2 + rng.below(12);
        let gamma = rng.range(0.01, 0.5);
        let mut q: Vec<f64> = random_dist(&mut rng, k).iter().map(|x| x * (1.0 - gamma)).collect();
        q[0] += gamma;
        let loss: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
        let mut support: Vec<usize> = (0..k).filter(|_| rng.uniform() < 0.5).collect();
        if support.is_empty() {
            support.push(rng.below(k));
        }
        let anchor = *support.last().unwrap();
        let range = rng.range(0.0, 4.0);
        let alpha = rng.range(0.0, 2.0);
        let cdf: Vec<f64> = (0..k).map(|i| q[..=i].iter().sum()).collect();

        let mut rtb = vec![0.0; k];
        let mut rng_est = vec![0.0; support.len()];
        let mut pen = vec![0.0; support.len()];
        let lib_cdf = cumulative(&q);
        for played in 0..k {
            let mut src = KnownLosses(&loss);
            let r = rtb_estimates(&q, played, &mut src).unwrap();
            let a = exp4_range_estimates(&mut src, &support, &lib_cdf, played).unwrap();
            let b = exp4_penalized_estimates(&mut src, &support, &lib_cdf, played, range, alpha, gamma)
                .unwrap();
            for i in 0..k {
                rtb[i] += q[played] * r[i];
            }
            for j in 0..support.len() {
                rng_est[j] += q[played] * a[j];
                pen[j] += q[played] * b[j];
            }
        }
        for i in 0..k {
            worst = worst.max((rtb[i] - loss[i]).abs());
        }
        for (j, &i) in support.iter().enumerate() {
            let diff = loss[i] - loss[anchor];
            worst = worst.max((rng_est[j] - diff).abs());
            let target = diff + range - alpha / cdf[i] + alpha / gamma;
            worst = worst.max((pen[j] - target).abs());
        }
    }
    verdict(worst <= UNBIASED_TOL, format!("max deviation {worst:.2e} over 200 states"))
}

/// `clamp(c + sum_j w_j max(0, r_j - |x - z_j|_inf), 0, 1)` with `sum |w_j| <= 1`.
fn random_lipschitz(rng: &mut RandomSource, d: usize) -> impl Fn(&[f64]) -> f64 {
    let bumps = 1 + rng.below(4);
    let raw: Vec<f64> = (0..bumps).map(|_| rng.range(-1.0, 1.0)).collect();
    let norm = raw.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
    let parts: Vec<(Vec<f64>, f64, f64)> = raw
        .iter()
        .map(|w| ((0..d).map(|_| rng.uniform()).collect(), rng.range(0.05, 0.8), w / norm))
        .collect();
    let offset = rng.uniform();
    move |x: &[f64]| {
        let mut v = offset;
        for (z, r, w) in &parts {
            let dist = z.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v += w * (r - dist).max(0.0);
        }
        v.clamp(0.0, 1.0)
    }
}

fn eval_grid(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => (0..10_000).map(|i| vec![i as f64 / 9_999.0]).collect(),
        _ => (0..100)
            .flat_map(|i| (0..100).map(move |j| vec![i as f64 / 99.0, j as f64 / 99.0]))
            .collect(),
    }
}

fn wavelet_approximation() -> Verdict {
    let mut rng = RandomSource::new(3);
    let grids = [eval_grid(1), eval_grid(2)];
    let mut failures = 0;
    let mut fits = 0;
    let mut worst_ratio: f64 = 0.0;
    for n in 0..200 {
        let d = 1 + n % 2;
        let f = random_lipschitz(&mut rng, d);
        for m in 1..=6u32 {
            let w = WaveletCoefficients::fit(&f, d, m);
            let err = grids[d - 1].iter().map(|x| (w.eval(x) - f(x)).abs()).fold(0.0, f64::max);
            let bound = 0.5f64.powi(m as i32);
            worst_ratio = worst_ratio.max(err / bound);
            fits += 1;
            if err > bound + WAVELET_TOL {
                failures += 1;
            }
        }
    }
    verdict(failures == 0, format!("{failures} failures in {fits} fits, worst error/bound {worst_ratio:.3}"))
}

fn tree_geometry() -> Verdict {
    let mut failures = 0;
    let mut checked = 0;
    for (knots, levels, resolution, depth) in [(4, 8, 5, 5), (2, 4, 9, 4), (3, 6, 7, 5), (1, 8, 3, 4)] {
        let dict = FunctionDictionary::canonical(1, knots, levels, resolution).unwrap();
        let tree = CoveringTree::build(&dict, depth).unwrap();
        for v in 0..tree.nodes().len() {
            let node = tree.node(v);
            if node.children.is_empty() {
                continue;
            }
            let leaves = tree.leaves_under(v);
            let members: Vec<usize> = leaves.iter().map(|&w| tree.node(w).member).collect();
            // sup distance over pairs = max over grid points of the value range
            let spread = (0..resolution)
                .map(|g| {
                    let vals = members.iter().map(|&i| dict.samples(i)[g]);
                    let hi = vals.clone().fold(f64::MIN, f64::max);
                    let lo = vals.fold(f64::MAX, f64::min);
                    hi - lo
                })
                .fold(0.0, f64::max);
            checked += 1;
            if spread > 2f64.powi(2 - node.level as i32) + SPREAD_TOL {
                failures += 1;
            }
        }
    }
    verdict(failures == 0, format!("{failures} violations over {checked} internal nodes"))
}

fn feedback_discipline() -> Verdict {
    let mut errors = Vec::new();
    for alg in Algorithm::ALL {
        for d in [1usize, 2] {
            let kind = if alg == Algorithm::HierExp4 || alg == Algorithm::HierHedge {
                EnvironmentKind::LipschitzSynthetic
            } else {
                EnvironmentKind::AuctionIid
            };
            let mut c = ExperimentConfig::new(alg, kind, d, 200);
            c.replicates = 2;
            c.seed = 5;
            c.environment.seed = 5;
            if d == 2 {
                c.dictionary_knots = 2;
                c.dictionary_levels = 4;
            }
            if let Err(e) = run_experiment(&c) {
                errors.push(format!("{alg} d={d}: {e}"));
            }
        }
    }
    let v = total_violations();
    verdict(errors.is_empty() && v == 0, format!("violations {v}, errors {errors:?}"))
}

fn hedge_inequality() -> Verdict {
    let mut rng = RandomSource::new(6);
    let mut failures = 0;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..500 {
        let n = 1 + rng.below(8);
        let t = 1 + rng.below(64);
        let scale = rng.range(0.1, 5.0);
        let mut hedge = HedgeState::new(n, 1.0);
        let mut eta = rng.range(0.01, 3.0);
        let (mut learner, mut second) = (0.0, 0.0);
        let mut totals = vec![0.0; n];
        for _ in 0..t {
            eta *= rng.range(0.7, 1.0);
            hedge.set_rate(eta);
            let p = hedge.distribution();
            let loss: Vec<f64> = (0..n).map(|_| scale * rng.uniform()).collect();
            learner += p.iter().zip(&loss).map(|(a, b)| a * b).sum::<f64>();
            second += 0.5 * eta * p.iter().zip(&loss).map(|(a, b)| a * b * b).sum::<f64>();
            for (c, l) in totals.iter_mut().zip(&loss) {
                *c += l;
            }
            hedge.update(&loss);
        }
        let best = totals.iter().copied().fold(f64::INFINITY, f64::min);
        let slack = (n as f64).ln() / eta + second - (learner - best);
        worst_slack = worst_slack.min(slack);
        if slack < -HEDGE_TOL {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("{failures} failures in 500 instances, min slack {worst_slack:.3e}"))
}

fn feedback_ordering() -> Verdict {
    let mut means = Vec::new();
    let mut detail = Vec::new();
    for alg in [Algorithm::HierHedge, Algorithm::HierExp4, Algorithm::ContextualExp3] {
        let mut c = ExperimentConfig::new(alg, EnvironmentKind::LipschitzSynthetic, 1, 4096);
        c.environment.components = 1;
        c.environment.seed = 1;
        c.replicates = 30;
        c.seed = 1;
        let (m, se) = mean_se(&expected_regrets(&c));
        detail.push(format!("{alg} {m:.1}±{se:.2}"));
        means.push((m, se));
    }
    let ok = means.windows(2).all(|w| {
        let se = (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
        w[1].0 - w[0].0 > -C7_STDERRS * se
    });
    verdict(ok, detail.join(", "))
}

fn regret_slope() -> Verdict {
    let horizons = [1024usize, 4096, 16384];
    let mut c = ExperimentConfig::new(Algorithm::ContextualRtb, EnvironmentKind::AuctionIid, 1, 1024);
    c.environment.seed = 1;
    c.replicates = 20;
    c.seed = 1;
    let means: Vec<f64> = horizons
        .iter()
        .map(|&t| mean_se(&expected_regrets(&c.with_horizon(t))).0)
        .collect();
    let xs: Vec<f64> = horizons.iter().map(|&t| (t as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
    verdict(slope <= C8_SLOPE, format!("slope {slope:.3} <= {C8_SLOPE:.3}, means [{}]", shown.join(", ")))
}

fn star_accounting() -> Verdict {
    let mut problems = Vec::new();
    let mut rng = RandomSource::new(9);
    for d in 1..=3usize {
        for m in 1..=4u32 {
            let formula: u128 = (0..m).map(|k| 3u128.pow(k) * 2u128.pow(d as u32 * (k + 1))).sum();
            if exp4_node_count(d, m) != formula || enumerate_exp4_nodes(d, m) != formula {
                problems.push(format!("d={d} M={m}: total mismatch"));
            }
            let per_round = (3usize.pow(m) - 1) / 2;
            let schedule = StarSchedule::build(4096, d, Some(0.5f64.powi(m as i32)), Some(m)).unwrap();
            let mut learner = HierExp4Star::new(schedule);
            let loss = chainbench::domain::LossFunction::constant(0.5);
            let mut union: HashSet<_> = HashSet::new();
            let mut stored = 0;
            for _ in 0..40 {
                let x = Context((0..d).map(|_| rng.uniform()).collect());
                let path = learner.tree().activate_path(x.coords());
                let mut guard = GuardedFeedback::new(FeedbackModel::OneSidedFull, &loss);
                let plan_keys: usize = learner.plan(&x).keys.iter().map(Vec::len).sum();
                learner.play_round(&x, &mut rng, &mut guard).unwrap();
                let fresh = path.iter().filter(|k| union.insert(**k)).count();
                stored += fresh;
                if path.len() != per_round || plan_keys != per_round || learner.tree().stored_nodes() != stored {
                    problems.push(format!("d={d} M={m}: active {} / {plan_keys}", path.len()));
                }
            }
            // every depth-M cube's path, pooled, reaches every Exp4 node exactly once
            let mut all = HashSet::new();
            for flat in 0..1u64 << (d as u32 * m) {
                let center = DyadicIndex::from_flat(flat, m, d).center();
                all.extend(learner.tree().activate_path(&center));
            }
            if all.len() as u128 != formula {
                problems.push(format!("d={d} M={m}: pooled {} vs {formula}", all.len()));
            }
        }
    }
    verdict(problems.is_empty(), if problems.is_empty() { "12 (d, M) pairs exact".into() } else { problems.join("; ") })
}

fn schedule_identities() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in 1..=8usize {
        for t in [3u64, 10, 100, 1024, 4096, 65_536, 1 << 20, 1 << 30] {
            let s = star_schedule(t, d).unwrap();
            for m in 1..=s.depth as usize {
                let lhs = s.penalties[m - 1];
                let rhs = s.penalties[m] + 2f64.powi(4 - 2 * m as i32) * s.rates[m];
                worst = worst.max((lhs - rhs).abs());
                count += 1;
            }
        }
    }
    verdict(worst <= SCHEDULE_TOL, format!("max deviation {worst:.2e} over {count} identities"))
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "algorithm = contextual-rtb\nkind = auction-iid\ndimension = 1\nhorizon = 300\nreplicates = 3\nseed = 11\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_chainbench"))
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        (status.success(), std::fs::read(&out).unwrap_or_default())
    };
    let (ok_a, a) = run("a.csv");
    let (ok_b, b) = run("b.csv");
    verdict(ok_a && ok_b && !a.is_empty() && a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exp3-rtb regret bound", exp3_rtb_bound),
        ("estimator unbiasedness", estimator_unbiasedness),
        ("wavelet approximation", wavelet_approximation),
        ("covering tree leaf spread", tree_geometry),
        ("hedge inequality", hedge_inequality),
        ("feedback ordering", feedback_ordering),
        ("contextual rtb regret slope", regret_slope),
        ("dyadic tree node accounting", star_accounting),
        ("schedule identities", schedule_identities),
        ("cli determinism", cli_determinism),
    ];
    let numbers = [1, 2, 3, 4, 6, 7, 8, 9, 10, 11];
    let mut failed = 0;
    for ((name, check), n) in criteria.iter().zip(numbers) {
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.passed);
        let line = format!(
            "criterion {n:>2} {:<4} {name}: {} [{:.1}s]",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
        println!("{line}");
    }
    // runs last so the violation counter covers every learner run above
    let v = feedback_discipline();
    failed += usize::from(!v.passed);
    println!("criterion  5 {:<4} feedback discipline: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
