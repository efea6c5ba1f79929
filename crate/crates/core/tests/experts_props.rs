use chainbench::domain::{is_distribution, KnownLosses, RandomSource};
use chainbench::experts::{
    cumulative, exp4_penalized_estimates, exp4_range_estimates, hedge_distribution, rtb_estimates,
    AdaptiveRate, Exp3Rtb,
};
use proptest::prelude::*;

fn normalize(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

proptest! {
    #[test]
    fn hedge_is_distribution(cum in prop::collection::vec(-1e6f64..1e6, 1..20), eta in 1e-6f64..50.0) {
        let p = hedge_distribution(&cum, eta);
        prop_assert!(is_distribution(&p, 1e-9));
    }

    #[test]
    fn hedge_ignores_common_shift(cum in prop::collection::vec(0.0f64..100.0, 1..10), shift in -50.0f64..50.0, eta in 0.01f64..2.0) {
        let shifted: Vec<f64> = cum.iter().map(|c| c + shift).collect();
        let (a, b) = (hedge_distribution(&cum, eta), hedge_distribution(&shifted, eta));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn hedge_orders_by_loss(cum in prop::collection::vec(0.0f64..10.0, 2..10), eta in 0.01f64..5.0) {
        let p = hedge_distribution(&cum, eta);
        for i in 0..cum.len() {
            for j in 0..cum.len() {
                if cum[i] < cum[j] {
                    prop_assert!(p[i] >= p[j]);
                }
            }
        }
    }

    #[test]
    fn rtb_floor_on_lowest_price(gamma in 0.02f64..0.9, seed in 0u64..1000) {
        let mut rtb = Exp3Rtb::new(gamma).unwrap();
        let mut rng = RandomSource::new(seed);
        let k = rtb.grid().count();
        prop_assert_eq!(k, (1.0 / gamma).ceil() as usize);
        let est: Vec<f64> = (0..k).map(|_| rng.range(0.0, 40.0)).collect();
        rtb.apply(&est);
        let q = rtb.sampling_distribution();
        prop_assert!(is_distribution(&q, 1e-9));
        prop_assert!(q[0] >= gamma - 1e-12);
        let cdf = cumulative(&q);
        prop_assert!(cdf.iter().all(|&c| c >= gamma - 1e-12));
    }

    #[test]
    fn rtb_estimates_vanish_below_play(raw in prop::collection::vec(0.01f64..1.0, 2..12), pick in 0usize..100) {
        let q = normalize(&raw);
        let played = pick % q.len();
        let loss: Vec<f64> = (0..q.len()).map(|i| (i as f64 * 0.37).fract()).collect();
        let est = rtb_estimates(&q, played, &mut KnownLosses(&loss)).unwrap();
        for (k, e) in est.iter().enumerate() {
            if k < played {
                prop_assert_eq!(*e, 0.0);
            } else {
                prop_assert!(*e >= 0.0);
            }
        }
    }

    #[test]
    fn penalized_nonnegative_under_range(
        raw in prop::collection::vec(0.01f64..1.0, 2..10),
        gamma in 0.01f64..0.5,
        alpha in 0.0f64..1.0,
        pick in 0usize..100,
        seed in 0u64..500,
    ) {
        let mut q: Vec<f64> = normalize(&raw).iter().map(|x| x * (1.0 - gamma)).collect();
        q[0] += gamma;
        let cdf = cumulative(&q);
        let mut rng = RandomSource::new(seed);
        let loss: Vec<f64> = (0..q.len()).map(|_| rng.uniform()).collect();
        let support: Vec<usize> = (0..q.len()).collect();
        let played = pick % q.len();
        // range 1 always bounds the spread of losses in [0, 1]
        let est = exp4_penalized_estimates(&mut KnownLosses(&loss), &support, &cdf, played, 1.0, alpha, gamma).unwrap();
        prop_assert!(est.iter().all(|&e| e >= -1e-12));
    }

    #[test]
    fn range_estimates_zero_at_anchor(raw in prop::collection::vec(0.01f64..1.0, 2..10), pick in 0usize..100) {
        let q = normalize(&raw);
        let cdf = cumulative(&q);
        let loss: Vec<f64> = (0..q.len()).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let support: Vec<usize> = (0..q.len()).step_by(2).collect();
        let played = pick % q.len();
        let est = exp4_range_estimates(&mut KnownLosses(&loss), &support, &cdf, played).unwrap();
        prop_assert_eq!(*est.last().unwrap(), 0.0);
    }

    #[test]
    fn adaptive_rate_nonincreasing_and_capped(
        cap in 1e-3f64..1.0,
        rounds in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), 1..40),
    ) {
        let mut rate = AdaptiveRate::with_cap(3, cap);
        let mut last = rate.rate();
        prop_assert_eq!(last, cap);
        for losses in &rounds {
            rate.observe(&[0.2, 0.3, 0.5], losses);
            prop_assert!(rate.rate() <= last);
            prop_assert!(rate.rate() <= cap);
            last = rate.rate();
        }
    }
}

#[test]
fn penalized_example_from_zero_range() {
    let loss = [0.3, 0.3, 0.3];
    let cdf = [0.5, 0.8, 1.0];
    let est = exp4_penalized_estimates(&mut KnownLosses(&loss), &[0, 1, 2], &cdf, 1, 0.4, 0.0, 0.1).unwrap();
    assert_eq!(est[0], 0.0);
    assert!((est[1] - 0.4 / 0.8).abs() < 1e-12);
    assert!((est[2] - 0.4).abs() < 1e-12);
}
