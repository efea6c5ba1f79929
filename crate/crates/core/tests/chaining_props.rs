use chainbench::chaining::{CoveringTree, FunctionDictionary, HierExp4, HierHedge, Policy};
use chainbench::domain::{
    is_distribution, Context, FeedbackModel, GuardedFeedback, LossFunction, RandomSource,
    Regularity,
};
use chainbench::environments::{generate_environment, EnvironmentKind, EnvironmentSpec};
use chainbench::experts::HedgeState;
use chainbench::Learner;
use proptest::prelude::*;

fn small_dict() -> FunctionDictionary {
    FunctionDictionary::canonical(1, 2, 4, 5).unwrap()
}

fn constants(values: &[f64]) -> FunctionDictionary {
    let members = values.iter().map(|&c| Policy::new(format!("c{c}"), move |_: &[f64]| c)).collect();
    FunctionDictionary::new(1, 3, members).unwrap()
}

#[test]
fn levels_are_nested_covers_with_closest_parents() {
    let dict = FunctionDictionary::canonical(1, 3, 6, 7).unwrap();
    let tree = CoveringTree::build(&dict, 4).unwrap();
    for m in 0..=4 {
        let members: Vec<usize> = tree.level(m).iter().map(|&v| tree.node(v).member).collect();
        for i in 0..dict.len() {
            let d = members.iter().map(|&c| dict.distance(c, i)).fold(f64::INFINITY, f64::min);
            assert!(d <= 0.5f64.powi(m as i32) + 1e-12, "level {m} misses member {i}");
        }
        if m > 0 {
            let prev: Vec<usize> = tree.level(m - 1).iter().map(|&v| tree.node(v).member).collect();
            assert!(prev.iter().all(|p| members.contains(p)), "level {m} does not extend level {}", m - 1);
            for &v in tree.level(m) {
                let parent = tree.node(v).parent.unwrap();
                let mine = dict.distance(tree.node(parent).member, tree.node(v).member);
                for &u in tree.level(m - 1) {
                    let d = dict.distance(tree.node(u).member, tree.node(v).member);
                    assert!(mine < d || (mine == d && parent <= u));
                }
            }
        }
    }
}

#[test]
fn rejects_non_lipschitz_members() {
    let steep = Policy::new("steep", |x: &[f64]| (3.0 * x[0]).min(1.0));
    assert!(FunctionDictionary::new(1, 9, vec![steep]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plan_supports_come_from_leaves(x in 0.0f64..=1.0, seed in 0u64..50) {
        let mut learner = HierExp4::with_depth(small_dict(), 0.1, 3).unwrap();
        let spec = EnvironmentSpec::new(EnvironmentKind::LipschitzSynthetic, 1, 30, seed);
        let mut rng = RandomSource::new(seed);
        for r in generate_environment(&spec).unwrap() {
            let mut guard = GuardedFeedback::new(FeedbackModel::OneSidedFull, &r.loss);
            learner.play_round(&r.context, &mut rng, &mut guard).unwrap();
        }
        let ctx = Context::new(vec![x]);
        let plan = learner.plan(&ctx);
        prop_assert!(is_distribution(&plan.root_mixture, 1e-9));
        prop_assert!(plan.root_mixture[0] >= 0.1 - 1e-12);
        let tree = learner.tree();
        let grid = learner.grid();
        let dict = learner.dictionary();
        for v in 0..tree.nodes().len() {
            let allowed: Vec<usize> = tree
                .leaves_under(v)
                .iter()
                .map(|&w| grid.nearest_index(dict.eval(tree.node(w).member, &ctx)))
                .collect();
            let dist = plan.dist(v);
            let mass: f64 = dist.iter().map(|e| e.1).sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);
            for &(i, _) in dist {
                prop_assert!(allowed.contains(&i));
            }
            prop_assert!(dist.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn one_sided_learners_respect_guard(seed in 0u64..30) {
        let spec = EnvironmentSpec::new(EnvironmentKind::AuctionIid, 1, 40, seed);
        let mut exp4 = HierExp4::with_depth(small_dict(), 0.2, 2).unwrap();
        let mut rng = RandomSource::new(seed);
        for r in generate_environment(&spec).unwrap() {
            let mut guard = GuardedFeedback::new(exp4.feedback_model(), &r.loss);
            let play = exp4.play_round(&r.context, &mut rng, &mut guard).unwrap();
            prop_assert_eq!(guard.violations(), 0);
            prop_assert_eq!(guard.played_index(), Some(play.index));
        }
    }
}

#[test]
fn two_constant_tree_is_hedge() {
    let dict = constants(&[0.0, 1.0]);
    let mut hh = HierHedge::with_actions(dict, 1, vec![0.0, 1.0]).unwrap();
    assert_eq!(hh.tree().node(0).children.len(), 2);
    let mut hedge = HedgeState::new(2, 1.0);
    let mut rng = RandomSource::new(3);
    let order: Vec<usize> = hh.tree().node(0).children.iter().map(|&c| hh.tree().node(c).member).collect();
    for t in 0..200 {
        let slope = if t % 3 == 0 { 0.9 } else { -0.4 };
        let loss = LossFunction::custom(move |y| 0.5 + slope * (y - 0.5), Regularity::Lipschitz);
        hedge.set_rate(hh.tree().state(0).unwrap().rate.rate());
        let expected = hedge.distribution();
        let plan = hh.plan(&Context::new(vec![0.5]));
        assert_eq!(plan.weights_at(0), &expected[..]);
        let mut guard = GuardedFeedback::new(FeedbackModel::Full, &loss);
        hh.play_round(&Context::new(vec![0.5]), &mut rng, &mut guard).unwrap();
        let losses: Vec<f64> = order.iter().map(|&m| loss.eval(m as f64)).collect();
        hedge.update(&losses);
    }
}
