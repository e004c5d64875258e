mod common;

use robusthedge::arbitrage::{global_na_qs, na_prior, PatternFamily};
use robusthedge::duality::dual_sup;
use robusthedge::fixtures::{fix_b, fix_d, random_instance, seeded_rng, RandomBounds};
use robusthedge::model::{prior_measure, pure_selection_count, pure_selections, DEFAULT_CAP};
use robusthedge::pricing::{price_lower, price_mono, price_quasi_sure};
use robusthedge::rational::{int, ratio};
use robusthedge::{Claim, MarketModel, Node, ProductPrior};

fn fix_d_mixture() -> ProductPrior {
    ProductPrior {
        mixtures: [
            (Node::root(), vec![ratio(1, 2), ratio(1, 2)]),
            (Node(vec![0]), vec![int(1), int(0)]),
            (Node(vec![1]), vec![ratio(1, 4), ratio(3, 4)]),
        ]
        .into_iter()
        .collect(),
    }
}

#[test]
fn fix_d_prices_frozen() {
    let (m, h) = fix_d(0);
    let prices: Vec<_> = ["", "u", "d", "u/u", "u/d", "d/u", "d/d"]
        .iter()
        .map(|k| m.prices().at(&m.lattice().parse_key(k).unwrap())[0].clone())
        .collect();
    assert_eq!(prices, [0, 3, -2, 4, -1, 2, -6].map(int));
    assert_eq!(price_quasi_sure(&m, &h).unwrap().price, ratio(47, 25));
    assert_eq!(dual_sup(&m, &h).unwrap().value, ratio(47, 25));
    let q_star = PatternFamily::q_star(&m, DEFAULT_CAP).unwrap();
    assert_eq!(price_lower(&m, &q_star, &h).unwrap().price, ratio(47, 25));
    assert_eq!(q_star.pattern_count(&m), 8);
    let call = Claim::from_fn(&m, |_, s| (&s[0] - int(1)).max(int(0)));
    assert_eq!(price_quasi_sure(&m, &call).unwrap().price, ratio(63, 50));
}

#[test]
fn fix_d_leaf_measure_frozen() {
    let (m, _) = fix_d(0);
    let measure = prior_measure(&m, &fix_d_mixture()).unwrap();
    let got: Vec<_> = ["u/u", "u/d", "d/u", "d/d"]
        .iter()
        .map(|k| measure[&m.lattice().parse_key(k).unwrap()].clone())
        .collect();
    assert_eq!(got, vec![ratio(1, 8), ratio(1, 8), ratio(3, 32), ratio(21, 32)]);
    assert_eq!(measure, common::leaf_measure(&m, &fix_d_mixture()));
}

#[test]
fn fix_d_selection_count_matches_enumeration() {
    for seed in 0..5 {
        let (m, _) = fix_d(seed);
        let product: u128 = m.kernel_sets().values().map(|k| k.generators.len() as u128).product();
        assert_eq!(pure_selection_count(&m), product);
        assert_eq!(pure_selections(&m, DEFAULT_CAP).unwrap().len() as u128, product);
    }
}

#[test]
fn fix_d_pure_selection_verdicts_match_oracle() {
    for seed in 0..5 {
        let (m, h) = fix_d(seed);
        for p in pure_selections(&m, DEFAULT_CAP).unwrap() {
            assert_eq!(na_prior(&m, &p).unwrap().holds, common::na_prior(&m, &p));
            assert_eq!(price_mono(&m, &p, &h).ok().map(|r| r.price), common::price_mono(&m, &p, &h));
        }
    }
}

fn compare_with_oracle(m: &MarketModel, h: &Claim) {
    assert_eq!(global_na_qs(m).unwrap().holds, common::na_qs(m));
    assert_eq!(price_quasi_sure(m, h).ok().map(|r| r.price), common::price_qs(m, h));
    if common::na_qs(m) {
        assert_eq!(Some(dual_sup(m, h).unwrap().value), common::dual_value(m, h));
    }
    let lower = PatternFamily::q_star(m, DEFAULT_CAP).and_then(|q| price_lower(m, &q, h));
    assert_eq!(lower.ok().map(|l| l.price), common::price_lower_qstar(m, h).map(|x| x.0));
    let u = ProductPrior::uniform(m);
    assert_eq!(price_mono(m, &u, h).ok().map(|r| r.price), common::price_mono(m, &u, h));
}

#[test]
fn tiny_instances_match_oracle() {
    let mut rng = seeded_rng(11);
    for _ in 0..60 {
        let (m, h) = random_instance(&mut rng, &RandomBounds::TINY);
        compare_with_oracle(&m, &h);
    }
}

#[test]
fn truncations_match_oracle() {
    for n in [1, 2, 5] {
        let (m, h) = fix_b(n).unwrap();
        compare_with_oracle(&m, &h);
    }
}

#[test]
fn oracle_solver_sanity() {
    // unique martingale measure of the two-point market {+1, -1}
    let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
    let v = common::vertices(&a, &[int(1), int(0)], 2);
    assert_eq!(v, vec![vec![ratio(1, 2), ratio(1, 2)]]);
    assert!(common::solve_unique(&[vec![int(1), int(1)]], &[int(1)]).is_none());
}
