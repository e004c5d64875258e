//! Canonical markets and seeded random instances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duality::dual_sup;
use crate::error::{Error, Result};
use crate::model::{pure_selections, Claim, Kernel, MarketModel, Node, ScenarioLattice, DEFAULT_CAP};
use crate::pricing::{price_mono, price_quasi_sure};
use crate::rational::{int, ratio, Rational};
use crate::supports::reachable;

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn one_period(
    outcomes: Vec<String>,
    s0: Rational,
    s1: Vec<Rational>,
    generators: Vec<Kernel>,
) -> Result<MarketModel> {
    let lattice = ScenarioLattice::new(vec![outcomes])?;
    let mut prices = BTreeMap::new();
    prices.insert(Node::root(), vec![s0]);
    for (o, s) in s1.into_iter().enumerate() {
        prices.insert(Node(vec![o]), vec![s]);
    }
    MarketModel::new(lattice, 1, prices, [(Node::root(), generators)].into())
}

/// Binomial step `S_0 = 1`, `S_1 ∈ {2, 0}`, one fair generator, digital claim on `u`.
pub fn fix_a() -> (MarketModel, Claim) {
    let model = one_period(
        labels(&["u", "d"]),
        int(1),
        vec![int(2), int(0)],
        vec![Kernel::new(vec![ratio(1, 2), ratio(1, 2)]).expect("valid kernel")],
    )
    .expect("valid fixture");
    let claim = Claim::from_fn(&model, |leaf, _| if leaf.0[0] == 0 { int(1) } else { int(0) });
    (model, claim)
}

/// `S_0 = 0`, `S_1 ∈ {−1} ∪ {1 + 1/n : n ≤ N}`, generators `½δ_{−1} + ½δ_{1+1/n}`,
/// claim `1_{S_1 ≥ 1}`. Outcome `down` is `−1`, outcome `n<k>` is `1 + 1/k`.
pub fn fix_b(n: usize) -> Result<(MarketModel, Claim)> {
    if n == 0 {
        return Err(Error::BadParameter("N must be at least 1".into()));
    }
    let mut outcomes = vec!["down".to_string()];
    outcomes.extend((1..=n).map(|k| format!("n{k}")));
    let mut s1 = vec![int(-1)];
    s1.extend((1..=n as i64).map(|k| ratio(k + 1, k)));
    let generators = (1..=n)
        .map(|k| {
            let mut w = vec![Rational::from_integer(0.into()); n + 1];
            w[0] = ratio(1, 2);
            w[k] = ratio(1, 2);
            Kernel::new(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let model = one_period(outcomes, int(0), s1, generators)?;
    let claim = Claim::from_fn(&model, |_, s| if s[0] >= int(1) { int(1) } else { int(0) });
    Ok((model, claim))
}

/// `S_0 = 0`, `S_1 ∈ {0, 1}`: a one-sided market with an obvious arbitrage.
pub fn fix_c() -> (MarketModel, Claim) {
    let model = one_period(
        labels(&["flat", "up"]),
        int(0),
        vec![int(0), int(1)],
        vec![Kernel::new(vec![ratio(1, 2), ratio(1, 2)]).expect("valid kernel")],
    )
    .expect("valid fixture");
    let claim = Claim::from_fn(&model, |_, s| s[0].clone());
    (model, claim)
}

/// Two binary periods, `S_0 = 0`, increments `+a`/`−b` with `a, b ∈ 1..=4`.
/// Every node carries a full-support kernel `(p, 1 − p)` with
/// `p ∈ {1/4, 1/3, 1/2, 2/3, 3/4}` and a point mass on a random outcome.
/// The claim is `max(S_2, 0)`.
pub fn fix_d(seed: u64) -> (MarketModel, Claim) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattice = ScenarioLattice::new(vec![labels(&["u", "d"]), labels(&["u", "d"])]).expect("valid lattice");
    let probs = [ratio(1, 4), ratio(1, 3), ratio(1, 2), ratio(2, 3), ratio(3, 4)];
    let mut prices = BTreeMap::new();
    prices.insert(Node::root(), vec![int(0)]);
    let mut generators = BTreeMap::new();
    for node in lattice.non_terminal_nodes() {
        let s = prices[&node][0].clone();
        let a = int(rng.random_range(1..=4));
        let b = int(rng.random_range(1..=4));
        prices.insert(node.child(0), vec![&s + a]);
        prices.insert(node.child(1), vec![s - b]);
        let p = probs[rng.random_range(0..probs.len())].clone();
        let full = Kernel::new(vec![p.clone(), int(1) - p]).expect("valid kernel");
        let point = Kernel::point_mass(2, rng.random_range(0..2));
        generators.insert(node, vec![full, point]);
    }
    let model = MarketModel::new(lattice, 1, prices, generators).expect("valid fixture");
    let claim = Claim::from_fn(&model, |_, s| s[0].clone().max(int(0)));
    (model, claim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixtureSpec {
    A,
    B(usize),
    C,
    D(u64),
}

impl FixtureSpec {
    /// Accepts `A`..`D` or `FIX-A`..`FIX-D` (any case); `param` is `N` for B and the seed for D.
    pub fn parse(name: &str, param: Option<u64>) -> Result<Self> {
        let upper = name.to_ascii_uppercase();
        let letter = upper.strip_prefix("FIX-").unwrap_or(&upper);
        match letter {
            "A" => Ok(FixtureSpec::A),
            "B" => Ok(FixtureSpec::B(param.unwrap_or(2) as usize)),
            "C" => Ok(FixtureSpec::C),
            "D" => Ok(FixtureSpec::D(param.unwrap_or(0))),
            _ => Err(Error::BadParameter(format!("unknown fixture `{name}`"))),
        }
    }
}

impl fmt::Display for FixtureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureSpec::A => write!(f, "FIX-A"),
            FixtureSpec::B(n) => write!(f, "FIX-B({n})"),
            FixtureSpec::C => write!(f, "FIX-C"),
            FixtureSpec::D(s) => write!(f, "FIX-D({s})"),
        }
    }
}

impl FromStr for FixtureSpec {
    type Err = Error;

    /// `FIX-B(5)`, `B:5`, `D`, ...
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = if let Some(open) = s.find('(') {
            (&s[..open], Some(s[open + 1..].trim_end_matches(')')))
        } else if let Some((n, p)) = s.split_once(':') {
            (n, Some(p))
        } else {
            (s, None)
        };
        let param = param
            .map(|p| p.parse::<u64>().map_err(|_| Error::BadParameter(format!("bad parameter `{p}`"))))
            .transpose()?;
        FixtureSpec::parse(name, param)
    }
}

pub fn make_fixture(spec: FixtureSpec) -> Result<(MarketModel, Claim)> {
    match spec {
        FixtureSpec::A => Ok(fix_a()),
        FixtureSpec::B(n) => fix_b(n),
        FixtureSpec::C => Ok(fix_c()),
        FixtureSpec::D(seed) => Ok(fix_d(seed)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub n: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub quasi_sure: Rational,
    /// `max_k π^{P_k}(H)` over the single generators.
    #[serde(with = "crate::rational::serde_rational")]
    pub best_single: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub dual: Rational,
}

/// Prices of the truncated digital market for each `N`.
pub fn truncation_report(ns: &[usize]) -> Result<Vec<TruncationRow>> {
    ns.iter()
        .map(|&n| {
            let (model, claim) = fix_b(n)?;
            let mut best: Option<Rational> = None;
            for p in pure_selections(&model, DEFAULT_CAP)? {
                let v = price_mono(&model, &p, &claim)?.price;
                if best.as_ref().is_none_or(|b| &v > b) {
                    best = Some(v);
                }
            }
            Ok(TruncationRow {
                n,
                quasi_sure: price_quasi_sure(&model, &claim)?.price,
                best_single: best.expect("at least one generator"),
                dual: dual_sup(&model, &claim)?.value,
            })
        })
        .collect()
}

/// Size limits for random markets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomBounds {
    pub max_horizon: usize,
    pub max_outcomes: usize,
    pub max_assets: usize,
    pub max_generators: usize,
}

impl RandomBounds {
    pub const STANDARD: RandomBounds = RandomBounds {
        max_horizon: 3,
        max_outcomes: 4,
        max_assets: 2,
        max_generators: 3,
    };

    /// At most 9 leaves.
    pub const TINY: RandomBounds = RandomBounds {
        max_horizon: 2,
        max_outcomes: 3,
        max_assets: 2,
        max_generators: 3,
    };
}

/// Random kernel: weights in `1..=4` on a random nonempty subset, or on all
/// outcomes when `full`; the normalizing sum stays at most 16.
fn random_kernel(rng: &mut impl Rng, width: usize, full: bool) -> Kernel {
    loop {
        let raw: Vec<i64> = (0..width)
            .map(|_| if full || rng.random_bool(0.6) { rng.random_range(1..=4) } else { 0 })
            .collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return Kernel::new(raw.iter().map(|&w| ratio(w, total)).collect()).expect("valid kernel");
        }
    }
}

/// Increments `y_j − Σ_k w_k y_k / W` for integer `y_j ∈ −3..=3` and weights
/// `w_k ∈ 1..=4`, so zero is a strictly positive combination of the points.
fn centered_increments(rng: &mut impl Rng, count: usize, assets: usize) -> Vec<Vec<Rational>> {
    let weights: Vec<i64> = (0..count).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let raw: Vec<Vec<i64>> = (0..count)
        .map(|_| (0..assets).map(|_| rng.random_range(-3..=3)).collect())
        .collect();
    (0..count)
        .map(|j| {
            (0..assets)
                .map(|i| {
                    let mean: i64 = raw.iter().zip(&weights).map(|(y, w)| y[i] * w).sum();
                    ratio(raw[j][i] * total - mean, total)
                })
                .collect()
        })
        .collect()
}

/// A random market within `bounds` plus a random claim.
///
/// Increments are centered so the full outcome set never admits an
/// arbitrage; generators charging only part of it can still break NA.
pub fn random_instance(rng: &mut impl Rng, bounds: &RandomBounds) -> (MarketModel, Claim) {
    let horizon = rng.random_range(1..=bounds.max_horizon);
    let assets = rng.random_range(1..=bounds.max_assets);
    let periods: Vec<Vec<String>> = (0..horizon)
        .map(|_| {
            let k = rng.random_range(2..=bounds.max_outcomes.max(2));
            (0..k).map(|o| format!("o{o}")).collect()
        })
        .collect();
    let lattice = ScenarioLattice::new(periods).expect("valid lattice");
    let mut prices = BTreeMap::new();
    prices.insert(
        Node::root(),
        (0..assets).map(|_| int(rng.random_range(-2..=2))).collect::<Vec<_>>(),
    );
    let mut generators = BTreeMap::new();
    for node in lattice.non_terminal_nodes() {
        let width = lattice.branching(&node);
        let s = prices[&node].clone();
        for (o, inc) in centered_increments(rng, width, assets).into_iter().enumerate() {
            let next: Vec<Rational> = s.iter().zip(inc).map(|(a, b)| a + b).collect();
            prices.insert(node.child(o), next);
        }
        let count = rng.random_range(1..=bounds.max_generators);
        let full_first = rng.random_bool(0.75);
        let gens: Vec<Kernel> = (0..count)
            .map(|g| random_kernel(rng, width, g == 0 && full_first))
            .collect();
        generators.insert(node, gens);
    }
    let model = MarketModel::new(lattice, assets, prices, generators).expect("valid random market");
    let claim = random_claim(rng, &model);
    (model, claim)
}

/// Payoffs `k/q` with `k ∈ −4..=8`, `q ∈ {1, 2, 4}`.
pub fn random_claim(rng: &mut impl Rng, model: &MarketModel) -> Claim {
    let values: BTreeMap<Node, Rational> = model
        .lattice()
        .leaves()
        .into_iter()
        .map(|l| {
            let q = [1, 2, 4][rng.random_range(0..3)];
            (l, ratio(rng.random_range(-4..=8), q))
        })
        .collect();
    Claim::new(model.lattice(), values).expect("payoff at every leaf")
}

/// Shifts asset 0 in every subtree below a random reachable non-terminal
/// node so that all its increments become at least 1. Returns the node.
pub fn inject_arbitrage(rng: &mut impl Rng, model: &MarketModel) -> (MarketModel, Node) {
    let tree = reachable(model);
    let nodes = tree.non_terminal();
    let node = nodes[rng.random_range(0..nodes.len())].clone();
    let lattice = model.lattice();
    let mut prices = model.prices().values().clone();
    for child in lattice.children(&node) {
        let inc = &prices[&child][0] - &prices[&node][0];
        let shift = int(1) - inc;
        for (n, s) in prices.iter_mut() {
            if n.extends(&child) {
                s[0] += &shift;
            }
        }
    }
    (model.with_prices(prices).expect("same shape"), node)
}

/// Deterministic RNG for instance streams.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
