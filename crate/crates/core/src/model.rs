//! Finite scenario lattices, adapted prices, kernel generators and priors.
//!
//! A node is a path of outcome indices `(ω_1, …, ω_t)`; the root is the
//! empty path. Prior sets at each non-terminal node are the convex hulls of
//! finitely many generator kernels, and only the generators are stored.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{dot, format_rational, Rational};

/// Default cap on enumerations (pure selections, support patterns).
pub const DEFAULT_CAP: u64 = 1_000_000;

/// A path `(ω_1, …, ω_t)` of outcome indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node(pub Vec<usize>);

impl Node {
    pub fn root() -> Self {
        Node(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, outcome: usize) -> Node {
        let mut path = self.0.clone();
        path.push(outcome);
        Node(path)
    }

    pub fn parent(&self) -> Option<Node> {
        if self.0.is_empty() {
            None
        } else {
            Some(Node(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, t: usize) -> Node {
        Node(self.0[..t].to_vec())
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn extends(&self, ancestor: &Node) -> bool {
        self.0.starts_with(&ancestor.0)
    }
}

/// Outcome alphabets `Ω_1, …, Ω_T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioLattice {
    periods: Vec<Vec<String>>,
}

impl ScenarioLattice {
    pub fn new(periods: Vec<Vec<String>>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::validation("horizon", "horizon must be at least 1"));
        }
        for (t, outcomes) in periods.iter().enumerate() {
            let path = format!("periods[{t}].outcomes");
            if outcomes.is_empty() {
                return Err(Error::validation(path, "outcome list is empty"));
            }
            for (i, label) in outcomes.iter().enumerate() {
                if label.is_empty() || label.contains('/') {
                    return Err(Error::validation(
                        format!("{path}[{i}]"),
                        "labels must be non-empty and must not contain '/'",
                    ));
                }
                if outcomes[..i].contains(label) {
                    return Err(Error::validation(
                        format!("{path}[{i}]"),
                        format!("duplicate label `{label}`"),
                    ));
                }
            }
        }
        Ok(ScenarioLattice { periods })
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    /// Labels of `Ω_t`, with `t` counted from 1.
    pub fn outcomes(&self, t: usize) -> &[String] {
        &self.periods[t - 1]
    }

    pub fn periods(&self) -> &[Vec<String>] {
        &self.periods
    }

    /// Number of outcomes that can follow `node`.
    pub fn branching(&self, node: &Node) -> usize {
        self.periods[node.depth()].len()
    }

    pub fn is_terminal(&self, node: &Node) -> bool {
        node.depth() == self.horizon()
    }

    pub fn contains(&self, node: &Node) -> bool {
        node.depth() <= self.horizon()
            && node.0.iter().enumerate().all(|(t, &o)| o < self.periods[t].len())
    }

    pub fn children(&self, node: &Node) -> impl Iterator<Item = Node> + '_ {
        let node = node.clone();
        (0..self.branching(&node)).map(move |o| node.child(o))
    }

    /// All nodes of depth `t`, in lexicographic order.
    pub fn nodes_at(&self, t: usize) -> Vec<Node> {
        let mut level = vec![Node::root()];
        for s in 0..t {
            level = level
                .iter()
                .flat_map(|n| (0..self.periods[s].len()).map(move |o| n.child(o)))
                .collect();
        }
        level
    }

    /// Non-terminal nodes ordered by depth, then lexicographically.
    pub fn non_terminal_nodes(&self) -> Vec<Node> {
        (0..self.horizon()).flat_map(|t| self.nodes_at(t)).collect()
    }

    pub fn leaves(&self) -> Vec<Node> {
        self.nodes_at(self.horizon())
    }

    pub fn all_nodes(&self) -> Vec<Node> {
        (0..=self.horizon()).flat_map(|t| self.nodes_at(t)).collect()
    }

    pub fn num_leaves(&self) -> u128 {
        self.periods.iter().map(|p| p.len() as u128).product()
    }

    /// Labels joined by `/`; the root is the empty string.
    pub fn key(&self, node: &Node) -> String {
        node.0
            .iter()
            .enumerate()
            .map(|(t, &o)| self.periods[t][o].as_str())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn parse_key(&self, key: &str) -> Option<Node> {
        if key.is_empty() {
            return Some(Node::root());
        }
        let mut path = Vec::new();
        for (t, label) in key.split('/').enumerate() {
            let outcomes = self.periods.get(t)?;
            path.push(outcomes.iter().position(|l| l == label)?);
        }
        Some(Node(path))
    }
}

/// One-step probability kernel over the next period's outcomes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kernel {
    weights: Vec<Rational>,
}

impl Kernel {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("kernel", "kernel has no outcomes"));
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::validation(
                format!("kernel[{i}]"),
                "negative probability",
            ));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::validation(
                "kernel",
                format!("weights sum to {}, not 1", format_rational(&total)),
            ));
        }
        Ok(Kernel { weights })
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let weights = (0..len)
            .map(|i| if i == at { Rational::one() } else { Rational::zero() })
            .collect();
        Kernel { weights }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, outcome: usize) -> &Rational {
        &self.weights[outcome]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Outcomes carrying positive probability, ascending.
    pub fn charged(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_positive())
            .map(|(i, _)| i)
            .collect()
    }

    /// `Σ λ_i k_i` for nonnegative `λ` summing to one.
    pub fn mix<'a>(parts: impl IntoIterator<Item = (&'a Rational, &'a Kernel)>) -> Self {
        let mut weights: Vec<Rational> = Vec::new();
        for (lambda, kernel) in parts {
            if weights.is_empty() {
                weights = vec![Rational::zero(); kernel.len()];
            }
            for (w, k) in weights.iter_mut().zip(&kernel.weights) {
                *w += lambda * k;
            }
        }
        Kernel { weights }
    }
}

/// Generators of the convex prior set at one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelSet {
    pub node: Node,
    pub generators: Vec<Kernel>,
}

/// Discounted prices `S(ω^t) ∈ ℚ^d` at every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceProcess {
    assets: usize,
    values: BTreeMap<Node, Vec<Rational>>,
}

impl PriceProcess {
    pub fn assets(&self) -> usize {
        self.assets
    }

    pub fn at(&self, node: &Node) -> &[Rational] {
        &self.values[node]
    }

    pub fn values(&self) -> &BTreeMap<Node, Vec<Rational>> {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarketModel {
    lattice: ScenarioLattice,
    prices: PriceProcess,
    /// Generator sets for every non-terminal node, the root included.
    kernel_sets: BTreeMap<Node, KernelSet>,
}

impl MarketModel {
    /// Builds and validates a model. `generators` must hold an entry for
    /// every non-terminal node; the root entry is `Q_1`.
    pub fn new(
        lattice: ScenarioLattice,
        assets: usize,
        prices: BTreeMap<Node, Vec<Rational>>,
        generators: BTreeMap<Node, Vec<Kernel>>,
    ) -> Result<Self> {
        if assets == 0 {
            return Err(Error::validation("assets", "at least one asset is required"));
        }
        for node in lattice.all_nodes() {
            let key = lattice.key(&node);
            match prices.get(&node) {
                None => {
                    return Err(Error::validation(
                        format!("prices[{key:?}]"),
                        "missing price vector",
                    ))
                }
                Some(v) if v.len() != assets => {
                    return Err(Error::validation(
                        format!("prices[{key:?}]"),
                        format!("expected {assets} components, found {}", v.len()),
                    ))
                }
                _ => {}
            }
        }
        if let Some(extra) = prices.keys().find(|n| !lattice.contains(n)) {
            return Err(Error::validation(
                "prices",
                format!("node {:?} is not in the lattice", extra.0),
            ));
        }
        let mut kernel_sets = BTreeMap::new();
        for node in lattice.non_terminal_nodes() {
            let key = lattice.key(&node);
            let path = if node.is_root() {
                "root_generators".to_string()
            } else {
                format!("kernels[{key:?}]")
            };
            let gens = generators
                .get(&node)
                .ok_or_else(|| Error::validation(&path, "missing generator list"))?;
            if gens.is_empty() {
                return Err(Error::validation(&path, "generator list is empty"));
            }
            let width = lattice.branching(&node);
            for (g, kernel) in gens.iter().enumerate() {
                if kernel.len() != width {
                    return Err(Error::validation(
                        format!("{path}[{g}]"),
                        format!("expected {width} weights, found {}", kernel.len()),
                    ));
                }
                Kernel::new(kernel.weights.clone()).map_err(|e| match e {
                    Error::Validation { message, .. } => {
                        Error::validation(format!("{path}[{g}]"), message)
                    }
                    other => other,
                })?;
            }
            kernel_sets.insert(
                node.clone(),
                KernelSet {
                    node,
                    generators: gens.clone(),
                },
            );
        }
        if let Some(extra) = generators
            .keys()
            .find(|n| !lattice.contains(n) || lattice.is_terminal(n))
        {
            return Err(Error::validation(
                "kernels",
                format!("node {:?} is not a non-terminal lattice node", extra.0),
            ));
        }
        Ok(MarketModel {
            lattice,
            prices: PriceProcess {
                assets,
                values: prices,
            },
            kernel_sets,
        })
    }

    pub fn lattice(&self) -> &ScenarioLattice {
        &self.lattice
    }

    pub fn prices(&self) -> &PriceProcess {
        &self.prices
    }

    pub fn horizon(&self) -> usize {
        self.lattice.horizon()
    }

    pub fn assets(&self) -> usize {
        self.prices.assets
    }

    pub fn key(&self, node: &Node) -> String {
        self.lattice.key(node)
    }

    pub fn generators(&self, node: &Node) -> &[Kernel] {
        &self.kernel_sets[node].generators
    }

    pub fn root_generators(&self) -> &[Kernel] {
        self.generators(&Node::root())
    }

    pub fn kernel_sets(&self) -> &BTreeMap<Node, KernelSet> {
        &self.kernel_sets
    }

    /// Generator lists keyed by node, the root included.
    pub fn generator_map(&self) -> BTreeMap<Node, Vec<Kernel>> {
        self.kernel_sets
            .iter()
            .map(|(n, ks)| (n.clone(), ks.generators.clone()))
            .collect()
    }

    /// `ΔS_{t+1}(ω^t, ω_{t+1})`.
    pub fn increment(&self, node: &Node, outcome: usize) -> Vec<Rational> {
        let now = self.prices.at(node);
        let next = self.prices.at(&node.child(outcome));
        next.iter().zip(now).map(|(a, b)| a - b).collect()
    }

    /// Same lattice and prices, new generators.
    pub fn with_generators(&self, generators: BTreeMap<Node, Vec<Kernel>>) -> Result<Self> {
        MarketModel::new(
            self.lattice.clone(),
            self.assets(),
            self.prices.values.clone(),
            generators,
        )
    }

    /// Same lattice and generators, new prices.
    pub fn with_prices(&self, prices: BTreeMap<Node, Vec<Rational>>) -> Result<Self> {
        MarketModel::new(
            self.lattice.clone(),
            self.assets(),
            prices,
            self.generator_map(),
        )
    }
}

/// Discounted payoff `H(ω^T)` at every leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    payoff: BTreeMap<Node, Rational>,
}

impl Claim {
    pub fn new(lattice: &ScenarioLattice, payoff: BTreeMap<Node, Rational>) -> Result<Self> {
        for leaf in lattice.leaves() {
            if !payoff.contains_key(&leaf) {
                return Err(Error::validation(
                    format!("claim[{:?}]", lattice.key(&leaf)),
                    "missing payoff",
                ));
            }
        }
        if let Some(extra) = payoff.keys().find(|n| !lattice.contains(n) || !lattice.is_terminal(n)) {
            return Err(Error::validation(
                "claim",
                format!("node {:?} is not a leaf", extra.0),
            ));
        }
        Ok(Claim { payoff })
    }

    pub fn from_fn(model: &MarketModel, f: impl Fn(&Node, &[Rational]) -> Rational) -> Self {
        let payoff = model
            .lattice()
            .leaves()
            .into_iter()
            .map(|leaf| {
                let v = f(&leaf, model.prices().at(&leaf));
                (leaf, v)
            })
            .collect();
        Claim { payoff }
    }

    pub fn value(&self, leaf: &Node) -> &Rational {
        &self.payoff[leaf]
    }

    pub fn payoff(&self) -> &BTreeMap<Node, Rational> {
        &self.payoff
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Claim {
        Claim {
            payoff: self.payoff.iter().map(|(n, v)| (n.clone(), f(v))).collect(),
        }
    }

    pub fn combine(&self, other: &Claim, f: impl Fn(&Rational, &Rational) -> Rational) -> Claim {
        Claim {
            payoff: self
                .payoff
                .iter()
                .map(|(n, v)| (n.clone(), f(v, &other.payoff[n])))
                .collect(),
        }
    }
}

/// Product prior `P_1 ⊗ p_2 ⊗ ⋯ ⊗ p_T` given by mixture weights over the
/// generators of every non-terminal node (root included).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductPrior {
    pub mixtures: BTreeMap<Node, Vec<Rational>>,
}

impl ProductPrior {
    pub fn root_mixture(&self) -> &[Rational] {
        &self.mixtures[&Node::root()]
    }

    /// Weight 1 on generator `choice(node)` everywhere.
    pub fn pure(model: &MarketModel, choice: impl Fn(&Node) -> usize) -> Self {
        let mixtures = model
            .kernel_sets()
            .iter()
            .map(|(node, ks)| {
                let g = choice(node);
                let mut w = vec![Rational::zero(); ks.generators.len()];
                w[g] = Rational::one();
                (node.clone(), w)
            })
            .collect();
        ProductPrior { mixtures }
    }

    /// Equal weights on all generators at every node.
    pub fn uniform(model: &MarketModel) -> Self {
        Self::uniform_on(model, |node| (0..model.generators(node).len()).collect())
    }

    /// Equal weights on the generator subset `subset(node)` at every node.
    pub fn uniform_on(model: &MarketModel, subset: impl Fn(&Node) -> Vec<usize>) -> Self {
        let mixtures = model
            .kernel_sets()
            .iter()
            .map(|(node, ks)| {
                let chosen = subset(node);
                let share = Rational::new(1.into(), (chosen.len() as i64).into());
                let mut w = vec![Rational::zero(); ks.generators.len()];
                for g in chosen {
                    w[g] = share.clone();
                }
                (node.clone(), w)
            })
            .collect();
        ProductPrior { mixtures }
    }

    pub fn validate(&self, model: &MarketModel) -> Result<()> {
        for (node, ks) in model.kernel_sets() {
            let key = model.key(node);
            let w = self.mixtures.get(node).ok_or_else(|| {
                Error::ShapeMismatch(format!("prior has no mixture at node {key:?}"))
            })?;
            if w.len() != ks.generators.len() {
                return Err(Error::ShapeMismatch(format!(
                    "node {key:?}: {} weights for {} generators",
                    w.len(),
                    ks.generators.len()
                )));
            }
            if w.iter().any(|x| x.is_negative()) || !w.iter().sum::<Rational>().is_one() {
                return Err(Error::ShapeMismatch(format!(
                    "node {key:?}: mixture weights must be nonnegative and sum to 1"
                )));
            }
        }
        if self.mixtures.len() != model.kernel_sets().len() {
            return Err(Error::ShapeMismatch(
                "prior has mixtures at nodes outside the model".into(),
            ));
        }
        Ok(())
    }

    /// Induced kernels `p_{t+1}(·, ω^t)`.
    pub fn disintegration(&self, model: &MarketModel) -> Result<Disintegration> {
        self.validate(model)?;
        let kernels = model
            .kernel_sets()
            .iter()
            .map(|(node, ks)| {
                let k = Kernel::mix(self.mixtures[node].iter().zip(&ks.generators));
                (node.clone(), k)
            })
            .collect();
        Ok(Disintegration { kernels })
    }

    /// Nodewise `Σ_i w_i P_i`, mixing the generator weights of each prior.
    pub fn mix(parts: &[(Rational, &ProductPrior)]) -> ProductPrior {
        let mut mixtures: BTreeMap<Node, Vec<Rational>> = BTreeMap::new();
        for (lambda, prior) in parts {
            for (node, w) in &prior.mixtures {
                let acc = mixtures
                    .entry(node.clone())
                    .or_insert_with(|| vec![Rational::zero(); w.len()]);
                for (a, x) in acc.iter_mut().zip(w) {
                    *a += lambda * x;
                }
            }
        }
        ProductPrior { mixtures }
    }
}

/// A measure on paths given directly by its one-step kernels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disintegration {
    pub kernels: BTreeMap<Node, Kernel>,
}

impl Disintegration {
    pub fn kernel(&self, node: &Node) -> &Kernel {
        &self.kernels[node]
    }

    /// Leaf weights: products of kernel weights along each path.
    pub fn leaf_measure(&self, lattice: &ScenarioLattice) -> BTreeMap<Node, Rational> {
        lattice
            .leaves()
            .into_iter()
            .map(|leaf| {
                let mut mass = Rational::one();
                for t in 0..leaf.depth() {
                    mass *= self.kernels[&leaf.prefix(t)].weight(leaf.0[t]);
                    if mass.is_zero() {
                        break;
                    }
                }
                (leaf, mass)
            })
            .collect()
    }

    /// Validates shape and kernel widths against `model`.
    pub fn validate(&self, model: &MarketModel) -> Result<()> {
        for node in model.lattice().non_terminal_nodes() {
            let k = self.kernels.get(&node).ok_or_else(|| {
                Error::ShapeMismatch(format!("no kernel at node {:?}", model.key(&node)))
            })?;
            if k.len() != model.lattice().branching(&node) {
                return Err(Error::ShapeMismatch(format!(
                    "kernel width mismatch at node {:?}",
                    model.key(&node)
                )));
            }
        }
        Ok(())
    }
}

/// Leaf weights of `P_1 ⊗ p_2 ⊗ ⋯ ⊗ p_T`.
pub fn prior_measure(model: &MarketModel, prior: &ProductPrior) -> Result<BTreeMap<Node, Rational>> {
    Ok(prior.disintegration(model)?.leaf_measure(model.lattice()))
}

/// Number of pure (vertex) selections.
pub fn pure_selection_count(model: &MarketModel) -> u128 {
    model
        .kernel_sets()
        .values()
        .map(|ks| ks.generators.len() as u128)
        .product()
}

/// Every prior picking exactly one generator at every node.
pub fn pure_selections(model: &MarketModel, cap: u64) -> Result<Vec<ProductPrior>> {
    let count = pure_selection_count(model);
    if count > cap as u128 {
        return Err(Error::ExplosionGuard {
            what: "pure selections",
            count,
            cap,
        });
    }
    let nodes: Vec<&Node> = model.kernel_sets().keys().collect();
    let sizes: Vec<usize> = nodes.iter().map(|n| model.generators(n).len()).collect();
    let mut digits = vec![0usize; nodes.len()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let choice: BTreeMap<&Node, usize> =
            nodes.iter().copied().zip(digits.iter().copied()).collect();
        out.push(ProductPrior::pure(model, |n| choice[n]));
        // odometer, last node varies fastest
        let mut i = nodes.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < sizes[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Self-financing strategy `φ_{t+1}(ω^t)` with initial capital.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HedgingStrategy {
    pub initial_capital: Rational,
    pub positions: BTreeMap<Node, Vec<Rational>>,
}

impl HedgingStrategy {
    /// `x + Σ_s φ_s(ω^{s-1})·ΔS_s(ω^s)`; `None` if a position on the path is missing.
    pub fn terminal_wealth(&self, model: &MarketModel, leaf: &Node) -> Option<Rational> {
        let mut wealth = self.initial_capital.clone();
        for t in 0..leaf.depth() {
            let node = leaf.prefix(t);
            let h = self.positions.get(&node)?;
            wealth += dot(h, &model.increment(&node, leaf.0[t]));
        }
        Some(wealth)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_d};
    use crate::rational::{int, ratio};

    #[test]
    fn keys_round_trip() {
        let (m, _) = fix_d(0);
        for node in m.lattice().all_nodes() {
            let key = m.key(&node);
            assert_eq!(m.lattice().parse_key(&key), Some(node));
        }
        assert_eq!(m.key(&Node::root()), "");
        assert_eq!(m.lattice().parse_key("nope"), None);
    }

    #[test]
    fn fix_a_measure() {
        let (m, _) = fix_a();
        let prior = ProductPrior::pure(&m, |_| 0);
        let mu = prior_measure(&m, &prior).unwrap();
        assert_eq!(mu.values().cloned().collect::<Vec<_>>(), vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn fix_b_first_generator_measure() {
        let (m, _) = fix_b(2).unwrap();
        let prior = ProductPrior {
            mixtures: [(Node::root(), vec![int(1), int(0)])].into(),
        };
        let mu = prior_measure(&m, &prior).unwrap();
        // outcome order: -1, 2, 3/2
        let by_price: BTreeMap<Rational, Rational> = mu
            .iter()
            .map(|(leaf, w)| (m.prices().at(leaf)[0].clone(), w.clone()))
            .collect();
        assert_eq!(by_price[&int(-1)], ratio(1, 2));
        assert_eq!(by_price[&int(2)], ratio(1, 2));
        assert_eq!(by_price[&ratio(3, 2)], int(0));
    }

    #[test]
    fn shape_mismatch() {
        let (m, _) = fix_b(2).unwrap();
        let prior = ProductPrior {
            mixtures: [(Node::root(), vec![int(1)])].into(),
        };
        assert!(matches!(prior_measure(&m, &prior), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn pure_selection_counts() {
        let (a, _) = fix_a();
        assert_eq!(pure_selections(&a, DEFAULT_CAP).unwrap().len(), 1);
        let (b, _) = fix_b(2).unwrap();
        assert_eq!(pure_selections(&b, DEFAULT_CAP).unwrap().len(), 2);
        let (d, _) = fix_d(0);
        let expected = pure_selection_count(&d);
        assert_eq!(expected, 2 * 2 * 2);
        let all = pure_selections(&d, DEFAULT_CAP).unwrap();
        assert_eq!(all.len() as u128, expected);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
        assert!(matches!(
            pure_selections(&d, 7),
            Err(Error::ExplosionGuard { count: 8, .. })
        ));
    }

    #[test]
    fn kernel_rejects_bad_weights() {
        assert!(Kernel::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(Kernel::new(vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(Kernel::new(vec![ratio(1, 2), ratio(1, 2)]).is_ok());
    }
}
