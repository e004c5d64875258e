//! Conditional supports of the next price increment and reachable trees.
//!
//! On a finite lattice the support of `ΔS_{t+1}(ω^t, ·)` under a kernel is
//! the finite set of increment values of charged outcomes; finite sets are
//! their own closure. Several outcomes can share one increment value, so
//! each support keeps an outcome → point index next to the point list.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::model::{Disintegration, Kernel, MarketModel, Node, ProductPrior};
use crate::rational::Point;

/// Nodes charged with positive mass by at least one prior of a family.
///
/// Stores, for every reachable non-terminal node, the charged next outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachableTree {
    charged: BTreeMap<Node, Vec<usize>>,
    horizon: usize,
}

impl ReachableTree {
    /// Grows the tree from the root; `charge(node)` lists charged outcomes.
    pub fn build(model: &MarketModel, charge: impl Fn(&Node) -> Vec<usize>) -> Self {
        let horizon = model.horizon();
        let mut charged = BTreeMap::new();
        let mut frontier = vec![Node::root()];
        while let Some(node) = frontier.pop() {
            let outs = charge(&node);
            if node.depth() + 1 < horizon {
                frontier.extend(outs.iter().map(|&o| node.child(o)));
            }
            charged.insert(node, outs);
        }
        ReachableTree { charged, horizon }
    }

    /// Reachable non-terminal nodes, ordered by depth then lexicographically.
    pub fn non_terminal(&self) -> Vec<&Node> {
        let mut v: Vec<&Node> = self.charged.keys().collect();
        v.sort_by(|a, b| a.depth().cmp(&b.depth()).then(a.cmp(b)));
        v
    }

    pub fn charged(&self, node: &Node) -> &[usize] {
        &self.charged[node]
    }

    pub fn charged_map(&self) -> &BTreeMap<Node, Vec<usize>> {
        &self.charged
    }

    pub fn contains(&self, node: &Node) -> bool {
        if self.charged.contains_key(node) {
            return true;
        }
        match (node.parent(), node.last()) {
            (Some(p), Some(o)) if node.depth() == self.horizon => {
                self.charged.get(&p).is_some_and(|c| c.contains(&o))
            }
            _ => false,
        }
    }

    pub fn leaves(&self) -> Vec<Node> {
        let mut out: Vec<Node> = self
            .charged
            .iter()
            .filter(|(n, _)| n.depth() + 1 == self.horizon)
            .flat_map(|(n, outs)| outs.iter().map(move |&o| n.child(o)))
            .collect();
        out.sort();
        out
    }

    pub fn nodes(&self) -> BTreeSet<Node> {
        let mut set: BTreeSet<Node> = self.charged.keys().cloned().collect();
        set.extend(self.leaves());
        set
    }

    /// Node-by-node union of charged outcomes; the result is prefix-closed.
    pub fn union(model: &MarketModel, trees: &[ReachableTree]) -> Self {
        ReachableTree::build(model, |node| {
            let set: BTreeSet<usize> = trees
                .iter()
                .filter_map(|t| t.charged.get(node))
                .flatten()
                .copied()
                .collect();
            set.into_iter().collect()
        })
    }
}

/// Outcomes charged by at least one generator at `node`.
pub fn qs_charged(model: &MarketModel, node: &Node) -> Vec<usize> {
    let set: BTreeSet<usize> = model
        .generators(node)
        .iter()
        .flat_map(|k| k.charged())
        .collect();
    set.into_iter().collect()
}

/// The quasi-sure reachable tree: the complement of the family's polar nodes.
pub fn reachable(model: &MarketModel) -> ReachableTree {
    ReachableTree::build(model, |n| qs_charged(model, n))
}

/// Positive-probability tree of a single prior.
pub fn prior_tree(model: &MarketModel, measure: &Disintegration) -> ReachableTree {
    ReachableTree::build(model, |n| measure.kernel(n).charged())
}

/// Increment values of the charged outcomes of one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pub node: Node,
    /// Distinct points, sorted lexicographically.
    pub points: Vec<Point>,
    /// `(outcome, index into points)` for every charged outcome.
    pub outcome_point: Vec<(usize, usize)>,
}

impl SupportSet {
    pub fn from_outcomes(model: &MarketModel, node: &Node, outcomes: &[usize]) -> Self {
        let incs: Vec<(usize, Point)> = outcomes
            .iter()
            .map(|&o| (o, model.increment(node, o)))
            .collect();
        let points: Vec<Point> = incs
            .iter()
            .map(|(_, p)| p.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let outcome_point = incs
            .iter()
            .map(|(o, p)| (*o, points.binary_search(p).expect("point present")))
            .collect();
        SupportSet {
            node: node.clone(),
            points,
            outcome_point,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, point: &[crate::rational::Rational]) -> bool {
        self.points.binary_search_by(|p| p.as_slice().cmp(point)).is_ok()
    }

    pub fn point_set(&self) -> BTreeSet<Point> {
        self.points.iter().cloned().collect()
    }
}

/// Smallest set carrying `ΔS_{t+1}(ω^t, ·)` under every kernel of `Q_{t+1}(ω^t)`.
pub fn support_qs(model: &MarketModel, node: &Node) -> SupportSet {
    SupportSet::from_outcomes(model, node, &qs_charged(model, node))
}

pub fn support_kernel(model: &MarketModel, node: &Node, kernel: &Kernel) -> SupportSet {
    SupportSet::from_outcomes(model, node, &kernel.charged())
}

/// Support of the increment under the prior's mixed kernel at `node`.
pub fn support_prior(model: &MarketModel, prior: &ProductPrior, node: &Node) -> Result<SupportSet> {
    let measure = prior.disintegration(model)?;
    Ok(support_kernel(model, node, measure.kernel(node)))
}

/// Either the quasi-sure family `Q` or an explicit list of priors.
#[derive(Debug, Clone)]
pub enum SupportFamily {
    QuasiSure,
    Priors(Vec<Disintegration>),
}

impl SupportFamily {
    pub fn from_priors(model: &MarketModel, priors: &[ProductPrior]) -> Result<Self> {
        Ok(SupportFamily::Priors(
            priors
                .iter()
                .map(|p| p.disintegration(model))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn tree(&self, model: &MarketModel) -> ReachableTree {
        match self {
            SupportFamily::QuasiSure => reachable(model),
            SupportFamily::Priors(ps) => {
                let trees: Vec<ReachableTree> = ps.iter().map(|p| prior_tree(model, p)).collect();
                ReachableTree::union(model, &trees)
            }
        }
    }

    /// Union of supports at `node` over the family.
    pub fn support(&self, model: &MarketModel, node: &Node) -> SupportSet {
        match self {
            SupportFamily::QuasiSure => support_qs(model, node),
            SupportFamily::Priors(ps) => {
                let outs: BTreeSet<usize> = ps.iter().flat_map(|p| p.kernel(node).charged()).collect();
                SupportSet::from_outcomes(model, node, &outs.into_iter().collect::<Vec<_>>())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportsMatch {
    pub matches: bool,
    pub first_difference: Option<Node>,
}

/// Compares (unions of) supports at every non-terminal node reachable under both families.
pub fn supports_match(model: &MarketModel, a: &SupportFamily, b: &SupportFamily) -> SupportsMatch {
    let ta = a.tree(model);
    let tb = b.tree(model);
    for node in ta.non_terminal() {
        if !tb.contains(node) {
            continue;
        }
        if a.support(model, node).points != b.support(model, node).points {
            return SupportsMatch {
                matches: false,
                first_difference: Some(node.clone()),
            };
        }
    }
    SupportsMatch {
        matches: true,
        first_difference: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_c, fix_d};
    use crate::model::{pure_selections, Kernel, DEFAULT_CAP};
    use crate::rational::{int, ratio, Rational};
    use num_traits::{Signed, Zero};

    fn pts(v: &[Rational]) -> Vec<Point> {
        let mut p: Vec<Point> = v.iter().map(|x| vec![x.clone()]).collect();
        p.sort();
        p
    }

    #[test]
    fn qs_supports_of_fixtures() {
        let (a, _) = fix_a();
        assert_eq!(support_qs(&a, &Node::root()).points, pts(&[int(1), int(-1)]));
        let (b, _) = fix_b(5).unwrap();
        let mut expected = vec![int(-1)];
        expected.extend((1..=5).map(|n| ratio(n + 1, n)));
        assert_eq!(support_qs(&b, &Node::root()).points, pts(&expected));
        assert!(!support_qs(&b, &Node::root()).contains(&[int(1)]));
        let (c, _) = fix_c();
        assert_eq!(support_qs(&c, &Node::root()).points, pts(&[int(0), int(1)]));
    }

    #[test]
    fn prior_supports_fix_b() {
        let (b, _) = fix_b(2).unwrap();
        let p1 = ProductPrior::pure(&b, |_| 0);
        assert_eq!(
            support_prior(&b, &p1, &Node::root()).unwrap().points,
            pts(&[int(-1), int(2)])
        );
        let mix = ProductPrior::uniform(&b);
        assert_eq!(
            support_prior(&b, &mix, &Node::root()).unwrap().points,
            pts(&[int(-1), ratio(3, 2), int(2)])
        );
    }

    #[test]
    fn point_mass_gives_singleton() {
        let (d, _) = fix_d(1);
        let node = Node::root();
        let k = Kernel::point_mass(2, 1);
        assert_eq!(support_kernel(&d, &node, &k).len(), 1);
    }

    #[test]
    fn reachable_trees() {
        let (a, _) = fix_a();
        assert_eq!(reachable(&a).nodes().len(), 3);
        let (b, _) = fix_b(2).unwrap();
        assert_eq!(reachable(&b).nodes().len(), 4);

        // append an outcome charged by no generator
        let mut periods = b.lattice().periods().to_vec();
        periods[0].push("ghost".into());
        let lattice = crate::model::ScenarioLattice::new(periods).unwrap();
        let mut prices = b.prices().values().clone();
        prices.insert(Node(vec![3]), vec![int(7)]);
        let gens = b
            .root_generators()
            .iter()
            .map(|k| {
                let mut w = k.weights().to_vec();
                w.push(Rational::zero());
                Kernel::new(w).unwrap()
            })
            .collect();
        let m = MarketModel::new(lattice, 1, prices, [(Node::root(), gens)].into()).unwrap();
        let tree = reachable(&m);
        assert!(!tree.contains(&Node(vec![3])));
        assert_eq!(tree.leaves().len(), 3);
    }

    #[test]
    fn supports_match_examples() {
        let (b, _) = fix_b(2).unwrap();
        let full = SupportFamily::from_priors(&b, &[ProductPrior::uniform(&b)]).unwrap();
        assert!(supports_match(&b, &full, &SupportFamily::QuasiSure).matches);
        let p1 = SupportFamily::from_priors(&b, &[ProductPrior::pure(&b, |_| 0)]).unwrap();
        let r = supports_match(&b, &p1, &SupportFamily::QuasiSure);
        assert!(!r.matches);
        assert_eq!(r.first_difference, Some(Node::root()));
        assert!(supports_match(&b, &p1, &p1).matches);
    }

    #[test]
    fn qs_support_is_union_over_pure_generators() {
        let (d, _) = fix_d(2);
        for node in d.lattice().non_terminal_nodes() {
            let union: BTreeSet<Point> = (0..d.generators(&node).len())
                .flat_map(|g| {
                    let prior = ProductPrior::pure(&d, |n| if *n == node { g } else { 0 });
                    support_prior(&d, &prior, &node).unwrap().points
                })
                .collect();
            assert_eq!(union, support_qs(&d, &node).point_set());
        }
        // membership: y ∈ D iff some generator charges {ΔS = y}
        for node in d.lattice().non_terminal_nodes() {
            let supp = support_qs(&d, &node);
            for o in 0..d.lattice().branching(&node) {
                let y = d.increment(&node, o);
                let charged = d.generators(&node).iter().any(|k| {
                    (0..k.len())
                        .filter(|&j| d.increment(&node, j) == y)
                        .any(|j| k.weight(j).is_positive())
                });
                assert_eq!(supp.contains(&y), charged);
            }
        }
        let _ = pure_selections(&d, DEFAULT_CAP).unwrap();
    }
}
