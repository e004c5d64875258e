//! Martingale measures on the reachable tree and the dual price.
//!
//! Martingale constraints are written on leaf weights in aggregated form:
//! for every node `ν` and asset `i`,
//! `Σ_{l ⊒ ν} w_l · (S^i(l|ν+1) − S^i(ν)) = 0`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arbitrage::{global_na_qs, na_measure};
use crate::error::{Error, Result};
use crate::lp::{solve, strictly_feasible_point, Constraint, LinearProgram, LpOutcome, Relation};
use crate::model::{Claim, Disintegration, MarketModel, Node};
use crate::rational::{int, Rational};
use crate::supports::{prior_tree, reachable, ReachableTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingaleMeasure {
    pub leaf_weights: BTreeMap<Node, Rational>,
}

impl MartingaleMeasure {
    pub fn expectation(&self, claim: &Claim) -> Rational {
        self.leaf_weights
            .iter()
            .map(|(l, w)| w * claim.value(l))
            .sum()
    }

    pub fn weight(&self, leaf: &Node) -> Rational {
        self.leaf_weights.get(leaf).cloned().unwrap_or_else(Rational::zero)
    }

    /// Every leaf of `tree` carries positive weight.
    pub fn has_full_support(&self, tree: &ReachableTree) -> bool {
        tree.leaves().iter().all(|l| self.weight(l).is_positive())
    }

    /// Re-verifies nonnegativity, total mass, support inside `tree` and the
    /// martingale equalities at every node of `tree`.
    pub fn check(&self, model: &MarketModel, tree: &ReachableTree) -> std::result::Result<(), String> {
        if self.leaf_weights.values().any(|w| w.is_negative()) {
            return Err("negative leaf weight".into());
        }
        if !self.leaf_weights.values().sum::<Rational>().is_one() {
            return Err("weights do not sum to 1".into());
        }
        if let Some((l, _)) = self
            .leaf_weights
            .iter()
            .find(|(l, w)| !w.is_zero() && !tree.contains(l))
        {
            return Err(format!("mass outside the tree at {:?}", model.key(l)));
        }
        for node in tree.non_terminal() {
            for i in 0..model.assets() {
                let s0 = &model.prices().at(node)[i];
                let net: Rational = self
                    .leaf_weights
                    .iter()
                    .filter(|(l, _)| l.extends(node))
                    .map(|(l, w)| w * (&model.prices().at(&l.prefix(node.depth() + 1))[i] - s0))
                    .sum();
                if !net.is_zero() {
                    return Err(format!("martingale row fails at {:?}, asset {i}", model.key(node)));
                }
            }
        }
        Ok(())
    }
}

/// Rows `Σ w = 1` followed by one aggregated martingale row per node and asset.
pub fn martingale_rows(model: &MarketModel, tree: &ReachableTree, leaves: &[Node]) -> Vec<Constraint> {
    let mut rows = vec![Constraint::new(vec![int(1); leaves.len()], Relation::Eq, int(1))];
    for node in tree.non_terminal() {
        for i in 0..model.assets() {
            let s0 = &model.prices().at(node)[i];
            let coeffs = leaves
                .iter()
                .map(|l| {
                    if l.extends(node) {
                        &model.prices().at(&l.prefix(node.depth() + 1))[i] - s0
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            rows.push(Constraint::new(coeffs, Relation::Eq, Rational::zero()));
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub value: Rational,
    pub measure: MartingaleMeasure,
}

/// `max E_M[H]` over martingale measures supported on `tree`.
pub fn dual_sup_on_tree(model: &MarketModel, tree: &ReachableTree, claim: &Claim) -> Result<DualSolution> {
    let leaves = tree.leaves();
    let mut lp = LinearProgram::maximize(leaves.iter().map(|l| claim.value(l).clone()).collect());
    for j in 0..leaves.len() {
        lp.nonneg(j);
    }
    lp.constraints = martingale_rows(model, tree, &leaves);
    match solve(&lp)? {
        LpOutcome::Optimal(sol) => Ok(DualSolution {
            value: sol.value,
            measure: MartingaleMeasure {
                leaf_weights: leaves.into_iter().zip(sol.primal).collect(),
            },
        }),
        LpOutcome::Infeasible => Err(Error::InfeasiblePolytope),
        LpOutcome::Unbounded { .. } => unreachable!("the probability simplex is bounded"),
    }
}

/// Dual price over martingale measures absolutely continuous w.r.t. some member of the family.
pub fn dual_sup(model: &MarketModel, claim: &Claim) -> Result<DualSolution> {
    global_na_qs(model)?.into_result(model)?;
    dual_sup_on_tree(model, &reachable(model), claim)
}

/// Dual price over martingale measures absolutely continuous w.r.t. one prior.
pub fn dual_sup_measure(model: &MarketModel, measure: &Disintegration, claim: &Claim) -> Result<DualSolution> {
    na_measure(model, measure)?.into_result(model)?;
    dual_sup_on_tree(model, &prior_tree(model, measure), claim)
}

/// A martingale measure charging every leaf of `tree`.
pub fn full_support_martingale_on_tree(model: &MarketModel, tree: &ReachableTree) -> Result<MartingaleMeasure> {
    // a strictly positive martingale kernel at each node, multiplied out
    let mut leaf_weights = BTreeMap::from([(Node::root(), Rational::one())]);
    for _ in 0..model.horizon() {
        let mut next = BTreeMap::new();
        for (node, mass) in leaf_weights {
            let charged = tree.charged(&node);
            let k = charged.len();
            let mut rows = vec![Constraint::new(vec![int(1); k], Relation::Eq, int(1))];
            for i in 0..model.assets() {
                let coeffs = charged.iter().map(|&o| model.increment(&node, o)[i].clone()).collect();
                rows.push(Constraint::new(coeffs, Relation::Eq, Rational::zero()));
            }
            for j in 0..k {
                let mut e = vec![Rational::zero(); k];
                e[j] = int(1);
                rows.push(Constraint::new(e, Relation::Ge, Rational::zero()));
            }
            let strict: Vec<usize> = (1 + model.assets()..rows.len()).collect();
            let w = strictly_feasible_point(k, &rows, &strict)?.ok_or(Error::NoPoint)?;
            for (&o, w) in charged.iter().zip(w) {
                next.insert(node.child(o), &mass * w);
            }
        }
        leaf_weights = next;
    }
    Ok(MartingaleMeasure { leaf_weights })
}

pub fn full_support_martingale(model: &MarketModel) -> Result<MartingaleMeasure> {
    full_support_martingale_on_tree(model, &reachable(model))
}

/// `M_n = (1 − 1/n)·M + (1/n)·M̂`.
pub fn perturb(m: &MartingaleMeasure, m_hat: &MartingaleMeasure, n: u64) -> MartingaleMeasure {
    assert!(n >= 1, "perturbation index starts at 1");
    let inv = Rational::new(1.into(), n.into());
    let keep = Rational::one() - &inv;
    let mut leaf_weights: BTreeMap<Node, Rational> =
        m.leaf_weights.iter().map(|(l, w)| (l.clone(), &keep * w)).collect();
    for (l, w) in &m_hat.leaf_weights {
        *leaf_weights.entry(l.clone()).or_insert_with(Rational::zero) += &inv * w;
    }
    MartingaleMeasure { leaf_weights }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u64,
    #[serde(with = "crate::rational::serde_rational")]
    pub expectation: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub gap: Rational,
    /// Gap equals `c/n`, is nonnegative, and `M_n` is a full-support martingale measure.
    pub law_holds: bool,
}

/// Certificate that the supremum over equivalent martingale measures equals the dual value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapEvidence {
    #[serde(with = "crate::rational::serde_rational")]
    pub value: Rational,
    /// `c = E_M[H] − E_M̂[H]`.
    #[serde(with = "crate::rational::serde_rational")]
    pub constant: Rational,
    pub rows: Vec<GapRow>,
    pub holds: bool,
}

pub fn dual_sup_equivalent(model: &MarketModel, claim: &Claim, ns: &[u64]) -> Result<GapEvidence> {
    let dual = dual_sup(model, claim)?;
    let tree = reachable(model);
    let m_hat = full_support_martingale_on_tree(model, &tree)?;
    Ok(gap_evidence(model, &tree, claim, &dual, &m_hat, ns))
}

pub fn gap_evidence(
    model: &MarketModel,
    tree: &ReachableTree,
    claim: &Claim,
    dual: &DualSolution,
    m_hat: &MartingaleMeasure,
    ns: &[u64],
) -> GapEvidence {
    let constant = dual.measure.expectation(claim) - m_hat.expectation(claim);
    let rows: Vec<GapRow> = ns
        .iter()
        .map(|&n| {
            let m_n = perturb(&dual.measure, m_hat, n);
            let expectation = m_n.expectation(claim);
            let gap = &dual.value - &expectation;
            let law_holds = gap == &constant / Rational::from_integer(n.into())
                && !gap.is_negative()
                && m_n.has_full_support(tree)
                && m_n.check(model, tree).is_ok();
            GapRow {
                n,
                expectation,
                gap,
                law_holds,
            }
        })
        .collect();
    let holds = rows.iter().all(|r| r.law_holds) && m_hat.has_full_support(tree);
    GapEvidence {
        value: dual.value.clone(),
        constant,
        rows,
        holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_c, fix_d};
    use crate::model::ProductPrior;
    use crate::pricing::{price_mono, price_quasi_sure};
    use crate::rational::ratio;

    #[test]
    fn fix_a_unique_measure() {
        let (a, h) = fix_a();
        let d = dual_sup(&a, &h).unwrap();
        assert_eq!(d.value, ratio(1, 2));
        assert!(d.measure.leaf_weights.values().all(|w| *w == ratio(1, 2)));
        let m = full_support_martingale(&a).unwrap();
        assert_eq!(m, d.measure);
        let ev = dual_sup_equivalent(&a, &h, &[1, 10, 100]).unwrap();
        assert!(ev.holds);
        assert!(ev.rows.iter().all(|r| r.gap.is_zero()));
    }

    #[test]
    fn fix_b_dual() {
        let (b, h) = fix_b(2).unwrap();
        let d = dual_sup(&b, &h).unwrap();
        assert_eq!(d.value, ratio(2, 5));
        let lat = b.lattice();
        let w = |label: &str| d.measure.weight(&lat.parse_key(label).unwrap());
        assert_eq!(w("down"), ratio(3, 5));
        assert_eq!(w("n2"), ratio(2, 5));
        assert_eq!(w("n1"), Rational::zero());
        let m = full_support_martingale(&b).unwrap();
        assert!(m.has_full_support(&reachable(&b)));
        assert!(m.check(&b, &reachable(&b)).is_ok());
        let ev = dual_sup_equivalent(&b, &h, &[1, 10, 100]).unwrap();
        assert!(ev.holds);
        assert_eq!(ev.constant, ratio(2, 5) - m.expectation(&h));
        let m10 = perturb(&d.measure, &m, 10);
        assert_eq!(m10.expectation(&h), ratio(9, 10) * ratio(2, 5) + ratio(1, 10) * m.expectation(&h));
    }

    #[test]
    fn arbitrage_market() {
        let (c, h) = fix_c();
        assert!(matches!(dual_sup(&c, &h), Err(Error::NoArbitrageViolation { .. })));
        assert!(matches!(full_support_martingale(&c), Err(Error::NoPoint)));
    }

    #[test]
    fn perturb_edges() {
        let (b, h) = fix_b(3).unwrap();
        let d = dual_sup(&b, &h).unwrap();
        let m = full_support_martingale(&b).unwrap();
        assert_eq!(perturb(&d.measure, &m, 1).leaf_weights, m.leaf_weights);
        assert_eq!(perturb(&m, &m, 7), m);
    }

    #[test]
    fn zero_gap_and_mono_duality() {
        for seed in 0..6 {
            let (d, h) = fix_d(seed);
            let dual = dual_sup(&d, &h).unwrap();
            assert_eq!(dual.value, price_quasi_sure(&d, &h).unwrap().price);
            assert!(dual.measure.check(&d, &reachable(&d)).is_ok());
            let p = ProductPrior::uniform(&d);
            let dis = p.disintegration(&d).unwrap();
            assert_eq!(
                dual_sup_measure(&d, &dis, &h).unwrap().value,
                price_mono(&d, &p, &h).unwrap().price
            );
        }
    }
}
