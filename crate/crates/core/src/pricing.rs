//! Super-replication prices by backward recursion on a reachable tree.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arbitrage::{global_na_qs, local_na, na_measure, pattern_support, sna_family, PatternFamily};
use crate::error::{Error, Result};
use crate::lp::{solve, LinearProgram, LpOutcome, Relation};
use crate::model::{Claim, Disintegration, HedgingStrategy, MarketModel, Node, ProductPrior};
use crate::rational::{format_point, Point, Rational};
use crate::supports::{prior_tree, reachable, ReachableTree, SupportSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceSemantics {
    QuasiSure,
    MonoPrior,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceReport {
    pub price: Rational,
    pub strategy: HedgingStrategy,
    /// Super-hedging values at every node of the tree, leaves included.
    pub node_values: BTreeMap<Node, Rational>,
    pub semantics: PriceSemantics,
}

/// `min x` over `(x, h)` with `x + h·y_j ≥ v_j` for every point `y_j`.
///
/// Fails with [`Error::UnboundedBelow`] when some direction gains at every
/// point. Arbitrages with a zero-gain point leave the LP bounded, so callers
/// check local NA first.
pub fn one_step_superhedge(points: &[Point], values: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
    let d = points.first().map_or(0, |p| p.len());
    let mut objective = vec![Rational::zero(); d + 1];
    objective[0] = Rational::from_integer(1.into());
    let mut lp = LinearProgram::minimize(objective);
    for (y, v) in points.iter().zip(values) {
        let mut row = Vec::with_capacity(d + 1);
        row.push(Rational::from_integer(1.into()));
        row.extend(y.iter().cloned());
        lp.constrain(row, Relation::Ge, v.clone());
    }
    match solve(&lp)? {
        LpOutcome::Optimal(sol) => {
            let mut primal = sol.primal;
            let h = primal.split_off(1);
            Ok((primal.pop().expect("x present"), h))
        }
        LpOutcome::Unbounded { .. } => Err(Error::UnboundedBelow),
        LpOutcome::Infeasible => unreachable!("x is free, so the rows are always satisfiable"),
    }
}

/// Largest continuation value over the outcomes sharing each support point.
fn continuation(support: &SupportSet, node: &Node, values: &BTreeMap<Node, Rational>) -> Vec<Rational> {
    let mut out: Vec<Option<Rational>> = vec![None; support.len()];
    for &(o, p) in &support.outcome_point {
        let v = &values[&node.child(o)];
        match &out[p] {
            Some(cur) if cur >= v => {}
            _ => out[p] = Some(v.clone()),
        }
    }
    out.into_iter().map(|v| v.expect("every point has an outcome")).collect()
}

fn violation(model: &MarketModel, support: &SupportSet) -> Result<Error> {
    let h = local_na(&support.points)?.unwrap_or_default();
    Ok(Error::NoArbitrageViolation {
        node: model.key(&support.node),
        certificate: format_point(&h),
    })
}

fn leaf_values(tree: &ReachableTree, claim: &Claim) -> BTreeMap<Node, Rational> {
    tree.leaves()
        .into_iter()
        .map(|l| {
            let v = claim.value(&l).clone();
            (l, v)
        })
        .collect()
}

/// Backward recursion on `tree` with supports given by its charged outcomes.
pub(crate) fn price_on_tree(
    model: &MarketModel,
    tree: &ReachableTree,
    claim: &Claim,
    semantics: PriceSemantics,
) -> Result<PriceReport> {
    let mut values = leaf_values(tree, claim);
    let mut positions = BTreeMap::new();
    for node in tree.non_terminal().into_iter().rev() {
        let support = SupportSet::from_outcomes(model, node, tree.charged(node));
        let cont = continuation(&support, node, &values);
        let (x, h) = match one_step_superhedge(&support.points, &cont) {
            Err(Error::UnboundedBelow) => return Err(violation(model, &support)?),
            other => other?,
        };
        values.insert(node.clone(), x);
        positions.insert(node.clone(), h);
    }
    Ok(PriceReport {
        price: values[&Node::root()].clone(),
        strategy: HedgingStrategy {
            initial_capital: values[&Node::root()].clone(),
            positions,
        },
        node_values: values,
        semantics,
    })
}

/// `π^Q(H)`: super-replication quasi-surely over the whole family.
pub fn price_quasi_sure(model: &MarketModel, claim: &Claim) -> Result<PriceReport> {
    global_na_qs(model)?.into_result(model)?;
    price_on_tree(model, &reachable(model), claim, PriceSemantics::QuasiSure)
}

pub fn price_mono_measure(model: &MarketModel, measure: &Disintegration, claim: &Claim) -> Result<PriceReport> {
    na_measure(model, measure)?.into_result(model)?;
    price_on_tree(model, &prior_tree(model, measure), claim, PriceSemantics::MonoPrior)
}

/// `π^P(H)` for a single prior.
pub fn price_mono(model: &MarketModel, prior: &ProductPrior, claim: &Claim) -> Result<PriceReport> {
    price_mono_measure(model, &prior.disintegration(model)?, claim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerPrice {
    pub price: Rational,
    /// A family member attaining the price.
    pub prior: ProductPrior,
    /// Index into the admissible subsets chosen at each family-reachable node.
    pub choice: BTreeMap<Node, usize>,
    /// Mono-prior report of `prior`, tagged as the lower price.
    pub report: PriceReport,
}

/// `π̲(H) = max_P π^P(H)` over a pattern family.
///
/// The one-step value is monotone in the continuation values, so the
/// maximum over product patterns is taken node by node.
pub fn price_lower(model: &MarketModel, family: &PatternFamily, claim: &Claim) -> Result<LowerPrice> {
    sna_family(model, family)?.into_result(model)?;
    let tree = family.tree(model);
    let mut values = leaf_values(&tree, claim);
    let mut choice = BTreeMap::new();
    for node in tree.non_terminal().into_iter().rev() {
        let mut best: Option<(Rational, usize)> = None;
        for (i, subset) in family.subsets(node).iter().enumerate() {
            let support = pattern_support(model, node, subset);
            let cont = continuation(&support, node, &values);
            let (x, _) = one_step_superhedge(&support.points, &cont)?;
            if best.as_ref().is_none_or(|(b, _)| &x > b) {
                best = Some((x, i));
            }
        }
        let (x, i) = best.expect("sNA guarantees a nonempty admissible list");
        values.insert(node.clone(), x);
        choice.insert(node.clone(), i);
    }
    let prior = family.representative(model, &choice);
    let mut report = price_mono(model, &prior, claim)?;
    debug_assert_eq!(report.price, values[&Node::root()]);
    report.semantics = PriceSemantics::Lower;
    Ok(LowerPrice {
        price: values[&Node::root()].clone(),
        prior,
        choice,
        report,
    })
}

/// First leaf of `leaves` where the strategy's terminal wealth falls short of the claim.
pub fn superhedge_shortfall(
    model: &MarketModel,
    claim: &Claim,
    strategy: &HedgingStrategy,
    leaves: &[Node],
) -> Option<Node> {
    leaves
        .iter()
        .find(|leaf| {
            strategy
                .terminal_wealth(model, leaf)
                .is_none_or(|w| &w < claim.value(leaf))
        })
        .cloned()
}
