//! Local and global no-arbitrage checks with exact certificates.
//!
//! The local condition at a node fails iff some `h` has `h·y ≥ 0` on the
//! whole support and `h·y₀ > 0` at some support point. Each candidate `y₀`
//! is one LP feasibility problem; a feasible `h` is the certificate.
//!
//! NA of a single prior depends on its kernels only through their supports,
//! so a convex hull of generators is checked through the finitely many
//! generator subsets ("support patterns") a member can charge.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{solve, LinearProgram, LpOutcome, Relation};
use crate::model::{pure_selections, Disintegration, MarketModel, Node, ProductPrior};
use crate::rational::{dot, format_point, int, Point, Rational};
use crate::supports::{prior_tree, qs_charged, reachable, support_kernel, support_qs, ReachableTree, SupportSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaVerdict {
    pub holds: bool,
    /// First failing node, when NA fails.
    pub node: Option<Node>,
    /// `h` with `h·y ≥ 0` on the support and `h·y > 0` somewhere.
    pub certificate: Option<Vec<Rational>>,
    /// Generator subset whose support failed (pattern checks only).
    pub generators: Option<Vec<usize>>,
}

impl NaVerdict {
    pub fn ok() -> Self {
        NaVerdict {
            holds: true,
            node: None,
            certificate: None,
            generators: None,
        }
    }

    fn fail(node: Node, h: Vec<Rational>) -> Self {
        NaVerdict {
            holds: false,
            node: Some(node),
            certificate: Some(h),
            generators: None,
        }
    }

    /// Converts a failed verdict into the matching error.
    pub fn into_result(self, model: &MarketModel) -> Result<()> {
        if self.holds {
            return Ok(());
        }
        Err(Error::NoArbitrageViolation {
            node: self.node.as_ref().map(|n| model.key(n)).unwrap_or_default(),
            certificate: self.certificate.as_deref().map(format_point).unwrap_or_default(),
        })
    }
}

/// `true` iff `h` is an arbitrage direction for `points`.
pub fn verify_certificate(points: &[Point], h: &[Rational]) -> bool {
    points.iter().all(|y| !dot(h, y).is_negative()) && points.iter().any(|y| dot(h, y).is_positive())
}

/// Returns an arbitrage direction for `points`, or `None` when local NA holds.
pub fn local_na(points: &[Point]) -> Result<Option<Vec<Rational>>> {
    let Some(d) = points.first().map(|p| p.len()) else {
        return Ok(None);
    };
    for y0 in points {
        if y0.iter().all(|v| v.is_zero()) {
            continue;
        }
        let mut lp = LinearProgram::minimize(vec![Rational::zero(); d]);
        for y in points {
            lp.constrain(y.clone(), Relation::Ge, Rational::zero());
        }
        lp.constrain(y0.clone(), Relation::Ge, int(1));
        if let LpOutcome::Optimal(sol) = solve(&lp)? {
            debug_assert!(verify_certificate(points, &sol.primal));
            return Ok(Some(sol.primal));
        }
    }
    Ok(None)
}

pub fn local_na_verdict(support: &SupportSet) -> Result<NaVerdict> {
    Ok(match local_na(&support.points)? {
        None => NaVerdict::ok(),
        Some(h) => NaVerdict::fail(support.node.clone(), h),
    })
}

/// NA(Q): local NA at every reachable non-terminal node.
pub fn global_na_qs(model: &MarketModel) -> Result<NaVerdict> {
    let tree = reachable(model);
    for node in tree.non_terminal() {
        let v = local_na_verdict(&support_qs(model, node))?;
        if !v.holds {
            return Ok(v);
        }
    }
    Ok(NaVerdict::ok())
}

/// NA for one measure: local NA at every node of positive probability.
pub fn na_measure(model: &MarketModel, measure: &Disintegration) -> Result<NaVerdict> {
    let tree = prior_tree(model, measure);
    for node in tree.non_terminal() {
        let v = local_na_verdict(&support_kernel(model, node, measure.kernel(node)))?;
        if !v.holds {
            return Ok(v);
        }
    }
    Ok(NaVerdict::ok())
}

pub fn na_prior(model: &MarketModel, prior: &ProductPrior) -> Result<NaVerdict> {
    na_measure(model, &prior.disintegration(model)?)
}

/// Memoized local NA verdicts keyed by the support point set.
#[derive(Debug, Default)]
pub struct LocalNaCache {
    verdicts: HashMap<Vec<Point>, bool>,
}

impl LocalNaCache {
    pub fn holds(&mut self, points: &[Point]) -> Result<bool> {
        if let Some(&v) = self.verdicts.get(points) {
            return Ok(v);
        }
        let v = local_na(points)?.is_none();
        self.verdicts.insert(points.to_vec(), v);
        Ok(v)
    }

    /// NA of one measure, as [`na_measure`] but without certificates.
    pub fn measure_holds(&mut self, model: &MarketModel, measure: &Disintegration) -> Result<bool> {
        for node in prior_tree(model, measure).non_terminal() {
            if !self.holds(&support_kernel(model, node, measure.kernel(node)).points)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `N^t` over all non-terminal nodes: where the quasi-sure local condition fails.
pub fn failure_set_qs(model: &MarketModel) -> Result<BTreeSet<Node>> {
    let mut out = BTreeSet::new();
    for node in model.lattice().non_terminal_nodes() {
        if local_na(&support_qs(model, &node).points)?.is_some() {
            out.insert(node);
        }
    }
    Ok(out)
}

/// Nodes (all non-terminal) where the local condition of `measure` fails.
pub fn failure_set_measure(model: &MarketModel, measure: &Disintegration) -> Result<BTreeSet<Node>> {
    let mut out = BTreeSet::new();
    for node in model.lattice().non_terminal_nodes() {
        if local_na(&support_kernel(model, &node, measure.kernel(&node)).points)?.is_some() {
            out.insert(node);
        }
    }
    Ok(out)
}

/// Admissible generator subsets at every non-terminal node.
///
/// A member of the family picks, at each node, a kernel whose support is
/// the union of the supports of one admissible subset; the uniform mixture
/// over the subset represents the pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternFamily {
    admissible: BTreeMap<Node, Vec<Vec<usize>>>,
}

fn subsets_by_mask(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u64..(1u64 << n)).map(move |mask| (0..n).filter(|&g| mask >> g & 1 == 1).collect())
}

impl PatternFamily {
    fn guard(model: &MarketModel, cap: u64) -> Result<()> {
        let count: u128 = model
            .kernel_sets()
            .values()
            .map(|ks| {
                let g = ks.generators.len().min(127);
                (1u128 << g) - 1
            })
            .sum();
        if count > cap as u128 || model.kernel_sets().values().any(|ks| ks.generators.len() > 63) {
            return Err(Error::ExplosionGuard {
                what: "generator subsets",
                count,
                cap,
            });
        }
        Ok(())
    }

    /// All nonempty subsets: the full convex hull of the generators.
    pub fn full(model: &MarketModel, cap: u64) -> Result<Self> {
        Self::guard(model, cap)?;
        Ok(PatternFamily {
            admissible: model
                .kernel_sets()
                .iter()
                .map(|(n, ks)| (n.clone(), subsets_by_mask(ks.generators.len()).collect()))
                .collect(),
        })
    }

    /// Subsets whose support passes local NA and whose charged children all
    /// keep some subset: the patterns of members of `Q*`.
    pub fn q_star(model: &MarketModel, cap: u64) -> Result<Self> {
        Self::guard(model, cap)?;
        let mut nodes: Vec<&Node> = model.kernel_sets().keys().collect();
        nodes.sort_by_key(|n| std::cmp::Reverse(n.depth()));
        let mut admissible: BTreeMap<Node, Vec<Vec<usize>>> = BTreeMap::new();
        for node in nodes {
            let mut keep = Vec::new();
            for subset in subsets_by_mask(model.generators(node).len()) {
                let completes = pattern_charged(model, node, &subset)
                    .iter()
                    .all(|&o| admissible.get(&node.child(o)).is_none_or(|s| !s.is_empty()));
                if completes && local_na(&pattern_support(model, node, &subset).points)?.is_none() {
                    keep.push(subset);
                }
            }
            admissible.insert(node.clone(), keep);
        }
        Ok(PatternFamily { admissible })
    }

    pub fn from_subsets(model: &MarketModel, admissible: BTreeMap<Node, Vec<Vec<usize>>>) -> Result<Self> {
        for (node, ks) in model.kernel_sets() {
            let subs = admissible
                .get(node)
                .ok_or_else(|| Error::ShapeMismatch(format!("no patterns at node {:?}", model.key(node))))?;
            if subs.is_empty()
                || subs
                    .iter()
                    .any(|s| s.is_empty() || s.iter().any(|&g| g >= ks.generators.len()))
            {
                return Err(Error::ShapeMismatch(format!(
                    "bad generator subsets at node {:?}",
                    model.key(node)
                )));
            }
        }
        Ok(PatternFamily { admissible })
    }

    pub fn subsets(&self, node: &Node) -> &[Vec<usize>] {
        &self.admissible[node]
    }

    /// Nodes whose admissible list is empty (possible for `Q*`).
    pub fn is_empty_at(&self, node: &Node) -> bool {
        self.admissible[node].is_empty()
    }

    /// Union of the charged outcomes of all admissible subsets.
    pub fn tree(&self, model: &MarketModel) -> ReachableTree {
        ReachableTree::build(model, |node| {
            let set: BTreeSet<usize> = self.admissible[node]
                .iter()
                .flat_map(|s| pattern_charged(model, node, s))
                .collect();
            set.into_iter().collect()
        })
    }

    /// Uniform mixture over the chosen subset at each node; nodes missing
    /// from `choice` use their first admissible subset.
    pub fn representative(&self, model: &MarketModel, choice: &BTreeMap<Node, usize>) -> ProductPrior {
        ProductPrior::uniform_on(model, |node| {
            let subs = &self.admissible[node];
            if subs.is_empty() {
                return (0..model.generators(node).len()).collect();
            }
            subs[choice.get(node).copied().unwrap_or(0).min(subs.len() - 1)].clone()
        })
    }

    /// Number of distinct global patterns over the family's reachable tree.
    pub fn pattern_count(&self, model: &MarketModel) -> u128 {
        self.tree(model)
            .non_terminal()
            .iter()
            .map(|n| self.admissible[*n].len().max(1) as u128)
            .fold(1u128, |a, b| a.saturating_mul(b))
    }
}

/// Outcomes charged by some generator of `subset` at `node`.
pub fn pattern_charged(model: &MarketModel, node: &Node, subset: &[usize]) -> Vec<usize> {
    let gens = model.generators(node);
    let set: BTreeSet<usize> = subset.iter().flat_map(|&g| gens[g].charged()).collect();
    set.into_iter().collect()
}

pub fn pattern_support(model: &MarketModel, node: &Node, subset: &[usize]) -> SupportSet {
    SupportSet::from_outcomes(model, node, &pattern_charged(model, node, subset))
}

/// sNA over a pattern family: every member satisfies NA.
///
/// A member's NA is local NA on its positive-probability nodes, and those
/// nodes lie in the family tree, so checking each admissible subset at each
/// family-reachable node decides the universal statement.
pub fn sna_family(model: &MarketModel, family: &PatternFamily) -> Result<NaVerdict> {
    let tree = family.tree(model);
    for node in tree.non_terminal() {
        for subset in family.subsets(node) {
            if let Some(h) = local_na(&pattern_support(model, node, subset).points)? {
                let mut v = NaVerdict::fail(node.clone(), h);
                v.generators = Some(subset.clone());
                return Ok(v);
            }
        }
        if family.is_empty_at(node) {
            return Ok(NaVerdict {
                holds: false,
                node: Some(node.clone()),
                certificate: None,
                generators: Some(Vec::new()),
            });
        }
    }
    Ok(NaVerdict::ok())
}

/// Members of `Q*` among the pure selections and the full uniform mixture.
pub fn q_star(model: &MarketModel, cap: u64) -> Result<Vec<ProductPrior>> {
    let mut candidates = pure_selections(model, cap)?;
    candidates.push(ProductPrior::uniform(model));
    let mut out = Vec::new();
    for p in candidates {
        if na_prior(model, &p)?.holds {
            out.push(p);
        }
    }
    Ok(out)
}

/// Outcomes charged by the quasi-sure family at `node`, exposed for oracles.
pub fn charged_qs(model: &MarketModel, node: &Node) -> Vec<usize> {
    qs_charged(model, node)
}
