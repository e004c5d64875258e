//! Prior constructions: the support-completing kernel `p̃`, its product
//! `P̃`, the mixed family built around it, the extreme prior `P̂`, the
//! NA-repair mixture and convex-hull membership.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::arbitrage::{global_na_qs, PatternFamily};
use crate::error::{Error, Result};
use crate::lp::{solve, LinearProgram, LpOutcome, Relation};
use crate::model::{Disintegration, Kernel, KernelSet, MarketModel, Node, ProductPrior, Claim};
use crate::pricing::{price_lower, price_mono};
use crate::rational::{format_rational, int, pow2_inv, Rational};
use crate::supports::support_qs;

/// Mixture weights over the node's generators defining `p̃`.
///
/// Charged outcomes are ordered by their support point (lexicographic) and
/// then by index, giving `X_1, …, X_m`; `X_n` contributes
/// `2^{-n}/(1 − 2^{-m})` to the first generator charging it.
pub fn ptilde_weights(model: &MarketModel, node: &Node) -> Vec<Rational> {
    let gens = model.generators(node);
    let support = support_qs(model, node);
    let mut atoms: Vec<(usize, usize)> = support.outcome_point.iter().map(|(o, p)| (*p, *o)).collect();
    atoms.sort();
    let norm = Rational::one() - pow2_inv(atoms.len() as u32);
    let mut w = vec![Rational::zero(); gens.len()];
    for (n, (_, o)) in atoms.iter().enumerate() {
        let g = gens
            .iter()
            .position(|k| k.weight(*o).is_positive())
            .expect("charged outcomes are charged by some generator");
        w[g] += pow2_inv(n as u32 + 1) / &norm;
    }
    w
}

pub fn build_ptilde_kernel(model: &MarketModel, node: &Node) -> Kernel {
    let w = ptilde_weights(model, node);
    Kernel::mix(w.iter().zip(model.generators(node)))
}

/// `P̃ = p̃_1 ⊗ ⋯ ⊗ p̃_T`.
pub fn build_ptilde_measure(model: &MarketModel) -> ProductPrior {
    ProductPrior {
        mixtures: model
            .kernel_sets()
            .keys()
            .map(|n| (n.clone(), ptilde_weights(model, n)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedKernelSet {
    pub base: KernelSet,
    pub ptilde: Kernel,
    pub lambda: Rational,
    /// `λ·p̃ + (1 − λ)·q` for each base generator `q`, exact duplicates removed.
    pub mixed_generators: Vec<Kernel>,
}

fn check_lambda(lambda: &Rational) -> Result<()> {
    if !lambda.is_positive() || lambda > &Rational::one() {
        return Err(Error::LambdaOutOfRange(format_rational(lambda)));
    }
    Ok(())
}

pub fn augmented_kernel_set(model: &MarketModel, node: &Node, lambda: &Rational) -> Result<AugmentedKernelSet> {
    check_lambda(lambda)?;
    let ptilde = build_ptilde_kernel(model, node);
    let rest = Rational::one() - lambda;
    let mut mixed_generators: Vec<Kernel> = Vec::new();
    for q in model.generators(node) {
        let k = Kernel::mix([(lambda, &ptilde), (&rest, q)]);
        if !mixed_generators.contains(&k) {
            mixed_generators.push(k);
        }
    }
    Ok(AugmentedKernelSet {
        base: model.kernel_sets()[node].clone(),
        ptilde,
        lambda: lambda.clone(),
        mixed_generators,
    })
}

/// Same lattice and prices with generators `{λ·p̃ + (1 − λ)·q}` at every node.
pub fn build_ptilde_family(model: &MarketModel, lambda: &Rational) -> Result<MarketModel> {
    check_lambda(lambda)?;
    let mut generators = BTreeMap::new();
    for node in model.kernel_sets().keys() {
        generators.insert(node.clone(), augmented_kernel_set(model, node, lambda)?.mixed_generators);
    }
    model.with_generators(generators)
}

/// `½·Q + ½·P̃`, mixed node by node.
pub fn na_repair_mixture(model: &MarketModel, q: &ProductPrior) -> Result<ProductPrior> {
    global_na_qs(model)?.into_result(model)?;
    q.validate(model)?;
    Ok(repair_with(&build_ptilde_measure(model), q))
}

/// `½·Q + ½·companion` without checks.
pub fn repair_with(companion: &ProductPrior, q: &ProductPrior) -> ProductPrior {
    let half = Rational::new(1.into(), 2.into());
    ProductPrior::mix(&[(half.clone(), q), (half, companion)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phat {
    pub prior: ProductPrior,
    /// Representatives in mixture order with their mono-prior prices.
    pub representatives: Vec<(ProductPrior, Rational)>,
}

/// `P̂ = Σ_n 2^{-n} P_n / (1 − 2^{-k})` over pattern representatives sorted
/// by descending mono-prior price.
///
/// Representatives are the price maximizer and the "diagonal" patterns
/// picking the `j`-th admissible subset (cyclically) at every node, so
/// every admissible subset appears at every node.
pub fn build_phat(model: &MarketModel, family: &PatternFamily, claim: &Claim) -> Result<Phat> {
    let best = price_lower(model, family, claim)?;
    let tree = family.tree(model);
    let width = tree
        .non_terminal()
        .iter()
        .map(|n| family.subsets(n).len())
        .max()
        .unwrap_or(1);
    let encode = |choice: &BTreeMap<Node, usize>| -> Vec<usize> {
        tree.non_terminal()
            .iter()
            .map(|n| choice.get(*n).copied().unwrap_or(0))
            .collect()
    };
    let mut patterns: Vec<Vec<usize>> = vec![encode(&best.choice)];
    for j in 0..width {
        let choice: BTreeMap<Node, usize> = tree
            .non_terminal()
            .iter()
            .map(|n| ((*n).clone(), j % family.subsets(n).len()))
            .collect();
        let code = encode(&choice);
        if !patterns.contains(&code) {
            patterns.push(code);
        }
    }
    let nodes: Vec<Node> = tree.non_terminal().into_iter().cloned().collect();
    let mut ranked = Vec::with_capacity(patterns.len());
    for code in patterns {
        let choice: BTreeMap<Node, usize> = nodes.iter().cloned().zip(code.iter().copied()).collect();
        let prior = family.representative(model, &choice);
        let price = price_mono(model, &prior, claim)?.price;
        ranked.push((price, code, prior));
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let k = ranked.len() as u32;
    let norm = Rational::one() - pow2_inv(k);
    let weights: Vec<(Rational, &ProductPrior)> = ranked
        .iter()
        .enumerate()
        .map(|(n, (_, _, p))| (pow2_inv(n as u32 + 1) / &norm, p))
        .collect();
    let prior = ProductPrior::mix(&weights);
    Ok(Phat {
        prior,
        representatives: ranked.into_iter().map(|(v, _, p)| (p, v)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullMembership {
    pub per_node: BTreeMap<Node, bool>,
    pub all: bool,
}

/// Whether `kernel` is a convex combination of the generators at `node`.
pub fn kernel_in_hull(model: &MarketModel, node: &Node, kernel: &Kernel) -> Result<bool> {
    let gens = model.generators(node);
    let mut lp = LinearProgram::minimize(vec![Rational::zero(); gens.len()]);
    for g in 0..gens.len() {
        lp.nonneg(g);
    }
    lp.constrain(vec![int(1); gens.len()], Relation::Eq, int(1));
    for o in 0..kernel.len() {
        lp.constrain(
            gens.iter().map(|q| q.weight(o).clone()).collect(),
            Relation::Eq,
            kernel.weight(o).clone(),
        );
    }
    Ok(matches!(solve(&lp)?, LpOutcome::Optimal(_)))
}

pub fn hull_membership(model: &MarketModel, measure: &Disintegration) -> Result<HullMembership> {
    measure.validate(model)?;
    let mut per_node = BTreeMap::new();
    for node in model.kernel_sets().keys() {
        per_node.insert(node.clone(), kernel_in_hull(model, node, measure.kernel(node))?);
    }
    let all = per_node.values().all(|&b| b);
    Ok(HullMembership { per_node, all })
}

pub fn hull_membership_prior(model: &MarketModel, prior: &ProductPrior) -> Result<HullMembership> {
    hull_membership(model, &prior.disintegration(model)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arbitrage::na_prior;
    use crate::fixtures::{fix_a, fix_b, fix_c, fix_d};
    use crate::model::DEFAULT_CAP;
    use crate::pricing::price_quasi_sure;
    use crate::rational::ratio;
    use crate::supports::{reachable, supports_match, support_prior, SupportFamily};

    #[test]
    fn ptilde_fix_b() {
        let (b, _) = fix_b(2).unwrap();
        let root = Node::root();
        assert_eq!(ptilde_weights(&b, &root), vec![ratio(5, 7), ratio(2, 7)]);
        let pt = build_ptilde_measure(&b);
        assert_eq!(support_prior(&b, &pt, &root).unwrap().points, support_qs(&b, &root).points);
    }

    #[test]
    fn ptilde_single_generator() {
        let (a, _) = fix_a();
        assert_eq!(build_ptilde_kernel(&a, &Node::root()), a.root_generators()[0]);
        assert_eq!(build_ptilde_measure(&a), ProductPrior::uniform(&a));
    }

    #[test]
    fn family_models() {
        let (b, hb) = fix_b(2).unwrap();
        let one = build_ptilde_family(&b, &int(1)).unwrap();
        assert_eq!(one.root_generators().len(), 1);
        let half = build_ptilde_family(&b, &ratio(1, 2)).unwrap();
        assert_eq!(half.root_generators().len(), 2);
        for k in half.root_generators() {
            assert_eq!(k.charged().len(), 3);
        }
        assert_eq!(price_quasi_sure(&half, &hb).unwrap().price, ratio(2, 5));
        assert!(matches!(build_ptilde_family(&b, &int(0)), Err(Error::LambdaOutOfRange(_))));
        assert!(matches!(build_ptilde_family(&b, &ratio(3, 2)), Err(Error::LambdaOutOfRange(_))));
    }

    #[test]
    fn phat_examples() {
        let (b, hb) = fix_b(2).unwrap();
        let fam = PatternFamily::full(&b, DEFAULT_CAP).unwrap();
        let ph = build_phat(&b, &fam, &hb).unwrap();
        assert_eq!(support_prior(&b, &ph.prior, &Node::root()).unwrap().len(), 3);
        assert_eq!(price_mono(&b, &ph.prior, &hb).unwrap().price, ratio(2, 5));
        let (a, ha) = fix_a();
        let pa = build_phat(&a, &PatternFamily::full(&a, DEFAULT_CAP).unwrap(), &ha).unwrap();
        assert_eq!(pa.prior, ProductPrior::uniform(&a));
    }

    #[test]
    fn repair() {
        let (b, _) = fix_b(2).unwrap();
        let p1 = ProductPrior::pure(&b, |_| 0);
        let r = na_repair_mixture(&b, &p1).unwrap();
        assert!(na_prior(&b, &r).unwrap().holds);
        assert_eq!(support_prior(&b, &r, &Node::root()).unwrap().len(), 3);
        let pt = build_ptilde_measure(&b);
        assert_eq!(na_repair_mixture(&b, &pt).unwrap(), pt);
        let (c, _) = fix_c();
        assert!(na_repair_mixture(&c, &ProductPrior::uniform(&c)).is_err());
    }

    #[test]
    fn membership() {
        let (b, _) = fix_b(2).unwrap();
        let pt = build_ptilde_measure(&b);
        assert!(hull_membership_prior(&b, &pt).unwrap().all);
        assert!(hull_membership_prior(&b, &ProductPrior::uniform(&b)).unwrap().all);
        let delta = Disintegration {
            kernels: [(Node::root(), Kernel::point_mass(3, 0))].into_iter().collect(),
        };
        assert!(!hull_membership(&b, &delta).unwrap().all);
    }

    #[test]
    fn ptilde_matches_qs_supports_on_fix_d() {
        for seed in 0..8 {
            let (d, _) = fix_d(seed);
            let fam = SupportFamily::from_priors(&d, &[build_ptilde_measure(&d)]).unwrap();
            let m = supports_match(&d, &fam, &SupportFamily::QuasiSure);
            assert!(m.matches);
            assert_eq!(fam.tree(&d), reachable(&d));
        }
    }
}
