//! End-to-end verification of the price equalities on one market, and a
//! seeded random driver.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arbitrage::{failure_set_measure, failure_set_qs, global_na_qs, na_prior, sna_family, LocalNaCache, PatternFamily};
use crate::constructions::{build_phat, build_ptilde_family, build_ptilde_measure, hull_membership_prior, kernel_in_hull, repair_with};
use crate::duality::{dual_sup, full_support_martingale, gap_evidence};
use crate::error::{Error, Result};
use crate::fixtures::{random_instance, seeded_rng, RandomBounds};
use crate::io::market_to_json;
use crate::model::{
    prior_measure, pure_selection_count, pure_selections, Claim, Disintegration, Kernel, MarketModel, Node, ProductPrior,
};
use crate::pricing::{price_lower, price_mono, price_quasi_sure};
use crate::rational::{format_rational, Rational};
use crate::supports::{reachable, support_kernel, support_qs, supports_match, SupportFamily};

/// Perturbation indices used for the equivalent-measure gap law.
pub const GAP_NS: [u64; 3] = [1, 10, 100];

/// Pure selections are enumerated up to this many; beyond it a deterministic sample is used.
pub const SELECTION_CAP: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub left: String,
    pub right: String,
    pub pass: bool,
    /// Node key or prior description explaining a failure.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    /// Quasi-sure price, the common value of every price link.
    pub value: String,
    pub links: Vec<ChainLink>,
    pub all_pass: bool,
}

impl ChainReport {
    pub fn failures(&self) -> impl Iterator<Item = &ChainLink> {
        self.links.iter().filter(|l| !l.pass)
    }
}

fn eq_link(name: &str, left: &Rational, right: &Rational) -> ChainLink {
    ChainLink {
        name: name.into(),
        left: format_rational(left),
        right: format_rational(right),
        pass: left == right,
        witness: None,
    }
}

fn check_link(name: &str, left: impl Into<String>, right: impl Into<String>, witness: Option<String>) -> ChainLink {
    ChainLink {
        name: name.into(),
        left: left.into(),
        right: right.into(),
        pass: witness.is_none(),
        witness,
    }
}

/// All pure selections when there are at most `cap`, otherwise the cyclic
/// diagonals plus `cap` seeded random selections.
pub fn selection_sample(model: &MarketModel, cap: u64) -> Result<Vec<ProductPrior>> {
    if pure_selection_count(model) <= cap as u128 {
        return pure_selections(model, cap);
    }
    let width = model.kernel_sets().values().map(|k| k.generators.len()).max().unwrap_or(1);
    let mut out: Vec<ProductPrior> = (0..width)
        .map(|j| ProductPrior::pure(model, |n| j % model.generators(n).len()))
        .collect();
    let mut rng = seeded_rng(cap);
    for _ in 0..cap {
        let picks: BTreeMap<Node, usize> = model
            .kernel_sets()
            .iter()
            .map(|(n, k)| (n.clone(), rng.random_range(0..k.generators.len())))
            .collect();
        out.push(ProductPrior::pure(model, |n| picks[n]));
    }
    Ok(out)
}

/// First node reachable in `reference` where the prior's support differs from
/// the quasi-sure support of `reference`.
fn support_gap(model: &MarketModel, measure: &Disintegration, reference: &MarketModel) -> Option<String> {
    reachable(reference)
        .non_terminal()
        .into_iter()
        .find(|n| support_kernel(model, n, measure.kernel(n)).points != support_qs(reference, n).points)
        .map(|n| reference.key(n))
}

fn describe(model: &MarketModel, prior: &ProductPrior) -> String {
    crate::io::prior_to_json(model, prior).to_string()
}

/// Runs every equality and assumption check on `model` with claim `claim`.
pub fn verify_chain(model: &MarketModel, claim: &Claim, cap: u64) -> Result<ChainReport> {
    global_na_qs(model)?.into_result(model)?;
    let tree = reachable(model);
    let half = Rational::new(1.into(), 2.into());
    let mut links = Vec::new();

    let qs = price_quasi_sure(model, claim)?.price;

    // the support-completing family and its prices
    let fam_model = build_ptilde_family(model, &half)?;
    let fam_qs = price_quasi_sure(&fam_model, claim)?.price;
    links.push(eq_link("qs_price = family_qs_price", &qs, &fam_qs));
    let fam_patterns = PatternFamily::full(&fam_model, cap)?;
    let fam_lower = price_lower(&fam_model, &fam_patterns, claim)?;
    links.push(eq_link("family_qs_price = family_lower_price", &fam_qs, &fam_lower.price));
    let fam_phat = build_phat(&fam_model, &fam_patterns, claim)?;
    let best_member = fam_phat
        .representatives
        .iter()
        .map(|(_, v)| v.clone())
        .max()
        .expect("at least one representative");
    links.push(eq_link("family_lower_price = max_member_price", &fam_lower.price, &best_member));
    let fam_phat_price = price_mono(&fam_model, &fam_phat.prior, claim)?.price;
    links.push(eq_link("max_member_price = family_phat_price", &best_member, &fam_phat_price));

    // duality
    let dual = dual_sup(model, claim)?;
    links.push(eq_link("qs_price = martingale_dual_value", &qs, &dual.value));
    let m_hat = full_support_martingale(model)?;
    let ev = gap_evidence(model, &tree, claim, &dual, &m_hat, &GAP_NS);
    let bad_n = ev.rows.iter().find(|r| !r.law_holds).map(|r| format!("n = {}", r.n));
    let witness = if !ev.holds && bad_n.is_none() {
        Some("reference measure lacks full support".into())
    } else {
        bad_n
    };
    links.push(check_link(
        "equivalent_measure_gap_law",
        format_rational(&ev.value),
        format!("c = {}", format_rational(&ev.constant)),
        witness,
    ));

    // sup over members of the full family
    let q_star = PatternFamily::q_star(model, cap)?;
    let star_lower = price_lower(model, &q_star, claim)?;
    links.push(eq_link("qs_price = max_arbitrage_free_member_price", &qs, &star_lower.price));
    let uniform = ProductPrior::uniform(model);
    let uniform_price = price_mono(model, &uniform, claim)?.price;
    links.push(eq_link("qs_price = full_mixture_price", &qs, &uniform_price));

    let phat = build_phat(model, &q_star, claim)?;
    let phat_price = price_mono(model, &phat.prior, claim)?.price;
    links.push(eq_link("qs_price = phat_price", &qs, &phat_price));
    let phat_na = na_prior(model, &phat.prior)?;
    links.push(check_link(
        "phat_arbitrage_free",
        "holds",
        if phat_na.holds { "holds" } else { "fails" },
        phat_na.node.map(|n| model.key(&n)),
    ));

    // supports of family members
    let mut witness = None;
    for member in selection_sample(&fam_model, SELECTION_CAP)?.into_iter().chain([ProductPrior::uniform(&fam_model)]) {
        if let Some(node) = support_gap(&fam_model, &member.disintegration(&fam_model)?, model) {
            witness = Some(format!("{} at {node:?}", describe(&fam_model, &member)));
            break;
        }
    }
    links.push(check_link("family_member_supports = qs_supports", "member supports", "qs supports", witness));

    let phat_family = SupportFamily::from_priors(model, std::slice::from_ref(&phat.prior))?;
    let m = supports_match(model, &phat_family, &SupportFamily::QuasiSure);
    let witness = m
        .first_difference
        .map(|n| model.key(&n))
        .or_else(|| (phat_family.tree(model) != tree).then(|| "tree".to_string()));
    links.push(check_link("phat_supports = qs_supports", "phat supports", "qs supports", witness));

    // assumptions on the constructed family
    let sna = sna_family(&fam_model, &fam_patterns)?;
    links.push(check_link(
        "family_members_arbitrage_free",
        "all members",
        if sna.holds { "holds" } else { "fails" },
        sna.node.map(|n| fam_model.key(&n)),
    ));
    let fam_tree = reachable(&fam_model);
    let witness = tree
        .non_terminal()
        .into_iter()
        .find(|n| support_qs(&fam_model, n).points != support_qs(model, n).points)
        .map(|n| model.key(n));
    let witness = witness.or_else(|| (fam_tree != tree).then(|| "tree".to_string()));
    links.push(check_link("family_polar_sets = qs_polar_sets", "family supports", "qs supports", witness));

    let ptilde = build_ptilde_measure(model);
    let mut na_cache = LocalNaCache::default();
    let mut hull_cache: HashMap<(Node, Kernel), bool> = HashMap::new();
    let mut witness = None;
    for q in selection_sample(model, SELECTION_CAP)? {
        let r = repair_with(&ptilde, &q);
        let mq = prior_measure(model, &q)?;
        let r_dis = r.disintegration(model)?;
        let mr = r_dis.leaf_measure(model.lattice());
        let dominated = mq.iter().all(|(l, w)| w.is_zero() || mr[l].is_positive());
        let mut member = true;
        for (node, k) in &r_dis.kernels {
            let key = (node.clone(), k.clone());
            let ok = match hull_cache.get(&key) {
                Some(&ok) => ok,
                None => {
                    let ok = kernel_in_hull(&fam_model, node, k)?;
                    hull_cache.insert(key, ok);
                    ok
                }
            };
            member &= ok;
        }
        let na = na_cache.measure_holds(model, &r_dis)?;
        let supports = support_gap(model, &r_dis, model);
        if !(dominated && member && na && supports.is_none()) {
            witness = Some(describe(model, &q));
            break;
        }
    }
    links.push(check_link("repair_mixture_dominates_members", "members", "repaired", witness));

    // the support-completing prior
    let pt_family = SupportFamily::from_priors(model, std::slice::from_ref(&ptilde))?;
    let m = supports_match(model, &pt_family, &SupportFamily::QuasiSure);
    let witness = m
        .first_difference
        .map(|n| model.key(&n))
        .or_else(|| (pt_family.tree(model) != tree).then(|| "tree".to_string()));
    links.push(check_link("ptilde_supports = qs_supports", "ptilde supports", "qs supports", witness));

    let pt_member = hull_membership_prior(model, &ptilde)?;
    let phat_member = hull_membership_prior(model, &phat.prior)?;
    let witness = pt_member
        .per_node
        .iter()
        .chain(&phat_member.per_node)
        .find(|(_, ok)| !**ok)
        .map(|(n, _)| model.key(n));
    links.push(check_link("ptilde_and_phat_in_hull", "members", "hull", witness));

    let fs_qs = failure_set_qs(model)?;
    let fs_pt = failure_set_measure(model, &ptilde.disintegration(model)?)?;
    let witness = fs_qs
        .symmetric_difference(&fs_pt)
        .next()
        .map(|n| model.key(n));
    links.push(check_link(
        "qs_failure_set = ptilde_failure_set",
        format!("{} nodes", fs_qs.len()),
        format!("{} nodes", fs_pt.len()),
        witness,
    ));

    let all_pass = links.iter().all(|l| l.pass);
    Ok(ChainReport {
        value: format_rational(&qs),
        links,
        all_pass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub index: usize,
    pub failing_links: Vec<String>,
    /// Market file of the smallest failing variant found by dropping generators.
    pub market: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSummary {
    pub seed: u64,
    pub requested: usize,
    pub generated: usize,
    pub rejected_no_arbitrage: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<InstanceFailure>,
}

fn chain_failures(model: &MarketModel, claim: &Claim, cap: u64) -> Option<Vec<String>> {
    match verify_chain(model, claim, cap) {
        Ok(r) if r.all_pass => None,
        Ok(r) => Some(r.failures().map(|l| l.name.clone()).collect()),
        Err(e) => Some(vec![format!("error: {e}")]),
    }
}

/// Greedily drops generators while the market stays arbitrage-free and the chain still fails.
fn shrink(model: &MarketModel, claim: &Claim, cap: u64) -> MarketModel {
    let mut current = model.clone();
    loop {
        let mut improved = false;
        for (node, ks) in current.kernel_sets().clone() {
            if ks.generators.len() < 2 {
                continue;
            }
            for g in 0..ks.generators.len() {
                let mut gens = current.generator_map();
                let list: Vec<Kernel> = gens[&node]
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != g)
                    .map(|(_, k)| k.clone())
                    .collect();
                gens.insert(node.clone(), list);
                let Ok(candidate) = current.with_generators(gens) else { continue };
                if global_na_qs(&candidate).is_ok_and(|v| v.holds) && chain_failures(&candidate, claim, cap).is_some() {
                    current = candidate;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            return current;
        }
    }
}

/// Generates `count` arbitrage-free random markets from `seed` and verifies each chain.
pub fn verify_random(count: usize, seed: u64, bounds: &RandomBounds, cap: u64) -> Result<RandomSummary> {
    let mut rng = seeded_rng(seed);
    let mut instances = Vec::with_capacity(count);
    let mut generated = 0usize;
    let mut rejected = 0usize;
    while instances.len() < count {
        generated += 1;
        let (model, claim) = random_instance(&mut rng, bounds);
        if global_na_qs(&model)?.holds {
            instances.push((model, claim));
        } else {
            rejected += 1;
        }
        if generated > 100 * count.max(1) {
            return Err(Error::BadParameter("too many random markets admit arbitrage".into()));
        }
    }
    let outcomes: Vec<Option<Vec<String>>> = instances
        .par_iter()
        .map(|(m, c)| chain_failures(m, c, cap))
        .collect();
    let mut failures = Vec::new();
    for (index, (fail, (m, c))) in outcomes.into_iter().zip(&instances).enumerate() {
        if let Some(failing_links) = fail {
            let small = shrink(m, c, cap);
            failures.push(InstanceFailure {
                index,
                failing_links,
                market: market_to_json(&small, Some(c)),
            });
        }
    }
    Ok(RandomSummary {
        seed,
        requested: count,
        generated,
        rejected_no_arbitrage: rejected,
        passed: count - failures.len(),
        failed: failures.len(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_c};
    use crate::model::DEFAULT_CAP;

    #[test]
    fn fixture_chains() {
        let (a, ha) = fix_a();
        let r = verify_chain(&a, &ha, DEFAULT_CAP).unwrap();
        assert!(r.all_pass, "{r:?}");
        assert_eq!(r.value, "1/2");
        let (b, hb) = fix_b(2).unwrap();
        let r = verify_chain(&b, &hb, DEFAULT_CAP).unwrap();
        assert!(r.all_pass, "{r:?}");
        assert_eq!(r.value, "2/5");
        let (c, hc) = fix_c();
        assert!(matches!(verify_chain(&c, &hc, DEFAULT_CAP), Err(Error::NoArbitrageViolation { .. })));
    }

    #[test]
    fn report_round_trips() {
        let (b, hb) = fix_b(3).unwrap();
        let r = verify_chain(&b, &hb, DEFAULT_CAP).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ChainReport>(&text).unwrap(), r);
    }

    #[test]
    fn random_summary_is_deterministic() {
        let empty = verify_random(0, 1, &RandomBounds::TINY, DEFAULT_CAP).unwrap();
        assert_eq!((empty.requested, empty.passed, empty.failed), (0, 0, 0));
        let a = verify_random(5, 9, &RandomBounds::TINY, DEFAULT_CAP).unwrap();
        let b = verify_random(5, 9, &RandomBounds::TINY, DEFAULT_CAP).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.failed, 0, "{a:?}");
    }
}
