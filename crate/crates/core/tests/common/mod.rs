//! Brute-force oracles sharing no code with the library's solvers.
//!
//! Polytopes `{x ≥ 0, A x = b}` are handled by enumerating basic feasible
//! solutions: every column subset whose restricted system has a unique
//! solution, kept when that solution is nonnegative.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use robusthedge::{Claim, MarketModel, Node, ProductPrior, Rational};

/// Unique solution of `a x = b` (rows of `a`), or `None` when the system is
/// inconsistent or underdetermined.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, r)| row.iter().cloned().chain([r.clone()]).collect())
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = Rational::one() / &m[pivot_row][c];
        for v in m[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m.len() {
            if r != pivot_row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                let pivot = m[pivot_row].clone();
                for (v, p) in m[r].iter_mut().zip(&pivot) {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|row| !row[cols].is_zero()) || pivots.len() < cols {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols].clone()).collect())
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    (1u32..(1u32 << n))
        .map(|mask| (0..n).filter(|&j| mask >> j & 1 == 1).collect::<Vec<_>>())
        .filter(|s| s.len() <= k)
        .collect()
}

/// Vertices of `{x ∈ R^n, x ≥ 0, A x = b}`.
pub fn vertices(a: &[Vec<Rational>], b: &[Rational], n: usize) -> Vec<Vec<Rational>> {
    let mut out = BTreeSet::new();
    for cols in subsets_up_to(n, a.len()) {
        let sub: Vec<Vec<Rational>> = a.iter().map(|row| cols.iter().map(|&j| row[j].clone()).collect()).collect();
        if let Some(x) = solve_unique(&sub, b) {
            if x.iter().all(|v| !v.is_negative()) {
                let mut full = vec![Rational::zero(); n];
                for (&j, v) in cols.iter().zip(x) {
                    full[j] = v;
                }
                out.insert(full);
            }
        }
    }
    out.into_iter().collect()
}

fn increment(model: &MarketModel, node: &Node, o: usize) -> Vec<Rational> {
    let s0 = &model.prices().values()[node];
    let s1 = &model.prices().values()[&node.child(o)];
    s1.iter().zip(s0).map(|(a, b)| a - b).collect()
}

/// Vertices of the one-step martingale polytope on `outcomes`.
fn local_vertices(model: &MarketModel, node: &Node, outcomes: &[usize]) -> Vec<Vec<Rational>> {
    let mut a = vec![vec![Rational::one(); outcomes.len()]];
    let mut b = vec![Rational::one()];
    for i in 0..model.assets() {
        a.push(outcomes.iter().map(|&o| increment(model, node, o)[i].clone()).collect());
        b.push(Rational::zero());
    }
    vertices(&a, &b, outcomes.len())
}

/// No arbitrage on `outcomes`: the vertex supports cover every outcome, so
/// their average is a martingale kernel charging all of them.
pub fn local_na(model: &MarketModel, node: &Node, outcomes: &[usize]) -> bool {
    let vs = local_vertices(model, node, outcomes);
    (0..outcomes.len()).all(|j| vs.iter().any(|v| v[j].is_positive()))
}

/// `max E_q[v]` over one-step martingale kernels on `outcomes`.
fn one_step(model: &MarketModel, node: &Node, outcomes: &[usize], values: &[Rational]) -> Option<Rational> {
    local_vertices(model, node, outcomes)
        .iter()
        .map(|v| v.iter().zip(values).map(|(a, b)| a * b).sum::<Rational>())
        .max()
}

pub fn charged_by(weights: &[Rational]) -> Vec<usize> {
    (0..weights.len()).filter(|&o| weights[o].is_positive()).collect()
}

/// Outcomes charged by some generator.
pub fn qs_charged(model: &MarketModel, node: &Node) -> Vec<usize> {
    let set: BTreeSet<usize> = model
        .generators(node)
        .iter()
        .flat_map(|k| charged_by(k.weights()))
        .collect();
    set.into_iter().collect()
}

/// Outcomes charged by the mixture `prior` at `node`.
pub fn prior_charged(model: &MarketModel, prior: &ProductPrior, node: &Node) -> Vec<usize> {
    let gens = model.generators(node);
    let w = &prior.mixtures[node];
    let set: BTreeSet<usize> = gens
        .iter()
        .zip(w)
        .filter(|(_, w)| w.is_positive())
        .flat_map(|(k, _)| charged_by(k.weights()))
        .collect();
    set.into_iter().collect()
}

/// Outcomes charged by the union of the generators in `subset`.
pub fn subset_charged(model: &MarketModel, node: &Node, subset: &[usize]) -> Vec<usize> {
    let gens = model.generators(node);
    let set: BTreeSet<usize> = subset.iter().flat_map(|&g| charged_by(gens[g].weights())).collect();
    set.into_iter().collect()
}

/// Non-terminal nodes reached through `charged`, root first.
pub fn tree_nodes(model: &MarketModel, charged: &dyn Fn(&Node) -> Vec<usize>) -> (Vec<Node>, Vec<Node>) {
    let mut inner = Vec::new();
    let mut leaves = Vec::new();
    let mut stack = vec![Node::root()];
    while let Some(n) = stack.pop() {
        if n.depth() == model.horizon() {
            leaves.push(n);
            continue;
        }
        for o in charged(&n) {
            stack.push(n.child(o));
        }
        inner.push(n);
    }
    leaves.sort();
    (inner, leaves)
}

/// Superhedging price on the tree cut out by `charged`; `None` if some node fails NA.
pub fn price_on(model: &MarketModel, charged: &dyn Fn(&Node) -> Vec<usize>, claim: &Claim) -> Option<Rational> {
    fn go(model: &MarketModel, charged: &dyn Fn(&Node) -> Vec<usize>, claim: &Claim, node: &Node) -> Option<Rational> {
        if node.depth() == model.horizon() {
            return Some(claim.value(node).clone());
        }
        let outs = charged(node);
        if !local_na(model, node, &outs) {
            return None;
        }
        let values = outs
            .iter()
            .map(|&o| go(model, charged, claim, &node.child(o)))
            .collect::<Option<Vec<_>>>()?;
        one_step(model, node, &outs, &values)
    }
    go(model, charged, claim, &Node::root())
}

pub fn price_qs(model: &MarketModel, claim: &Claim) -> Option<Rational> {
    price_on(model, &|n| qs_charged(model, n), claim)
}

pub fn price_mono(model: &MarketModel, prior: &ProductPrior, claim: &Claim) -> Option<Rational> {
    price_on(model, &|n| prior_charged(model, prior, n), claim)
}

pub fn na_qs(model: &MarketModel) -> bool {
    let (inner, _) = tree_nodes(model, &|n| qs_charged(model, n));
    inner.iter().all(|n| local_na(model, n, &qs_charged(model, n)))
}

pub fn na_prior(model: &MarketModel, prior: &ProductPrior) -> bool {
    let ch = |n: &Node| prior_charged(model, prior, n);
    let (inner, _) = tree_nodes(model, &ch);
    inner.iter().all(|n| local_na(model, n, &ch(n)))
}

/// A global pattern: one generator subset per node it reaches.
pub type Pattern = BTreeMap<Node, Vec<usize>>;

/// All global patterns whose members satisfy NA, by exhaustive enumeration.
pub fn arbitrage_free_patterns(model: &MarketModel) -> Vec<Pattern> {
    fn below(model: &MarketModel, node: &Node) -> Vec<Pattern> {
        if node.depth() == model.horizon() {
            return vec![Pattern::new()];
        }
        let g = model.generators(node).len();
        let mut out = Vec::new();
        for subset in subsets_up_to(g, g) {
            let outs = subset_charged(model, node, &subset);
            if !local_na(model, node, &outs) {
                continue;
            }
            let mut partial = vec![Pattern::from([(node.clone(), subset.clone())])];
            for o in outs {
                let subs = below(model, &node.child(o));
                partial = partial
                    .iter()
                    .flat_map(|p| {
                        subs.iter().map(move |s| {
                            let mut q = p.clone();
                            q.extend(s.iter().map(|(k, v)| (k.clone(), v.clone())));
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    }
    below(model, &Node::root())
}

/// `max π^P(H)` over arbitrage-free members, with the number of patterns searched.
pub fn price_lower_qstar(model: &MarketModel, claim: &Claim) -> Option<(Rational, usize)> {
    let patterns = arbitrage_free_patterns(model);
    let best = patterns
        .iter()
        .map(|p| price_on(model, &|n| subset_charged(model, n, &p[n]), claim).expect("pattern is arbitrage-free"))
        .max()?;
    Some((best, patterns.len()))
}

/// `max E_M[H]` over martingale measures on the quasi-sure leaves, by
/// enumerating the vertices of the global polytope.
pub fn dual_value(model: &MarketModel, claim: &Claim) -> Option<Rational> {
    let (inner, leaves) = tree_nodes(model, &|n| qs_charged(model, n));
    let mut a = vec![vec![Rational::one(); leaves.len()]];
    let mut b = vec![Rational::one()];
    for node in &inner {
        for i in 0..model.assets() {
            let s0 = &model.prices().values()[node][i];
            a.push(
                leaves
                    .iter()
                    .map(|l| {
                        if l.extends(node) {
                            &model.prices().values()[&l.prefix(node.depth() + 1)][i] - s0
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect(),
            );
            b.push(Rational::zero());
        }
    }
    vertices(&a, &b, leaves.len())
        .iter()
        .map(|v| v.iter().zip(&leaves).map(|(w, l)| w * claim.value(l)).sum::<Rational>())
        .max()
}

/// Leaf weights as products of mixed kernel weights along each path.
pub fn leaf_measure(model: &MarketModel, prior: &ProductPrior) -> BTreeMap<Node, Rational> {
    model
        .lattice()
        .leaves()
        .into_iter()
        .map(|leaf| {
            let w = (0..leaf.depth())
                .map(|t| {
                    let node = leaf.prefix(t);
                    let o = leaf.0[t];
                    model
                        .generators(&node)
                        .iter()
                        .zip(&prior.mixtures[&node])
                        .map(|(k, m)| m * k.weight(o))
                        .sum::<Rational>()
                })
                .fold(Rational::one(), |acc, x| acc * x);
            (leaf, w)
        })
        .collect()
}
