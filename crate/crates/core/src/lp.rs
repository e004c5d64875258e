//! Exact linear programming over the rationals.
//!
//! Two-phase dense tableau simplex with Bland's pivot rule. Every optimum
//! comes with row duals and reduced costs; [`check_optimality`] re-verifies
//! primal feasibility, dual feasibility and equal objective values with no
//! tolerance.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{dot, Rational};

pub const DEFAULT_MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint { coeffs, relation, rhs }
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

impl LinearProgram {
    /// All variables start free.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBounds::default(); n],
        }
    }

    pub fn minimize(objective: Vec<Rational>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn maximize(objective: Vec<Rational>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "row width must match the objective");
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> &mut Self {
        self.bounds[var] = VarBounds { lower, upper };
        self
    }

    pub fn nonneg(&mut self, var: usize) -> &mut Self {
        self.bounds[var].lower = Some(Rational::zero());
        self
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && self.constraints.iter().all(|c| c.is_satisfied(x))
            && self.bounds.iter().zip(x).all(|(b, v)| {
                b.lower.as_ref().is_none_or(|l| v >= l) && b.upper.as_ref().is_none_or(|u| v <= u)
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: Rational,
    pub primal: Vec<Rational>,
    /// One multiplier per constraint row.
    pub duals: Vec<Rational>,
    /// `c − Aᵀy`, one per variable.
    pub reduced_costs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(Solution),
    Infeasible,
    /// The objective improves without bound along `ray` from any feasible point.
    Unbounded { ray: Vec<Rational> },
}

impl LpOutcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum VarMap {
    /// x = offset + x'
    Shift { col: usize, offset: Rational },
    /// x = offset − x'
    Mirror { col: usize, offset: Rational },
    /// x = x⁺ − x⁻
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    costs: Vec<Rational>,
    maps: Vec<VarMap>,
    /// (std row, sign) for every original constraint
    row_of: Vec<(usize, bool)>,
    /// first artificial column
    n_real: usize,
    /// original row of each artificial column
    artificial_rows: Vec<usize>,
    basis: Vec<usize>,
}

fn standard_form(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let negate = lp.sense == Sense::Maximize;
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut ub_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), u) => {
                maps.push(VarMap::Shift { col: ncols, offset: l.clone() });
                if let Some(u) = u {
                    ub_rows.push((ncols, u - l));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Mirror { col: ncols, offset: u.clone() });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let n_struct = ncols;

    let mut costs = vec![Rational::zero(); n_struct];
    for (j, m) in maps.iter().enumerate() {
        let c = if negate { -&lp.objective[j] } else { lp.objective[j].clone() };
        match m {
            VarMap::Shift { col, .. } => costs[*col] = c,
            VarMap::Mirror { col, .. } => costs[*col] = -c,
            VarMap::Split { pos, neg } => {
                costs[*neg] = -c.clone();
                costs[*pos] = c;
            }
        }
    }

    // (coefficients over structural columns, relation, rhs)
    let mut raw: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![Rational::zero(); n_struct];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Shift { col, offset } => {
                    row[*col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirror { col, offset } => {
                    row[*col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        raw.push((row, c.relation, rhs));
    }
    for (col, width) in ub_rows {
        let mut row = vec![Rational::zero(); n_struct];
        row[col] = Rational::from_integer(1.into());
        raw.push((row, Relation::Le, width));
    }

    let n_slack = raw.iter().filter(|r| r.1 != Relation::Eq).count();
    let m = raw.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs_out = Vec::with_capacity(m);
    let mut basis = vec![usize::MAX; m];
    let mut signs = Vec::with_capacity(m);
    let mut slack_col = n_struct;
    let mut needs_artificial = Vec::new();
    for (r, (coeffs, rel, rhs)) in raw.into_iter().enumerate() {
        let mut row = coeffs;
        row.resize(n_struct + n_slack, Rational::zero());
        let slack = match rel {
            Relation::Le => {
                row[slack_col] = Rational::from_integer(1.into());
                slack_col += 1;
                Some(slack_col - 1)
            }
            Relation::Ge => {
                row[slack_col] = Rational::from_integer((-1).into());
                slack_col += 1;
                Some(slack_col - 1)
            }
            Relation::Eq => None,
        };
        let flip = rhs.is_negative();
        let (row, rhs) = if flip {
            (row.into_iter().map(|v| -v).collect::<Vec<_>>(), -rhs)
        } else {
            (row, rhs)
        };
        match slack {
            Some(s) if row[s].is_positive() => basis[r] = s,
            _ => needs_artificial.push(r),
        }
        signs.push(flip);
        rows.push(row);
        rhs_out.push(rhs);
    }
    let n_real = n_struct + n_slack;
    let total = n_real + needs_artificial.len();
    for row in rows.iter_mut() {
        row.resize(total, Rational::zero());
    }
    for (k, &r) in needs_artificial.iter().enumerate() {
        rows[r][n_real + k] = Rational::from_integer(1.into());
        basis[r] = n_real + k;
    }
    costs.resize(total, Rational::zero());

    let row_of = (0..lp.constraints.len()).map(|i| (i, signs[i])).collect();
    StandardForm {
        rows,
        rhs: rhs_out,
        costs,
        maps,
        row_of,
        n_real,
        artificial_rows: needs_artificial,
        basis,
    }
}

struct Tableau {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    /// Original rows still present after dropping redundant equalities.
    kept: Vec<usize>,
    pivots: usize,
    max_pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.max_pivots {
            return Err(Error::Capacity { pivots: self.max_pivots });
        }
        let p = self.a[r][e].clone();
        if !num_traits::One::is_one(&p) {
            for v in self.a[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.b[r] /= &p;
        }
        let pivot_row = self.a[r].clone();
        let pivot_rhs = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let f = self.a[i][e].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pr) in self.a[i].iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= &f * pr;
                }
            }
            self.b[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = e;
        Ok(())
    }

    fn reduced_costs(&self, costs: &[Rational], allowed: usize) -> Vec<Rational> {
        let mut d: Vec<Rational> = costs[..allowed].to_vec();
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = &costs[bv];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let a = &self.a[r][j];
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Minimizes `costs` using columns `< allowed` as entering candidates.
    fn run(&mut self, costs: &[Rational], allowed: usize) -> Result<PhaseEnd> {
        loop {
            let d = self.reduced_costs(costs, allowed);
            let Some(e) = d.iter().position(|v| v.is_negative()) else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.a.len() {
                let a = &self.a[r][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.b[r] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                None => return Ok(PhaseEnd::Unbounded(e)),
                Some((r, _)) => self.pivot(r, e)?,
            }
        }
    }
}

/// Solves `B^T w = c_B` exactly; `B` is square and nonsingular.
fn solve_transposed(columns: &[Vec<Rational>], rhs: &[Rational]) -> Vec<Rational> {
    // rows of B^T are the basic columns
    let m = rhs.len();
    let mut mat: Vec<Vec<Rational>> = columns.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..m {
        let p = (col..m)
            .find(|&r| !mat[r][col].is_zero())
            .expect("basis matrix is nonsingular");
        mat.swap(col, p);
        b.swap(col, p);
        let pv = mat[col][col].clone();
        for v in mat[col].iter_mut() {
            *v /= &pv;
        }
        b[col] /= &pv;
        for r in 0..m {
            if r != col && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                let (src, dst) = if r < col {
                    let (lo, hi) = mat.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = mat.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    if !s.is_zero() {
                        *d -= &f * s;
                    }
                }
                let bc = b[col].clone();
                b[r] -= &f * bc;
            }
        }
    }
    b
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    solve_with_limit(lp, DEFAULT_MAX_PIVOTS)
}

pub fn solve_with_limit(lp: &LinearProgram, max_pivots: usize) -> Result<LpOutcome> {
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != lp.num_vars() {
            return Err(Error::ShapeMismatch(format!(
                "constraint {i} has {} coefficients for {} variables",
                c.coeffs.len(),
                lp.num_vars()
            )));
        }
    }
    if lp.bounds.len() != lp.num_vars() {
        return Err(Error::ShapeMismatch("bounds length differs from objective".into()));
    }

    let sf = standard_form(lp);
    let total = sf.costs.len();
    let mut tab = Tableau {
        a: sf.rows.clone(),
        b: sf.rhs.clone(),
        basis: sf.basis.clone(),
        kept: (0..sf.rows.len()).collect(),
        pivots: 0,
        max_pivots,
    };

    if total > sf.n_real {
        let mut phase1 = vec![Rational::zero(); total];
        for c in phase1.iter_mut().skip(sf.n_real) {
            *c = Rational::from_integer(1.into());
        }
        tab.run(&phase1, total)?;
        let infeasibility: Rational = tab
            .basis
            .iter()
            .zip(&tab.b)
            .filter(|(&bv, _)| bv >= sf.n_real)
            .map(|(_, v)| v.clone())
            .sum();
        if infeasibility.is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        // drive remaining artificials out; drop rows that are redundant
        let mut r = 0;
        while r < tab.a.len() {
            if tab.basis[r] >= sf.n_real {
                match (0..sf.n_real).find(|&j| !tab.a[r][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(r, j)?;
                        r += 1;
                    }
                    None => {
                        // the original row owning this artificial is a
                        // combination of the others
                        let owner = sf.artificial_rows[tab.basis[r] - sf.n_real];
                        tab.kept.retain(|&k| k != owner);
                        tab.a.remove(r);
                        tab.b.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let ncols = sf.n_real;
    let primal_std = |tab: &Tableau| {
        let mut x = vec![Rational::zero(); ncols];
        for (r, &bv) in tab.basis.iter().enumerate() {
            x[bv] = tab.b[r].clone();
        }
        x
    };
    let to_original = |xs: &[Rational], homogeneous: bool| -> Vec<Rational> {
        sf.maps
            .iter()
            .map(|m| match m {
                VarMap::Shift { col, offset } => {
                    if homogeneous {
                        xs[*col].clone()
                    } else {
                        offset + &xs[*col]
                    }
                }
                VarMap::Mirror { col, offset } => {
                    if homogeneous {
                        -xs[*col].clone()
                    } else {
                        offset - &xs[*col]
                    }
                }
                VarMap::Split { pos, neg } => &xs[*pos] - &xs[*neg],
            })
            .collect()
    };

    match tab.run(&sf.costs, ncols)? {
        PhaseEnd::Unbounded(e) => {
            let mut d = vec![Rational::zero(); ncols];
            d[e] = Rational::from_integer(1.into());
            for (r, &bv) in tab.basis.iter().enumerate() {
                d[bv] = -tab.a[r][e].clone();
            }
            Ok(LpOutcome::Unbounded {
                ray: to_original(&d, true),
            })
        }
        PhaseEnd::Optimal => {
            let x = to_original(&primal_std(&tab), false);
            let value = dot(&lp.objective, &x);

            let columns: Vec<Vec<Rational>> = tab
                .basis
                .iter()
                .map(|&bv| tab.kept.iter().map(|&r| sf.rows[r][bv].clone()).collect())
                .collect();
            let cb: Vec<Rational> = tab.basis.iter().map(|&bv| sf.costs[bv].clone()).collect();
            let w = solve_transposed(&columns, &cb);
            let mut w_full = vec![Rational::zero(); sf.rows.len()];
            for (k, &r) in tab.kept.iter().enumerate() {
                w_full[r] = w[k].clone();
            }
            let negate = lp.sense == Sense::Maximize;
            let duals: Vec<Rational> = sf
                .row_of
                .iter()
                .map(|&(r, flipped)| {
                    let mut y = w_full[r].clone();
                    if flipped {
                        y = -y;
                    }
                    if negate {
                        y = -y;
                    }
                    y
                })
                .collect();
            let reduced_costs = (0..lp.num_vars())
                .map(|j| {
                    let ay: Rational = lp
                        .constraints
                        .iter()
                        .zip(&duals)
                        .map(|(c, y)| &c.coeffs[j] * y)
                        .sum();
                    &lp.objective[j] - ay
                })
                .collect();
            Ok(LpOutcome::Optimal(Solution {
                value,
                primal: x,
                duals,
                reduced_costs,
            }))
        }
    }
}

/// Exact optimality certificate: primal feasibility, dual sign conditions,
/// bound compatibility of reduced costs, and equal objective values.
pub fn check_optimality(lp: &LinearProgram, sol: &Solution) -> std::result::Result<(), String> {
    if !lp.is_feasible(&sol.primal) {
        return Err("primal point infeasible".into());
    }
    if dot(&lp.objective, &sol.primal) != sol.value {
        return Err("reported value differs from c·x".into());
    }
    let flip = lp.sense == Sense::Maximize;
    let sgn = |v: &Rational| if flip { -v.clone() } else { v.clone() };
    let mut dual_value = Rational::zero();
    for (i, (c, y)) in lp.constraints.iter().zip(&sol.duals).enumerate() {
        let y = sgn(y);
        let ok = match c.relation {
            Relation::Ge => !y.is_negative(),
            Relation::Le => !y.is_positive(),
            Relation::Eq => true,
        };
        if !ok {
            return Err(format!("dual multiplier {i} has the wrong sign"));
        }
        dual_value += &c.rhs * &y;
    }
    for j in 0..lp.num_vars() {
        let ay: Rational = lp
            .constraints
            .iter()
            .zip(&sol.duals)
            .map(|(c, y)| &c.coeffs[j] * y)
            .sum();
        if &lp.objective[j] - ay != sol.reduced_costs[j] {
            return Err(format!("reduced cost {j} inconsistent"));
        }
        let r = sgn(&sol.reduced_costs[j]);
        let b = &lp.bounds[j];
        if r.is_positive() {
            match &b.lower {
                Some(l) => dual_value += &r * l,
                None => return Err(format!("variable {j} unbounded below with positive reduced cost")),
            }
        } else if r.is_negative() {
            match &b.upper {
                Some(u) => dual_value += &r * u,
                None => return Err(format!("variable {j} unbounded above with negative reduced cost")),
            }
        }
    }
    if dual_value != sgn(&sol.value) {
        return Err("dual objective differs from primal objective".into());
    }
    Ok(())
}

/// Checks that `ray` is a recession direction improving the objective.
pub fn check_ray(lp: &LinearProgram, ray: &[Rational]) -> bool {
    let gain = dot(&lp.objective, ray);
    let improving = match lp.sense {
        Sense::Minimize => gain.is_negative(),
        Sense::Maximize => gain.is_positive(),
    };
    improving
        && lp.constraints.iter().all(|c| {
            let v = dot(&c.coeffs, ray);
            match c.relation {
                Relation::Le => !v.is_positive(),
                Relation::Eq => v.is_zero(),
                Relation::Ge => !v.is_negative(),
            }
        })
        && lp.bounds.iter().zip(ray).all(|(b, d)| {
            (b.lower.is_none() || !d.is_negative()) && (b.upper.is_none() || !d.is_positive())
        })
}

/// A point of `{x : rows}` satisfying the rows listed in `strict` with strict
/// inequality, found by maximizing a common slack `t ≤ 1`. Variables are free.
/// Returns `None` when the best slack is not positive or the rows are infeasible.
pub fn strictly_feasible_point(
    num_vars: usize,
    constraints: &[Constraint],
    strict: &[usize],
) -> Result<Option<Vec<Rational>>> {
    let n = num_vars + 1;
    let mut objective = vec![Rational::zero(); n];
    objective[num_vars] = Rational::from_integer(1.into());
    let mut lp = LinearProgram::maximize(objective);
    lp.set_bounds(num_vars, None, Some(Rational::from_integer(1.into())));
    for (i, c) in constraints.iter().enumerate() {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(Rational::zero());
        if strict.contains(&i) {
            coeffs[num_vars] = match c.relation {
                Relation::Ge => Rational::from_integer((-1).into()),
                Relation::Le => Rational::from_integer(1.into()),
                Relation::Eq => {
                    return Err(Error::ShapeMismatch(format!(
                        "equality row {i} cannot be strict"
                    )))
                }
            };
        }
        lp.constrain(coeffs, c.relation, c.rhs.clone());
    }
    match solve(&lp)? {
        LpOutcome::Optimal(sol) => {
            let slack = &sol.primal[num_vars];
            if strict.is_empty() || slack.is_positive() {
                Ok(Some(sol.primal[..num_vars].to_vec()))
            } else {
                Ok(None)
            }
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded { .. } => unreachable!("slack is bounded above"),
    }
}
