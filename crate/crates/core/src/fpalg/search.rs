//! Bounded witness search for existential ring formulas over 𝔽_p(s).
//!
//! Sound but incomplete: `Sat` witnesses are checked by exact evaluation of
//! the matrix; `Refuted` is reported only when every bound variable was forced
//! by a top-level equation `v = t` or `v^p + t₁ = t₂` (Frobenius is
//! injective, so the latter has at most one solution), so no search was
//! needed; everything else is `Unknown`.

use super::{FpError, RatFunc};
use crate::formula::{Formula, Literal, Quantifier, Term, Var};
use crate::fragments::{prnx, FragmentDescriptor};
use crate::signature::{ring, LiteralDomain, FIELD};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("formula is not existential")]
    NotExistential,
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error("unsupported symbol `{0}`")]
    Unsupported(String),
    #[error("ill-formed input: {0}")]
    IllFormed(String),
    #[error(transparent)]
    Arithmetic(#[from] FpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Characteristic `p`.
    pub p: u64,
    /// Largest height of a candidate witness.
    pub bound: usize,
    /// Maximum number of matrix evaluations.
    pub budget: u64,
}

impl SearchConfig {
    pub fn new(p: u64, bound: usize) -> Self {
        SearchConfig { p, bound, budget: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Values for the bound variables of the prenex form (keyed by their
    /// possibly renamed names) making the matrix true.
    Sat(BTreeMap<Var, RatFunc>),
    /// No witness exists at any height.
    Refuted,
    Unknown,
}

enum Step {
    Enumerate(Var),
    Solve(Var, Term),
    /// `v^p = rhs − Σ rest`.
    Root(Var, Vec<Term>, Term),
}

/// Searches for witnesses of the existential formula `f` under `assignment`.
/// Constants are `0`, `1`, rational literals (read in 𝔽_p) and 𝔽_p(s)
/// literals.
pub fn exists_bounded(
    f: &Formula,
    assignment: &BTreeMap<Var, RatFunc>,
    config: &SearchConfig,
) -> Result<Outcome, SearchError> {
    let lang = ring()
        .with_literals(LiteralDomain::RationalFunctions(config.p), FIELD)
        .map_err(|e| SearchError::IllFormed(e.to_string()))?;
    let pr =
        prnx(&FragmentDescriptor::quantifier_free(), &lang, f).map_err(|e| SearchError::IllFormed(e.to_string()))?;
    if pr.prefix.iter().any(|(q, _)| *q == Quantifier::Forall) {
        return Err(SearchError::NotExistential);
    }
    for v in f.free_variables() {
        if !assignment.contains_key(&v) {
            return Err(SearchError::Unassigned(v.name));
        }
    }
    let bound: Vec<Var> = pr.prefix.iter().map(|(_, x)| x.clone()).collect();
    let mut conjuncts = Vec::new();
    flatten_and(&pr.matrix, &mut conjuncts);
    let schedule = plan(config.p, &bound, &conjuncts, assignment.keys().cloned().collect());
    let mut search = Search {
        p: config.p,
        candidates: super::elements_up_to_height(config.p, config.bound),
        matrix: &pr.matrix,
        env: assignment.clone(),
        spent: 0,
        budget: config.budget,
        exhausted: false,
    };
    let enumerates = schedule.iter().any(|s| matches!(s, Step::Enumerate(_)));
    match search.run(&schedule, 0)? {
        true => Ok(Outcome::Sat(bound.iter().map(|v| (v.clone(), search.env[v].clone())).collect())),
        false if !enumerates && !search.exhausted => Ok(Outcome::Refuted),
        false => Ok(Outcome::Unknown),
    }
}

fn flatten_and<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        _ => out.push(f),
    }
}

fn summands<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
    match t {
        Term::App(f, args) if f == "+" && args.len() == 2 => {
            summands(&args[0], out);
            summands(&args[1], out);
        }
        _ => out.push(t),
    }
}

fn solve_linear(conjuncts: &[&Formula], bound: &[Var], known: &BTreeSet<Var>) -> Option<Step> {
    conjuncts.iter().find_map(|c| match c {
        Formula::Eq(a, b) => [(a, b), (b, a)].into_iter().find_map(|(l, r)| match l {
            Term::Var(v) if bound.contains(v) && !known.contains(v) && r.vars().is_subset(known) => {
                Some(Step::Solve(v.clone(), r.clone()))
            }
            _ => None,
        }),
        _ => None,
    })
}

/// An equation with a summand `v^p` where `v` occurs nowhere else and every
/// other variable is known.
fn solve_root(p: u64, conjuncts: &[&Formula], bound: &[Var], known: &BTreeSet<Var>) -> Option<Step> {
    conjuncts.iter().find_map(|c| {
        let Formula::Eq(a, b) = c else { return None };
        [(a, b), (b, a)].into_iter().find_map(|(l, r)| {
            let mut parts = Vec::new();
            summands(l, &mut parts);
            parts.iter().enumerate().find_map(|(i, t)| {
                let v = bound.iter().find(|v| !known.contains(*v) && **t == v.term().pow(p))?;
                let rest: Vec<Term> =
                    parts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, t)| (*t).clone()).collect();
                let clear = r.vars().is_subset(known) && rest.iter().all(|t| t.vars().is_subset(known));
                clear.then(|| Step::Root(v.clone(), rest, r.clone()))
            })
        })
    })
}

/// Orders the bound variables: a variable determined by a top-level equation
/// over already known variables is solved, otherwise an unknown one is
/// enumerated, preferring variables that could later be found as a `p`-th root.
fn plan(p: u64, bound: &[Var], conjuncts: &[&Formula], mut known: BTreeSet<Var>) -> Vec<Step> {
    let mut steps = Vec::new();
    while bound.iter().any(|v| !known.contains(v)) {
        let step = solve_linear(conjuncts, bound, &known).or_else(|| solve_root(p, conjuncts, bound, &known));
        let step = step.unwrap_or_else(|| {
            let unknown: Vec<&Var> = bound.iter().filter(|v| !known.contains(*v)).collect();
            let rootable = |v: &Var| {
                let mut all = known.clone();
                all.extend(bound.iter().filter(|w| *w != v).cloned());
                matches!(solve_root(p, conjuncts, bound, &all), Some(Step::Root(w, ..)) if &w == v)
            };
            let v = unknown.iter().find(|v| !rootable(v)).unwrap_or(&unknown[0]);
            Step::Enumerate((*v).clone())
        });
        let v = match &step {
            Step::Enumerate(v) | Step::Solve(v, _) | Step::Root(v, ..) => v.clone(),
        };
        known.insert(v);
        steps.push(step);
    }
    steps
}

struct Search<'a> {
    p: u64,
    candidates: Vec<RatFunc>,
    matrix: &'a Formula,
    env: BTreeMap<Var, RatFunc>,
    spent: u64,
    budget: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn run(&mut self, steps: &[Step], i: usize) -> Result<bool, SearchError> {
        let Some(step) = steps.get(i) else {
            self.spent += 1;
            if self.spent > self.budget {
                self.exhausted = true;
                return Ok(false);
            }
            return eval_formula(self.p, self.matrix, &self.env);
        };
        match step {
            Step::Solve(v, t) => {
                let val = eval_term(self.p, t, &self.env)?;
                self.env.insert(v.clone(), val);
                self.run(steps, i + 1)
            }
            Step::Root(v, rest, rhs) => {
                let mut val = eval_term(self.p, rhs, &self.env)?;
                for t in rest {
                    val = val.checked_sub(&eval_term(self.p, t, &self.env)?)?;
                }
                if !super::is_pth_power(&val) {
                    return Ok(false);
                }
                let root = super::pth_root_decompose(&val).swap_remove(0);
                self.env.insert(v.clone(), root);
                self.run(steps, i + 1)
            }
            Step::Enumerate(v) => {
                for k in 0..self.candidates.len() {
                    if self.exhausted {
                        return Ok(false);
                    }
                    self.env.insert(v.clone(), self.candidates[k].clone());
                    if self.run(steps, i + 1)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// Value of a ring term in 𝔽_p(s).
pub fn eval_term(p: u64, t: &Term, env: &BTreeMap<Var, RatFunc>) -> Result<RatFunc, SearchError> {
    Ok(match t {
        Term::Var(v) => env.get(v).cloned().ok_or_else(|| SearchError::Unassigned(v.name.clone()))?,
        Term::Const(c) if c == "0" => RatFunc::zero(p),
        Term::Const(c) if c == "1" => RatFunc::one(p),
        Term::Const(c) => return Err(SearchError::Unsupported(c.clone())),
        Term::Lit(Literal::RatFunc(f)) => {
            if f.characteristic() != p {
                return Err(FpError::CharacteristicMismatch(f.characteristic(), p).into());
            }
            f.clone()
        }
        Term::Lit(Literal::Rational(q)) => {
            let n = RatFunc::constant(p, q.numer().rem_euclid(p as i64) as u64);
            let d = RatFunc::constant(p, q.denom().rem_euclid(p as i64) as u64);
            n.checked_div(&d)?
        }
        Term::App(f, args) => {
            let vals = args.iter().map(|a| eval_term(p, a, env)).collect::<Result<Vec<_>, _>>()?;
            match (f.as_str(), vals.as_slice()) {
                ("+", [a, b]) => a.checked_add(b)?,
                ("-", [a, b]) => a.checked_sub(b)?,
                ("*", [a, b]) => a.checked_mul(b)?,
                _ => return Err(SearchError::Unsupported(f.clone())),
            }
        }
    })
}

/// Truth of a quantifier-free ring formula in 𝔽_p(s).
pub fn eval_formula(p: u64, f: &Formula, env: &BTreeMap<Var, RatFunc>) -> Result<bool, SearchError> {
    Ok(match f {
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Eq(a, b) => eval_term(p, a, env)? == eval_term(p, b, env)?,
        Formula::Not(a) => !eval_formula(p, a, env)?,
        Formula::And(a, b) => eval_formula(p, a, env)? && eval_formula(p, b, env)?,
        Formula::Or(a, b) => eval_formula(p, a, env)? || eval_formula(p, b, env)?,
        Formula::Rel(r, _) => return Err(SearchError::Unsupported(r.clone())),
        Formula::Forall(..) | Formula::Exists(..) => return Err(SearchError::NotExistential),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn lang(p: u64) -> crate::signature::Language {
        ring().with_literals(LiteralDomain::RationalFunctions(p), FIELD).unwrap()
    }

    #[test]
    fn inverse_of_s() {
        let f = parse_formula(&lang(2), "(exists (y field) (= (* y {[0,1]/[1]@2}) 1))").unwrap();
        match exists_bounded(&f, &BTreeMap::new(), &SearchConfig::new(2, 2)).unwrap() {
            Outcome::Sat(w) => assert_eq!(w[&Var::field("y")].to_string(), "{[1]/[0,1]@2}"),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn forced_equations_refute() {
        let f = parse_formula(&lang(3), "(exists (y field) (and (= y 1) (= y 0)))").unwrap();
        assert_eq!(exists_bounded(&f, &BTreeMap::new(), &SearchConfig::new(3, 2)).unwrap(), Outcome::Refuted);
    }

    #[test]
    fn frobenius_roots_are_forced() {
        let f = parse_formula(&lang(2), "(exists (y field) (= (+ (* y y) 1) {[0,1]/[1]@2}))").unwrap();
        assert_eq!(exists_bounded(&f, &BTreeMap::new(), &SearchConfig::new(2, 0)).unwrap(), Outcome::Refuted);
        let f = parse_formula(&lang(3), "(exists (y field) (= (* (* y y) y) {[0,0,0,1]/[1]@3}))").unwrap();
        match exists_bounded(&f, &BTreeMap::new(), &SearchConfig::new(3, 0)).unwrap() {
            Outcome::Sat(w) => assert_eq!(w[&Var::field("y")].to_string(), "{[0,1]/[1]@3}"),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn s_is_not_a_square() {
        let src = "(exists (l0 field) (exists (l1 field) (and (= (+ (* l0 l0) (* (* l1 l1) {[0,1]/[1]@2})) 0) \
                   (or (not (= l0 0)) (not (= l1 0))))))";
        let f = parse_formula(&lang(2), src).unwrap();
        assert_eq!(exists_bounded(&f, &BTreeMap::new(), &SearchConfig::new(2, 2)).unwrap(), Outcome::Unknown);
    }

    #[test]
    fn universal_input_is_rejected() {
        let f = parse_formula(&lang(2), "(forall (y field) (= y y))").unwrap();
        assert_eq!(exists_bounded(&f, &BTreeMap::new(), &SearchConfig::new(2, 1)), Err(SearchError::NotExistential));
    }

    #[test]
    fn budget_yields_unknown() {
        let f = parse_formula(&lang(2), "(exists (y field) (= (* y (+ y 1)) {[0,0,0,0,0,0,0,0,1]/[1]@2}))").unwrap();
        let cfg = SearchConfig { p: 2, bound: 4, budget: 3 };
        assert_eq!(exists_bounded(&f, &BTreeMap::new(), &cfg).unwrap(), Outcome::Unknown);
    }
}
