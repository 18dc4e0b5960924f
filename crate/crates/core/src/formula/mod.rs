//! Terms and formulas over a multi-sorted language, with capture-avoiding
//! substitution, sort checking, and an s-expression text syntax.
//!
//! Formulas are immutable trees; every transformation returns a new tree.

mod sorts;
mod subst;
mod text;

pub use sorts::{term_sort, well_sorted, Diagnostic};
pub use subst::{rename_bound, FreshNames};
pub use text::{parse_formula, parse_term, ParseError};

use crate::fpalg::RatFunc;
use crate::signature::Sort;
use num_rational::Rational64;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("sort mismatch substituting {from} ↦ {to}")]
    SortMismatch { from: String, to: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("ill-sorted formula: {0}")]
    IllSorted(String),
}

/// A variable: a name together with its sort. Variables with equal names but
/// different sorts are distinct.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: &Sort) -> Self {
        Var { name: name.into(), sort: sort.clone() }
    }

    pub fn field(name: &str) -> Self {
        Var::new(name, &Sort::field())
    }

    pub fn term(&self) -> Term {
        Term::Var(self.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A constant of a lazily presented field `k₀`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Literal {
    Rational(Rational64),
    RatFunc(RatFunc),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Rational(q) => write!(f, "{{{q}}}"),
            Literal::RatFunc(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Var),
    Const(String),
    App(String, Vec<Term>),
    Lit(Literal),
}

/// Builders; `add`/`sub`/`mul` construct terms rather than evaluate.
#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(name: &str, sort: &Sort) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.into())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.into(), args)
    }

    pub fn zero() -> Term {
        Term::constant("0")
    }

    pub fn one() -> Term {
        Term::constant("1")
    }

    pub fn add(self, rhs: Term) -> Term {
        Term::app("+", vec![self, rhs])
    }

    pub fn sub(self, rhs: Term) -> Term {
        Term::app("-", vec![self, rhs])
    }

    pub fn mul(self, rhs: Term) -> Term {
        Term::app("*", vec![self, rhs])
    }

    /// `self · self · … · self` (left-associated); `t^0 = 1`.
    pub fn pow(self, e: u64) -> Term {
        if e == 0 {
            return Term::one();
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self.clone());
        }
        acc
    }

    /// Left-associated sum; the empty sum is `0`.
    pub fn sum(terms: impl IntoIterator<Item = Term>) -> Term {
        terms.into_iter().reduce(Term::add).unwrap_or_else(Term::zero)
    }

    /// Left-associated product; the empty product is `1`.
    pub fn product(terms: impl IntoIterator<Item = Term>) -> Term {
        terms.into_iter().reduce(Term::mul).unwrap_or_else(Term::one)
    }

    /// `1 + 1 + … + 1`.
    pub fn numeral(n: u64) -> Term {
        match n {
            0 => Term::zero(),
            _ => Term::sum((0..n).map(|_| Term::one())),
        }
    }

    pub fn eq(self, rhs: Term) -> Formula {
        Formula::Eq(self, rhs)
    }

    pub fn ne(self, rhs: Term) -> Formula {
        Formula::Eq(self, rhs).not()
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn mentions_constant(&self, c: &str) -> bool {
        match self {
            Term::Const(d) => d == c,
            Term::App(_, args) => args.iter().any(|a| a.mentions_constant(c)),
            _ => false,
        }
    }

    /// Replaces every occurrence of constant `c` by `t`.
    pub fn replace_constant(&self, c: &str, t: &Term) -> Term {
        match self {
            Term::Const(d) if d == c => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.replace_constant(c, t)).collect()),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Top,
    Bot,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn rel(r: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(r.into(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    /// Right-nested conjunction; the empty conjunction is `⊤`.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let v: Vec<Formula> = items.into_iter().collect();
        v.into_iter().rev().reduce(|acc, f| f.and(acc)).unwrap_or(Formula::Top)
    }

    /// Right-nested disjunction; the empty disjunction is `⊥`.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let v: Vec<Formula> = items.into_iter().collect();
        v.into_iter().rev().reduce(|acc, f| f.or(acc)).unwrap_or(Formula::Bot)
    }

    pub fn quant(q: Quantifier, v: Var, body: Formula) -> Formula {
        match q {
            Quantifier::Forall => Formula::Forall(v, Box::new(body)),
            Quantifier::Exists => Formula::Exists(v, Box::new(body)),
        }
    }

    /// `Q v₁ … Q vₙ body` with `v₁` outermost.
    pub fn quant_block(q: Quantifier, vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vs: Vec<Var> = vars.into_iter().collect();
        vs.into_iter().rev().fold(body, |acc, v| Formula::quant(q, v, acc))
    }

    pub fn forall(vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        Self::quant_block(Quantifier::Forall, vars, body)
    }

    pub fn exists(vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        Self::quant_block(Quantifier::Exists, vars, body)
    }

    /// `Some((Q, x, ψ))` if the formula is `Q x ψ`.
    pub fn as_quant(&self) -> Option<(Quantifier, &Var, &Formula)> {
        match self {
            Formula::Forall(v, b) => Some((Quantifier::Forall, v, b)),
            Formula::Exists(v, b) => Some((Quantifier::Exists, v, b)),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Top | Formula::Bot | Formula::Eq(..) | Formula::Rel(..))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Forall(..) | Formula::Exists(..) => false,
            _ => true,
        }
    }

    /// Number of formula and term nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot => 1,
            Formula::Eq(a, b) => 1 + a.size() + b.size(),
            Formula::Rel(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.size(),
        }
    }

    /// Number of quantifier nodes.
    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Not(a) => a.quantifier_count(),
            Formula::And(a, b) | Formula::Or(a, b) => a.quantifier_count() + b.quantifier_count(),
            Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.quantifier_count(),
            _ => 0,
        }
    }

    pub fn free_variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add_term = |t: &Term, bound: &Vec<Var>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Eq(a, b) => {
                add_term(a, bound);
                add_term(b, bound);
            }
            Formula::Rel(_, args) => args.iter().for_each(|a| add_term(a, bound)),
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Names of all variables, free or bound.
    pub fn variable_names(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.name.clone());
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        let term = |t: &Term, f: &mut dyn FnMut(&Var)| {
            for v in t.vars() {
                f(&v);
            }
        };
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Eq(a, b) => {
                term(a, f);
                term(b, f);
            }
            Formula::Rel(_, args) => args.iter().for_each(|a| term(a, f)),
            Formula::Not(a) => a.visit_vars(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                f(v);
                a.visit_vars(f);
            }
        }
    }

    pub fn mentions_constant(&self, c: &str) -> bool {
        match self {
            Formula::Top | Formula::Bot => false,
            Formula::Eq(a, b) => a.mentions_constant(c) || b.mentions_constant(c),
            Formula::Rel(_, args) => args.iter().any(|a| a.mentions_constant(c)),
            Formula::Not(a) => a.mentions_constant(c),
            Formula::And(a, b) | Formula::Or(a, b) => a.mentions_constant(c) || b.mentions_constant(c),
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.mentions_constant(c),
        }
    }

    /// Replaces a constant symbol by a term. The term's variables must not be
    /// bound anywhere in `self` (callers pick fresh variables).
    pub fn replace_constant(&self, c: &str, t: &Term) -> Formula {
        self.map_terms(&|u| u.replace_constant(c, t))
    }

    fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Eq(a, b) => Formula::Eq(f(a), f(b)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(f).collect()),
            Formula::Not(a) => a.map_terms(f).not(),
            Formula::And(a, b) => a.map_terms(f).and(b.map_terms(f)),
            Formula::Or(a, b) => a.map_terms(f).or(b.map_terms(f)),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.map_terms(f))),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.map_terms(f))),
        }
    }

    /// Capture-avoiding substitution of variables for free variables.
    /// Entries for variables that are not free are ignored.
    pub fn substitute(&self, map: &BTreeMap<Var, Var>) -> Result<Formula, FormulaError> {
        for (from, to) in map {
            if from.sort != to.sort {
                return Err(FormulaError::SortMismatch {
                    from: format!("{}:{}", from.name, from.sort),
                    to: format!("{}:{}", to.name, to.sort),
                });
            }
        }
        let terms = map.iter().map(|(k, v)| (k.clone(), v.term())).collect();
        Ok(self.substitute_terms(&terms))
    }

    /// Capture-avoiding substitution of terms for free variables. Sorts are
    /// not checked.
    pub fn substitute_terms(&self, map: &BTreeMap<Var, Term>) -> Formula {
        subst::substitute(self, map)
    }

    /// `self(x ↦ t)` for a single variable.
    pub fn instantiate(&self, x: &Var, t: Term) -> Formula {
        let mut m = BTreeMap::new();
        m.insert(x.clone(), t);
        self.substitute_terms(&m)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_formula(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_term(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::field("x")
    }

    #[test]
    fn free_variables_respect_binders() {
        let f = Formula::exists([Var::field("y")], x().term().mul(Var::field("y").term()).eq(Term::one()));
        assert_eq!(f.free_variables(), [x()].into_iter().collect());
        assert!(!f.is_sentence());
        assert_eq!(f.quantifier_count(), 1);
    }

    #[test]
    fn conj_and_disj_shapes() {
        assert_eq!(Formula::conj([]), Formula::Top);
        assert_eq!(Formula::disj([]), Formula::Bot);
        let a = Formula::Top;
        let b = Formula::Bot;
        assert_eq!(Formula::conj([a.clone(), b.clone(), a.clone()]), a.clone().and(b.and(a)));
    }

    #[test]
    fn pow_is_left_associated_product() {
        let t = x().term().pow(3);
        assert_eq!(t, x().term().mul(x().term()).mul(x().term()));
        assert_eq!(x().term().pow(0), Term::one());
    }

    #[test]
    fn sort_mismatch_in_substitution() {
        let f = x().term().eq(x().term());
        let mut m = BTreeMap::new();
        m.insert(x(), Var::new("g", &Sort::new("group")));
        assert!(matches!(f.substitute(&m), Err(FormulaError::SortMismatch { .. })));
    }
}
