//! Finite multi-sorted structures, brute-force Tarskian evaluation, and
//! embedding enumeration.
//!
//! Elements of a sort of size `n` are `0..n`. Quantifiers range over carriers
//! in ascending order and short-circuit. Evaluation runs under a node budget.

mod build;
mod embed;
mod file;

pub use build::{
    disjoint_union, example_sentence, finite_field, gamma2, gamma3, gamma4, modular_ring, named_structure,
    tournament_models, trivially_valued_field,
};
pub use embed::{embeddings, Embedding};
pub use file::StructureFile;

use crate::formula::{well_sorted, Formula, Literal, Term, Var};
use crate::fpalg::{inv_mod, is_prime};
use crate::signature::{Language, SymbolKind};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error("value {value} of `{var}` is outside its carrier")]
    OutOfRange { var: String, value: u32 },
    #[error("symbol `{0}` is not interpreted")]
    Uninterpreted(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("ill-sorted formula: {0}")]
    IllSorted(String),
    #[error("evaluation budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("literal {0} has no interpretation in this structure")]
    Literal(String),
    #[error("structures have different languages")]
    LanguageMismatch,
    #[error("invalid structure: {0}")]
    Invalid(String),
}

/// Default evaluation budget (formula nodes visited).
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug)]
enum Interp {
    Function(Vec<u32>),
    Relation(Vec<bool>),
    Constant(u32),
}

/// A finite structure for a language. Every symbol must be interpreted.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    lang: Language,
    sizes: Vec<usize>,
    interp: Vec<Option<Interp>>,
    literal_modulus: Option<u64>,
}

impl FiniteStructure {
    /// A structure with the given carrier sizes (indexed like `lang.sorts()`)
    /// and no interpretations yet.
    pub fn new(lang: &Language, sizes: Vec<usize>) -> Result<Self, ModelError> {
        if sizes.len() != lang.sorts().len() {
            return Err(ModelError::Invalid("one carrier size per sort is required".into()));
        }
        if sizes.iter().any(|&n| n == 0 || n > u32::MAX as usize) {
            return Err(ModelError::Invalid("carriers must be nonempty".into()));
        }
        Ok(FiniteStructure {
            lang: lang.clone(),
            sizes,
            interp: vec![None; lang.symbols().len()],
            literal_modulus: None,
        })
    }

    pub fn language(&self) -> &Language {
        &self.lang
    }

    pub fn carrier_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size_of(&self, sort: &crate::signature::Sort) -> Option<usize> {
        self.lang.sort_index(sort).map(|i| self.sizes[i])
    }

    fn symbol_dims(&self, name: &str) -> Result<(usize, Vec<usize>, Option<usize>), ModelError> {
        let i = self.lang.symbol_index(name).ok_or_else(|| ModelError::UnknownSymbol(name.into()))?;
        let sym = &self.lang.symbols()[i];
        let dims = sym.args.iter().map(|s| self.sizes[self.lang.sort_index(s).expect("sort")]).collect();
        let res = sym.result.as_ref().map(|s| self.sizes[self.lang.sort_index(s).expect("sort")]);
        Ok((i, dims, res))
    }

    /// Interprets a function symbol by a closure over argument tuples.
    pub fn set_function(&mut self, name: &str, f: impl Fn(&[u32]) -> u32) -> Result<(), ModelError> {
        let (i, dims, res) = self.symbol_dims(name)?;
        if self.lang.symbols()[i].kind != SymbolKind::Function {
            return Err(ModelError::Invalid(format!("`{name}` is not a function")));
        }
        let res = res.expect("functions have results");
        let mut table = Vec::new();
        for args in tuples(&dims) {
            let v = f(&args);
            if v as usize >= res {
                return Err(ModelError::Invalid(format!("`{name}` leaves its carrier")));
            }
            table.push(v);
        }
        self.interp[i] = Some(Interp::Function(table));
        Ok(())
    }

    pub fn set_relation(&mut self, name: &str, r: impl Fn(&[u32]) -> bool) -> Result<(), ModelError> {
        let (i, dims, _) = self.symbol_dims(name)?;
        if self.lang.symbols()[i].kind != SymbolKind::Relation {
            return Err(ModelError::Invalid(format!("`{name}` is not a relation")));
        }
        self.interp[i] = Some(Interp::Relation(tuples(&dims).map(|a| r(&a)).collect()));
        Ok(())
    }

    pub fn set_constant(&mut self, name: &str, value: u32) -> Result<(), ModelError> {
        let (i, _, res) = self.symbol_dims(name)?;
        if self.lang.symbols()[i].kind != SymbolKind::Constant {
            return Err(ModelError::Invalid(format!("`{name}` is not a constant")));
        }
        if value as usize >= res.expect("constants have sorts") {
            return Err(ModelError::Invalid(format!("`{name}` leaves its carrier")));
        }
        self.interp[i] = Some(Interp::Constant(value));
        Ok(())
    }

    /// Interprets rational literals `a/b` as `a·b⁻¹ mod m` (and constant
    /// 𝔽_m literals as themselves) in a ring with prime subring `ℤ/m`.
    pub fn set_literal_modulus(&mut self, m: u64) {
        self.literal_modulus = Some(m);
    }

    /// Errors if some symbol is uninterpreted.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, s) in self.lang.symbols().iter().enumerate() {
            if self.interp[i].is_none() {
                return Err(ModelError::Uninterpreted(s.name.clone()));
            }
        }
        Ok(())
    }

    pub fn function_value(&self, name: &str, args: &[u32]) -> Option<u32> {
        let i = self.lang.symbol_index(name)?;
        match self.interp[i].as_ref()? {
            Interp::Function(t) => Some(t[self.offset(i, args)]),
            Interp::Constant(c) if args.is_empty() => Some(*c),
            _ => None,
        }
    }

    pub fn holds(&self, name: &str, args: &[u32]) -> Option<bool> {
        let i = self.lang.symbol_index(name)?;
        match self.interp[i].as_ref()? {
            Interp::Relation(t) => Some(t[self.offset(i, args)]),
            _ => None,
        }
    }

    fn offset(&self, sym: usize, args: &[u32]) -> usize {
        let s = &self.lang.symbols()[sym];
        let mut off = 0;
        for (a, sort) in args.iter().zip(&s.args) {
            off = off * self.sizes[self.lang.sort_index(sort).expect("sort")] + *a as usize;
        }
        off
    }

    fn literal_value(&self, l: &Literal) -> Result<u32, ModelError> {
        let bad = || ModelError::Literal(l.to_string());
        let m = self.literal_modulus.ok_or_else(bad)?;
        match l {
            Literal::Rational(q) => {
                let num = q.numer().rem_euclid(m as i64) as u64;
                let den = q.denom().rem_euclid(m as i64) as u64;
                if !is_prime(m) && den != 1 {
                    return Err(bad());
                }
                if den == 0 {
                    return Err(bad());
                }
                Ok((num * inv_mod(den, m) % m) as u32)
            }
            Literal::RatFunc(f) if f.characteristic() == m && f.height() == 0 => Ok(f.numerator().coeff(0) as u32),
            _ => Err(bad()),
        }
    }
}

/// All argument tuples in row-major order.
fn tuples(dims: &[usize]) -> impl Iterator<Item = Vec<u32>> + '_ {
    let total: usize = dims.iter().product();
    (0..total).map(move |mut k| {
        let mut v = vec![0u32; dims.len()];
        for (i, &d) in dims.iter().enumerate().rev() {
            v[i] = (k % d) as u32;
            k /= d;
        }
        v
    })
}

enum CTerm {
    Slot(usize),
    Value(u32),
    App(usize, Vec<CTerm>),
}

enum CForm {
    Const(bool),
    Eq(CTerm, CTerm),
    Rel(usize, Vec<CTerm>),
    Not(Box<CForm>),
    And(Box<CForm>, Box<CForm>),
    Or(Box<CForm>, Box<CForm>),
    Quant { exists: bool, slot: usize, size: u32, body: Box<CForm> },
}

struct Compiler<'a> {
    s: &'a FiniteStructure,
    scope: Vec<(Var, usize)>,
    next: usize,
}

impl Compiler<'_> {
    fn term(&self, t: &Term) -> Result<CTerm, ModelError> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|(_, slot)| CTerm::Slot(*slot))
                .ok_or_else(|| ModelError::Unassigned(v.name.clone())),
            Term::Const(c) => {
                let i = self.s.lang.symbol_index(c).ok_or_else(|| ModelError::UnknownSymbol(c.clone()))?;
                match &self.s.interp[i] {
                    Some(Interp::Constant(v)) => Ok(CTerm::Value(*v)),
                    _ => Err(ModelError::Uninterpreted(c.clone())),
                }
            }
            Term::Lit(l) => Ok(CTerm::Value(self.s.literal_value(l)?)),
            Term::App(f, args) => {
                let i = self.s.lang.symbol_index(f).ok_or_else(|| ModelError::UnknownSymbol(f.clone()))?;
                if !matches!(self.s.interp[i], Some(Interp::Function(_))) {
                    return Err(ModelError::Uninterpreted(f.clone()));
                }
                Ok(CTerm::App(i, args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?))
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<CForm, ModelError> {
        Ok(match f {
            Formula::Top => CForm::Const(true),
            Formula::Bot => CForm::Const(false),
            Formula::Eq(a, b) => CForm::Eq(self.term(a)?, self.term(b)?),
            Formula::Rel(r, args) => {
                let i = self.s.lang.symbol_index(r).ok_or_else(|| ModelError::UnknownSymbol(r.clone()))?;
                if !matches!(self.s.interp[i], Some(Interp::Relation(_))) {
                    return Err(ModelError::Uninterpreted(r.clone()));
                }
                CForm::Rel(i, args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?)
            }
            Formula::Not(a) => CForm::Not(Box::new(self.formula(a)?)),
            Formula::And(a, b) => CForm::And(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Or(a, b) => CForm::Or(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let size = self.s.size_of(&x.sort).ok_or_else(|| ModelError::IllSorted(x.sort.to_string()))? as u32;
                let slot = self.next;
                self.next += 1;
                self.scope.push((x.clone(), slot));
                let body = self.formula(a);
                self.scope.pop();
                CForm::Quant { exists: matches!(f, Formula::Exists(..)), slot, size, body: Box::new(body?) }
            }
        })
    }
}

struct Evaluator<'a> {
    s: &'a FiniteStructure,
    env: Vec<u32>,
    budget: u64,
    spent: u64,
}

impl Evaluator<'_> {
    fn term(&self, t: &CTerm) -> u32 {
        match t {
            CTerm::Slot(i) => self.env[*i],
            CTerm::Value(v) => *v,
            CTerm::App(f, args) => {
                let vals: Vec<u32> = args.iter().map(|a| self.term(a)).collect();
                match &self.s.interp[*f] {
                    Some(Interp::Function(table)) => table[self.s.offset(*f, &vals)],
                    _ => unreachable!("checked at compile time"),
                }
            }
        }
    }

    fn formula(&mut self, f: &CForm) -> Result<bool, ModelError> {
        self.spent += 1;
        if self.spent > self.budget {
            return Err(ModelError::BudgetExceeded(self.budget));
        }
        Ok(match f {
            CForm::Const(b) => *b,
            CForm::Eq(a, b) => self.term(a) == self.term(b),
            CForm::Rel(r, args) => {
                let vals: Vec<u32> = args.iter().map(|a| self.term(a)).collect();
                match &self.s.interp[*r] {
                    Some(Interp::Relation(table)) => table[self.s.offset(*r, &vals)],
                    _ => unreachable!("checked at compile time"),
                }
            }
            CForm::Not(a) => !self.formula(a)?,
            CForm::And(a, b) => self.formula(a)? && self.formula(b)?,
            CForm::Or(a, b) => self.formula(a)? || self.formula(b)?,
            CForm::Quant { exists, slot, size, body } => {
                for e in 0..*size {
                    self.env[*slot] = e;
                    if self.formula(body)? == *exists {
                        return Ok(*exists);
                    }
                }
                !*exists
            }
        })
    }
}

/// Truth of `f` in `s` under `assignment` (which must cover the free
/// variables), with the default budget.
pub fn eval(s: &FiniteStructure, f: &Formula, assignment: &BTreeMap<Var, u32>) -> Result<bool, ModelError> {
    eval_with_budget(s, f, assignment, DEFAULT_BUDGET)
}

pub fn eval_with_budget(
    s: &FiniteStructure,
    f: &Formula,
    assignment: &BTreeMap<Var, u32>,
    budget: u64,
) -> Result<bool, ModelError> {
    let d = well_sorted(&s.lang, f);
    if let Some(first) = d.first() {
        return Err(ModelError::IllSorted(first.to_string()));
    }
    let free = f.free_variables();
    let mut c = Compiler { s, scope: Vec::new(), next: 0 };
    let mut env = Vec::new();
    for v in &free {
        let val = *assignment.get(v).ok_or_else(|| ModelError::Unassigned(v.name.clone()))?;
        if val as usize >= s.size_of(&v.sort).unwrap_or(0) {
            return Err(ModelError::OutOfRange { var: v.name.clone(), value: val });
        }
        c.scope.push((v.clone(), c.next));
        c.next += 1;
        env.push(val);
    }
    let compiled = c.formula(f)?;
    env.resize(c.next, 0);
    Evaluator { s, env, budget, spent: 0 }.formula(&compiled)
}

/// Every assignment of the given variables, in lexicographic order.
pub fn all_assignments(s: &FiniteStructure, vars: &[Var]) -> Vec<BTreeMap<Var, u32>> {
    let dims: Vec<usize> = vars.iter().map(|v| s.size_of(&v.sort).unwrap_or(0)).collect();
    tuples(&dims).map(|vals| vars.iter().cloned().zip(vals).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::signature::ring;

    #[test]
    fn squares_mod_three() {
        let z3 = modular_ring(3).unwrap();
        let r = ring();
        let f = parse_formula(&r, "(exists (x field) (= (* x x) 2))").unwrap();
        assert_eq!(eval(&z3, &f, &BTreeMap::new()), Ok(false));
        let g = parse_formula(&r, "(exists (x field) (= (* x x) 1))").unwrap();
        assert_eq!(eval(&z3, &g, &BTreeMap::new()), Ok(true));
    }

    #[test]
    fn free_variables_must_be_assigned() {
        let z3 = modular_ring(3).unwrap();
        let f = parse_formula(&ring(), "(= x 1)").unwrap();
        assert_eq!(eval(&z3, &f, &BTreeMap::new()), Err(ModelError::Unassigned("x".into())));
        let mut a = BTreeMap::new();
        a.insert(Var::field("x"), 1);
        assert_eq!(eval(&z3, &f, &a), Ok(true));
        a.insert(Var::field("x"), 7);
        assert!(matches!(eval(&z3, &f, &a), Err(ModelError::OutOfRange { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let z3 = modular_ring(3).unwrap();
        let f = parse_formula(&ring(), "(forall (x field) (forall (y field) (= (+ x y) (+ y x))))").unwrap();
        assert_eq!(eval_with_budget(&z3, &f, &BTreeMap::new(), 5), Err(ModelError::BudgetExceeded(5)));
        assert_eq!(eval(&z3, &f, &BTreeMap::new()), Ok(true));
    }

    #[test]
    fn rational_literals_mod_p() {
        let q = ring().with_literals(crate::signature::LiteralDomain::Rationals, "field").unwrap();
        let mut z5 = modular_ring(5).unwrap();
        z5.lang = q.clone();
        let f = parse_formula(&q, "(= (* {1/2} 2) 1)").unwrap();
        assert_eq!(eval(&z5, &f, &BTreeMap::new()), Ok(true));
    }
}
