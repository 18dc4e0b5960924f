use super::{Formula, Term, Var};
use crate::signature::Sort;
use std::collections::{BTreeMap, HashSet};

/// Generator of variable names outside a set of used names.
///
/// Generated names live in the namespace `stem'N`: `fresh("x")` returns `x`
/// if unused, otherwise `x'N` for the smallest unused `N ≥ 1`. The prime is
/// not a legal symbol character, so generated names never collide with
/// constants.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    used: HashSet<String>,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding(f: &Formula) -> Self {
        FreshNames { used: f.variable_names() }
    }

    pub fn avoid_formula(&mut self, f: &Formula) {
        self.used.extend(f.variable_names());
    }

    pub fn avoid_term(&mut self, t: &Term) {
        self.used.extend(t.vars().into_iter().map(|v| v.name));
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    pub fn fresh(&mut self, stem: &str) -> String {
        if !self.used.contains(stem) {
            self.used.insert(stem.to_string());
            return stem.to_string();
        }
        self.fresh_indexed(stem)
    }

    /// Always a primed name `stem'N`, even if `stem` itself is unused.
    pub fn fresh_indexed(&mut self, stem: &str) -> String {
        let base = strip_index(stem);
        let name = (1..).map(|i| format!("{base}'{i}")).find(|n| !self.used.contains(n)).expect("unbounded");
        self.used.insert(name.clone());
        name
    }

    pub fn fresh_var(&mut self, stem: &str, sort: &Sort) -> Var {
        Var::new(&self.fresh(stem), sort)
    }
}

fn strip_index(name: &str) -> &str {
    match name.rsplit_once('\'') {
        Some((base, idx)) if !base.is_empty() && idx.chars().all(|c| c.is_ascii_digit()) => base,
        _ => name,
    }
}

fn subst_term(t: &Term, map: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst_term(a, map)).collect()),
        other => other.clone(),
    }
}

pub(super) fn substitute(f: &Formula, map: &BTreeMap<Var, Term>) -> Formula {
    let mut names = FreshNames::avoiding(f);
    for t in map.values() {
        names.avoid_term(t);
    }
    go(f, map, &mut names)
}

fn go(f: &Formula, map: &BTreeMap<Var, Term>, names: &mut FreshNames) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    match f {
        Formula::Top | Formula::Bot => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(subst_term(a, map), subst_term(b, map)),
        Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| subst_term(a, map)).collect()),
        Formula::Not(a) => go(a, map, names).not(),
        Formula::And(a, b) => go(a, map, names).and(go(b, map, names)),
        Formula::Or(a, b) => go(a, map, names).or(go(b, map, names)),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let (q, _, _) = f.as_quant().expect("quantifier");
            let free = body.free_variables();
            let inner: BTreeMap<Var, Term> =
                map.iter().filter(|(k, _)| *k != x && free.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
            if inner.is_empty() {
                return f.clone();
            }
            let captured = inner.values().any(|t| t.vars().contains(x));
            if captured {
                let y = Var::new(&names.fresh_indexed(&x.name), &x.sort);
                let mut renamed = inner;
                renamed.insert(x.clone(), y.term());
                Formula::quant(q, y, go(body, &renamed, names))
            } else {
                Formula::quant(q, x.clone(), go(body, &inner, names))
            }
        }
    }
}

/// Renames the outermost binder of `Q x ψ` to `y`, which must not occur free
/// in `ψ`.
pub fn rename_bound(f: &Formula, y: &Var) -> Formula {
    match f.as_quant() {
        Some((q, x, body)) => {
            let mut m = BTreeMap::new();
            m.insert(x.clone(), y.term());
            Formula::quant(q, y.clone(), substitute(body, &m))
        }
        None => f.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::field(n)
    }

    #[test]
    fn avoids_capture() {
        // ∃y(x·y = 1) with x ↦ y gives ∃y'1(y·y'1 = 1).
        let f = Formula::exists([v("y")], v("x").term().mul(v("y").term()).eq(Term::one()));
        let mut m = BTreeMap::new();
        m.insert(v("x"), v("y"));
        let g = f.substitute(&m).unwrap();
        let expected = Formula::exists([v("y'1")], v("y").term().mul(v("y'1").term()).eq(Term::one()));
        assert_eq!(g, expected);
    }

    #[test]
    fn bound_occurrences_untouched() {
        let f = Formula::exists([v("x")], v("x").term().eq(Term::zero())).and(v("x").term().eq(Term::one()));
        let mut m = BTreeMap::new();
        m.insert(v("x"), v("z"));
        let g = f.substitute(&m).unwrap();
        let expected = Formula::exists([v("x")], v("x").term().eq(Term::zero())).and(v("z").term().eq(Term::one()));
        assert_eq!(g, expected);
    }

    #[test]
    fn fresh_names() {
        let mut n = FreshNames::new();
        n.reserve("x");
        assert_eq!(n.fresh("x"), "x'1");
        assert_eq!(n.fresh("x'1"), "x'2");
        assert_eq!(n.fresh("w"), "w");
        assert_eq!(n.fresh_indexed("w"), "w'1");
    }
}
