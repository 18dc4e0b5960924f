//! Fully parenthesised prefix syntax.
//!
//! ```text
//! (forall (x field) (or (not (= (* x y) 1)) (exists (z field) (= z x))))
//! ```
//!
//! Binders carry their sort; free variables get their sort from the
//! positions they occur in (defaulting to the first sort of the language).
//! Sugar accepted by the parser but never printed: n-ary `and`/`or`, `=>`,
//! `<=>`, `!=`, `(^ t n)`, numerals `n ≥ 2`, and binder lists
//! `(forall ((x field) (y field)) φ)`.

use super::{Formula, Literal, Term, Var};
use crate::fpalg::RatFunc;
use crate::signature::{Language, Sort, SymbolKind};
use num_rational::Rational64;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn perr<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { offset, message: message.into() })
}

pub(super) fn write_term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&v.name),
        Term::Const(c) => f.write_str(c),
        Term::Lit(l) => write!(f, "{l}"),
        Term::App(g, args) => {
            write!(f, "({g}")?;
            for a in args {
                f.write_str(" ")?;
                write_term(a, f)?;
            }
            f.write_str(")")
        }
    }
}

pub(super) fn write_formula(phi: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match phi {
        Formula::Top => f.write_str("true"),
        Formula::Bot => f.write_str("false"),
        Formula::Eq(a, b) => {
            f.write_str("(= ")?;
            write_term(a, f)?;
            f.write_str(" ")?;
            write_term(b, f)?;
            f.write_str(")")
        }
        Formula::Rel(r, args) => {
            write!(f, "({r}")?;
            for a in args {
                f.write_str(" ")?;
                write_term(a, f)?;
            }
            f.write_str(")")
        }
        Formula::Not(a) => {
            f.write_str("(not ")?;
            write_formula(a, f)?;
            f.write_str(")")
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            f.write_str(if matches!(phi, Formula::And(..)) { "(and " } else { "(or " })?;
            write_formula(a, f)?;
            f.write_str(" ")?;
            write_formula(b, f)?;
            f.write_str(")")
        }
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            let q = if matches!(phi, Formula::Forall(..)) { "forall" } else { "exists" };
            write!(f, "({q} ({} {}) ", v.name, v.sort)?;
            write_formula(a, f)?;
            f.write_str(")")
        }
    }
}

enum Sexp {
    Atom(String, usize),
    Lit(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn offset(&self) -> usize {
        match self {
            Sexp::Atom(_, o) | Sexp::Lit(_, o) | Sexp::List(_, o) => *o,
        }
    }
}

fn read_sexp(src: &str) -> Result<Sexp, ParseError> {
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let e = read(&bytes, &mut i, src)?;
    skip_ws(&bytes, &mut i);
    if i < bytes.len() {
        return perr(bytes[i].0, "trailing input");
    }
    Ok(e)
}

fn skip_ws(b: &[(usize, char)], i: &mut usize) {
    while *i < b.len() && b[*i].1.is_whitespace() {
        *i += 1;
    }
}

fn read(b: &[(usize, char)], i: &mut usize, src: &str) -> Result<Sexp, ParseError> {
    skip_ws(b, i);
    let Some(&(off, c)) = b.get(*i) else {
        return perr(src.len(), "unexpected end of input");
    };
    match c {
        '(' => {
            *i += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(b, i);
                match b.get(*i) {
                    None => return perr(src.len(), "unclosed parenthesis"),
                    Some((_, ')')) => {
                        *i += 1;
                        return Ok(Sexp::List(items, off));
                    }
                    Some(_) => items.push(read(b, i, src)?),
                }
            }
        }
        ')' => perr(off, "unexpected `)`"),
        '{' => {
            let start = *i;
            while *i < b.len() && b[*i].1 != '}' {
                *i += 1;
            }
            if *i == b.len() {
                return perr(off, "unclosed literal");
            }
            *i += 1;
            let end = b.get(*i).map_or(src.len(), |x| x.0);
            Ok(Sexp::Lit(src[b[start].0..end].to_string(), off))
        }
        _ => {
            let start = *i;
            while *i < b.len() && !b[*i].1.is_whitespace() && !"(){}".contains(b[*i].1) {
                *i += 1;
            }
            let end = b.get(*i).map_or(src.len(), |x| x.0);
            Ok(Sexp::Atom(src[b[start].0..end].to_string(), off))
        }
    }
}

/// Sort given to free variables until inference runs.
const PENDING: &str = "?";

struct Parser<'a> {
    lang: &'a Language,
    bound: Vec<Var>,
}

impl Parser<'_> {
    fn formula(&mut self, e: &Sexp) -> Result<Formula, ParseError> {
        let (items, off) = match e {
            Sexp::Atom(a, off) => {
                return match a.as_str() {
                    "true" => Ok(Formula::Top),
                    "false" => Ok(Formula::Bot),
                    _ => perr(*off, format!("expected a formula, found `{a}`")),
                }
            }
            Sexp::Lit(_, off) => return perr(*off, "expected a formula, found a literal"),
            Sexp::List(items, off) => (items, *off),
        };
        let Some(Sexp::Atom(head, _)) = items.first() else {
            return perr(off, "expected an operator");
        };
        let args = &items[1..];
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                perr(off, format!("`{head}` expects {n} arguments, got {}", args.len()))
            }
        };
        match head.as_str() {
            "not" => {
                arity(1)?;
                Ok(self.formula(&args[0])?.not())
            }
            "and" | "or" => {
                let parts = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(if head == "and" { Formula::conj(parts) } else { Formula::disj(parts) })
            }
            "=>" => {
                arity(2)?;
                Ok(self.formula(&args[0])?.not().or(self.formula(&args[1])?))
            }
            "<=>" => {
                arity(2)?;
                let (a, b) = (self.formula(&args[0])?, self.formula(&args[1])?);
                Ok(a.clone().not().or(b.clone()).and(b.not().or(a)))
            }
            "=" | "!=" => {
                arity(2)?;
                let eq = self.term(&args[0])?.eq(self.term(&args[1])?);
                Ok(if head == "=" { eq } else { eq.not() })
            }
            "forall" | "exists" => {
                arity(2)?;
                let vars = self.binders(&args[0])?;
                let n = vars.len();
                self.bound.extend(vars.iter().cloned());
                let body = self.formula(&args[1]);
                self.bound.truncate(self.bound.len() - n);
                let body = body?;
                Ok(if head == "forall" { Formula::forall(vars, body) } else { Formula::exists(vars, body) })
            }
            r => match self.lang.symbol(r) {
                Some(sym) if sym.kind == SymbolKind::Relation => {
                    let ts = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                    Ok(Formula::rel(r, ts))
                }
                _ => perr(off, format!("unknown relation or connective `{r}`")),
            },
        }
    }

    fn binders(&self, e: &Sexp) -> Result<Vec<Var>, ParseError> {
        let one = |e: &Sexp| -> Result<Var, ParseError> {
            match e {
                Sexp::List(v, off) => match v.as_slice() {
                    [Sexp::Atom(x, _), Sexp::Atom(s, soff)] => {
                        let sort = Sort::new(s);
                        if !self.lang.has_sort(&sort) {
                            return perr(*soff, format!("unknown sort `{s}`"));
                        }
                        check_var_name(self.lang, x, *off)?;
                        Ok(Var::new(x, &sort))
                    }
                    _ => perr(*off, "expected a binder `(x sort)`"),
                },
                other => perr(other.offset(), "expected a binder `(x sort)`"),
            }
        };
        match e {
            Sexp::List(v, _) if v.first().is_some_and(|f| matches!(f, Sexp::List(..))) => v.iter().map(one).collect(),
            _ => Ok(vec![one(e)?]),
        }
    }

    fn term(&mut self, e: &Sexp) -> Result<Term, ParseError> {
        match e {
            Sexp::Lit(s, off) => parse_literal(s, *off).map(Term::Lit),
            Sexp::Atom(a, off) => {
                if let Some(v) = self.bound.iter().rev().find(|v| &v.name == a) {
                    return Ok(Term::Var(v.clone()));
                }
                match self.lang.symbol(a) {
                    Some(sym) if sym.kind == SymbolKind::Constant => return Ok(Term::Const(a.clone())),
                    Some(_) => return perr(*off, format!("`{a}` is not a constant")),
                    None => {}
                }
                if let Ok(n) = a.parse::<u64>() {
                    if self.lang.has_ring_on(crate::signature::FIELD) {
                        return Ok(Term::numeral(n));
                    }
                    return perr(*off, format!("numeral `{a}` needs the ring operations"));
                }
                check_var_name(self.lang, a, *off)?;
                Ok(Term::var(a, &Sort::new(PENDING)))
            }
            Sexp::List(items, off) => {
                let Some(Sexp::Atom(head, _)) = items.first() else {
                    return perr(*off, "expected a function symbol");
                };
                if head == "^" {
                    let [_, base, Sexp::Atom(n, noff)] = items.as_slice() else {
                        return perr(*off, "expected `(^ term exponent)`");
                    };
                    let n: u64 = n.parse().or_else(|_| perr(*noff, "bad exponent"))?;
                    return Ok(self.term(base)?.pow(n));
                }
                match self.lang.symbol(head) {
                    Some(sym) if sym.kind == SymbolKind::Function => {
                        let args = items[1..].iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                        Ok(Term::App(head.clone(), args))
                    }
                    _ => perr(*off, format!("unknown function `{head}`")),
                }
            }
        }
    }
}

fn check_var_name(lang: &Language, name: &str, off: usize) -> Result<(), ParseError> {
    let reserved =
        matches!(name, "true" | "false" | "and" | "or" | "not" | "forall" | "exists" | "=" | "!=" | "=>" | "<=>" | "^");
    let symbol = lang.symbol(name).is_some_and(|s| s.kind != SymbolKind::Constant);
    if reserved || symbol || name.chars().any(|c| "(){}[];@:".contains(c)) {
        return perr(off, format!("`{name}` cannot be a variable"));
    }
    Ok(())
}

fn parse_literal(s: &str, off: usize) -> Result<Literal, ParseError> {
    if s.contains('@') {
        return s.parse::<RatFunc>().map(Literal::RatFunc).or_else(|e| perr(off, e.to_string()));
    }
    let inner = &s[1..s.len() - 1];
    inner.trim().parse::<Rational64>().map(Literal::Rational).or_else(|_| perr(off, format!("malformed literal `{s}`")))
}

pub fn parse_formula(lang: &Language, src: &str) -> Result<Formula, ParseError> {
    let e = read_sexp(src)?;
    let f = Parser { lang, bound: Vec::new() }.formula(&e)?;
    infer_free_sorts(lang, f)
}

pub fn parse_term(lang: &Language, src: &str) -> Result<Term, ParseError> {
    let e = read_sexp(src)?;
    let t = Parser { lang, bound: Vec::new() }.term(&e)?;
    // Reuse formula inference by wrapping in a trivial equation.
    match infer_free_sorts(lang, t.clone().eq(t))? {
        Formula::Eq(a, _) => Ok(a),
        _ => unreachable!(),
    }
}

struct Inference<'a> {
    lang: &'a Language,
    sorts: BTreeMap<String, Sort>,
    changed: bool,
    conflict: Option<String>,
}

impl Inference<'_> {
    fn known(&self, t: &Term) -> Option<Sort> {
        match t {
            Term::Var(v) if v.sort.name() == PENDING => self.sorts.get(&v.name).cloned(),
            Term::Var(v) => Some(v.sort.clone()),
            Term::Const(c) | Term::App(c, _) => self.lang.symbol(c).and_then(|s| s.result.clone()),
            Term::Lit(_) => self.lang.literals().map(|(_, s)| s.clone()),
        }
    }

    fn constrain(&mut self, t: &Term, want: Option<&Sort>) {
        match t {
            Term::Var(v) if v.sort.name() == PENDING => {
                if let Some(w) = want {
                    match self.sorts.get(&v.name) {
                        None => {
                            self.sorts.insert(v.name.clone(), w.clone());
                            self.changed = true;
                        }
                        Some(s) if s != w => {
                            self.conflict
                                .get_or_insert(format!("free variable `{}` is used at sorts `{s}` and `{w}`", v.name));
                        }
                        _ => {}
                    }
                }
            }
            Term::App(f, args) => {
                let want_args = self.lang.symbol(f).map(|s| s.args.clone()).unwrap_or_default();
                for (i, a) in args.iter().enumerate() {
                    self.constrain(a, want_args.get(i));
                }
            }
            _ => {}
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Top | Formula::Bot => {}
            Formula::Eq(a, b) => {
                let (sa, sb) = (self.known(a), self.known(b));
                self.constrain(a, sb.as_ref());
                self.constrain(b, sa.as_ref());
            }
            Formula::Rel(r, args) => {
                let want = self.lang.symbol(r).map(|s| s.args.clone()).unwrap_or_default();
                for (i, a) in args.iter().enumerate() {
                    self.constrain(a, want.get(i));
                }
            }
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => self.formula(a),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.formula(a);
                self.formula(b);
            }
        }
    }
}

fn infer_free_sorts(lang: &Language, f: Formula) -> Result<Formula, ParseError> {
    let mut inf = Inference { lang, sorts: BTreeMap::new(), changed: true, conflict: None };
    while inf.changed {
        inf.changed = false;
        inf.formula(&f);
    }
    if let Some(m) = inf.conflict {
        return perr(0, m);
    }
    let default = lang.sorts().first().cloned().unwrap_or_else(Sort::field);
    let pending: Vec<Var> = f.free_variables().into_iter().filter(|v| v.sort.name() == PENDING).collect();
    if pending.is_empty() {
        return Ok(f);
    }
    let map = pending
        .into_iter()
        .map(|v| {
            let s = inf.sorts.get(&v.name).cloned().unwrap_or_else(|| default.clone());
            let t = Term::var(&v.name, &s);
            (v, t)
        })
        .collect();
    Ok(f.substitute_terms(&map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{extend_with_constants, graph, ring, valued_field, FIELD, GROUP};

    fn round_trip(lang: &Language, src: &str) {
        let f = parse_formula(lang, src).unwrap();
        assert_eq!(f.to_string(), src);
        assert_eq!(parse_formula(lang, &f.to_string()).unwrap(), f);
    }

    #[test]
    fn canonical_round_trips() {
        round_trip(&ring(), "(forall (x field) (or (not (= (* x y) 1)) (exists (z field) (= z x))))");
        round_trip(&graph(), "(forall (x vertex) (exists (y vertex) (E x y)))");
        round_trip(&valued_field(), "(exists (x field) (<=G (v x) 0G))");
        let rt = extend_with_constants(&ring(), &["t"], FIELD).unwrap();
        round_trip(&rt, "(exists (y'1 field) (= (* y'1 t) 1))");
        round_trip(&ring(), "true");
    }

    #[test]
    fn free_variable_sorts_are_inferred() {
        let f = parse_formula(&valued_field(), "(<=G (v x) g)").unwrap();
        let free = f.free_variables();
        assert!(free.contains(&Var::new("x", &Sort::field())));
        assert!(free.contains(&Var::new("g", &Sort::new(GROUP))));
        let e = parse_formula(&valued_field(), "(= a b)").unwrap();
        assert!(e.free_variables().iter().all(|v| v.sort.name() == FIELD));
    }

    #[test]
    fn conflicting_free_sorts() {
        assert!(parse_formula(&valued_field(), "(and (= (v x) 0G) (= x 0))").is_ok());
        assert!(parse_formula(&valued_field(), "(and (= (v x) 0G) (= x 0G))").is_err());
    }

    #[test]
    fn sugar() {
        let r = ring();
        let a = parse_formula(&r, "(and true false true)").unwrap();
        assert_eq!(a.to_string(), "(and true (and false true))");
        let p = parse_formula(&r, "(= (^ x 3) 2)").unwrap();
        assert_eq!(p.to_string(), "(= (* (* x x) x) (+ 1 1))");
        let q = parse_formula(&r, "(forall ((x field) (y field)) (!= x y))").unwrap();
        assert_eq!(q.to_string(), "(forall (x field) (forall (y field) (not (= x y))))");
    }

    #[test]
    fn literals() {
        let r = ring().with_literals(crate::signature::LiteralDomain::RationalFunctions(2), FIELD).unwrap();
        round_trip(&r, "(= x {[0,1]/[1]@2})");
        let q = ring().with_literals(crate::signature::LiteralDomain::Rationals, FIELD).unwrap();
        round_trip(&q, "(= (* {3/4} x) {-1})");
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_formula(&ring(), "(and (= x 1) (E x y))").unwrap_err();
        assert_eq!(e.offset, 13);
        assert!(parse_formula(&ring(), "(= x 1").is_err());
        assert!(parse_formula(&ring(), "(forall (x blob) true)").is_err());
        assert!(parse_formula(&ring(), "(= x 1) extra").is_err());
    }
}
