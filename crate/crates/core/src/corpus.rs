//! Formula corpora: seeded random formulas over any language, random members
//! of a fragment descriptor, and the exhaustive enumeration of small graph
//! formulas.

use crate::formula::{Formula, Literal, Quantifier, Term, Var};
use crate::fpalg::{random_ratfunc, RatFunc};
use crate::fragments::{Block, FragmentDescriptor, Mode};
use crate::signature::{Language, LiteralDomain, Sort, SymbolKind};
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random formula generator.
///
/// Atoms use the variables in scope plus `free`; quantifiers bind names from
/// a small per-sort pool, so shadowing occurs.
pub struct Generator {
    lang: Language,
    rng: ChaCha8Rng,
    free: Vec<Var>,
    sorts: Vec<Sort>,
}

fn name_pool(sort: &Sort) -> &'static [&'static str] {
    match sort.name() {
        "field" => &["x", "y", "z", "w"],
        "residue" => &["a", "b", "c"],
        "group" => &["g", "h"],
        "vertex" => &["x", "y"],
        _ => &["s", "r"],
    }
}

impl Generator {
    pub fn new(lang: &Language, seed: u64) -> Self {
        Generator {
            lang: lang.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            free: Vec::new(),
            sorts: lang.sorts().to_vec(),
        }
    }

    /// Free variables atoms may use outside any binder.
    pub fn with_free(mut self, vars: &[Var]) -> Self {
        self.free = vars.to_vec();
        self
    }

    /// Restricts atoms, terms and quantifiers to the given sorts.
    pub fn only_sorts(mut self, sorts: &[&str]) -> Self {
        self.sorts = sorts.iter().map(|s| Sort::new(s)).collect();
        self
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn leaves(&mut self, sort: &Sort, scope: &[Var]) -> Vec<Term> {
        let mut out: Vec<Term> = scope.iter().chain(&self.free).filter(|v| &v.sort == sort).map(Var::term).collect();
        out.extend(
            self.lang
                .symbols()
                .iter()
                .filter(|s| s.kind == SymbolKind::Constant && s.result.as_ref() == Some(sort))
                .map(|s| Term::constant(&s.name)),
        );
        if let Some((domain, lit_sort)) = self.lang.literals().cloned() {
            if &lit_sort == sort {
                out.push(Term::Lit(self.literal(domain)));
            }
        }
        out
    }

    fn literal(&mut self, domain: LiteralDomain) -> Literal {
        match domain {
            LiteralDomain::Rationals => {
                Literal::Rational(Rational64::new(self.rng.gen_range(-3..=3), self.rng.gen_range(1..=3)))
            }
            LiteralDomain::PrimeField(p) => Literal::RatFunc(RatFunc::constant(p, self.rng.gen_range(0..p))),
            LiteralDomain::RationalFunctions(p) => Literal::RatFunc(random_ratfunc(&mut self.rng, p, 1)),
        }
    }

    /// A term of `sort` with at most `budget` nodes, if one exists.
    pub fn term(&mut self, sort: &Sort, budget: usize, scope: &[Var]) -> Option<Term> {
        if budget == 0 {
            return None;
        }
        let funcs: Vec<(String, Vec<Sort>)> = self
            .lang
            .symbols()
            .iter()
            .filter(|s| {
                s.kind == SymbolKind::Function
                    && s.result.as_ref() == Some(sort)
                    && s.args.len() < budget
                    && s.args.iter().all(|a| self.sorts.contains(a))
            })
            .map(|s| (s.name.clone(), s.args.clone()))
            .collect();
        let leaves = self.leaves(sort, scope);
        if !funcs.is_empty() && (leaves.is_empty() || self.rng.gen_bool(0.35)) {
            let (name, args) = funcs.choose(&mut self.rng).expect("nonempty").clone();
            let mut rest = budget - 1;
            let mut out = Vec::new();
            for (i, a) in args.iter().enumerate() {
                let reserve = args.len() - i - 1;
                let take = self.rng.gen_range(1..=rest - reserve);
                let t = self.term(a, take, scope)?;
                rest -= t.size();
                out.push(t);
            }
            return Some(Term::app(&name, out));
        }
        leaves.choose(&mut self.rng).cloned()
    }

    /// An atomic formula with at most `budget` nodes; `⊤` if none exists.
    pub fn atom(&mut self, budget: usize, scope: &[Var]) -> Formula {
        let rels: Vec<(String, Vec<Sort>)> = self
            .lang
            .symbols()
            .iter()
            .filter(|s| {
                s.kind == SymbolKind::Relation && s.args.len() < budget && s.args.iter().all(|a| self.sorts.contains(a))
            })
            .map(|s| (s.name.clone(), s.args.clone()))
            .collect();
        for _ in 0..8 {
            if !rels.is_empty() && self.rng.gen_bool(0.5) {
                let (name, args) = rels.choose(&mut self.rng).expect("nonempty").clone();
                let mut rest = budget - 1;
                let mut out = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    let reserve = args.len() - i - 1;
                    let take = self.rng.gen_range(1..=rest - reserve);
                    match self.term(a, take, scope) {
                        Some(t) => {
                            rest -= t.size();
                            out.push(t);
                        }
                        None => break,
                    }
                }
                if out.len() == args.len() {
                    return Formula::rel(&name, out);
                }
            } else if budget >= 3 {
                let sort = self.sorts.choose(&mut self.rng).expect("a sort").clone();
                let take = self.rng.gen_range(1..=budget - 2);
                if let Some(a) = self.term(&sort, take, scope) {
                    if let Some(b) = self.term(&sort, budget - 1 - a.size(), scope) {
                        return a.eq(b);
                    }
                }
            }
        }
        Formula::Top
    }

    /// A quantifier-free formula with at most `budget` nodes.
    pub fn qf(&mut self, budget: usize, scope: &[Var]) -> Formula {
        if budget < 4 || self.rng.gen_bool(0.4) {
            return self.atom(budget, scope);
        }
        match self.rng.gen_range(0..3) {
            0 => self.qf(budget - 1, scope).not(),
            k => {
                let left = self.rng.gen_range(1..=budget - 2);
                let a = self.qf(left, scope);
                let b = self.qf(budget - 1 - a.size(), scope);
                if k == 1 {
                    a.and(b)
                } else {
                    a.or(b)
                }
            }
        }
    }

    fn bind(&mut self, sort: Option<&Sort>) -> Var {
        let sort = match sort {
            Some(s) => s.clone(),
            None => self.sorts.choose(&mut self.rng).expect("a sort").clone(),
        };
        let name = name_pool(&sort).choose(&mut self.rng).expect("names");
        Var::new(name, &sort)
    }

    /// An arbitrary formula (quantifiers, `¬`, `∧`, `∨`) with at most
    /// `budget` nodes.
    pub fn formula(&mut self, budget: usize) -> Formula {
        self.formula_in(budget, &mut Vec::new())
    }

    fn formula_in(&mut self, budget: usize, scope: &mut Vec<Var>) -> Formula {
        if budget < 4 || self.rng.gen_bool(0.3) {
            return self.atom(budget, scope);
        }
        match self.rng.gen_range(0..5) {
            0 => self.formula_in(budget - 1, scope).not(),
            1 | 2 => {
                let q = if self.rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists };
                let x = self.bind(None);
                scope.push(x.clone());
                let body = self.formula_in(budget - 1, scope);
                scope.pop();
                Formula::quant(q, x, body)
            }
            k => {
                let left = self.rng.gen_range(1..=budget - 2);
                let a = self.formula_in(left, scope);
                let b = self.formula_in(budget - 1 - a.size(), scope);
                if k == 3 {
                    a.and(b)
                } else {
                    a.or(b)
                }
            }
        }
    }

    /// A random member of `desc` of moderate size (each quantifier-free
    /// leaf has at most `leaf` nodes).
    pub fn member(&mut self, desc: &FragmentDescriptor, leaf: usize) -> Formula {
        self.member_at(&desc.blocks, leaf, &mut Vec::new(), 3)
    }

    fn member_at(&mut self, blocks: &[Block], leaf: usize, scope: &mut Vec<Var>, width: usize) -> Formula {
        let Some(b) = blocks.first() else {
            return self.qf(leaf, scope);
        };
        let inner = &blocks[1..];
        match b.mode {
            Mode::Prefix(n) => self.prefix(b, n, inner, leaf, scope),
            Mode::PrefixAny => self.prefix(b, 3, inner, leaf, scope),
            Mode::Closed(n) => {
                self.combine(width, &mut |g: &mut Self, s: &mut Vec<Var>| g.prefix(b, n, inner, leaf, s), scope)
            }
            Mode::Nested(n) => self.nested(b, n, inner, leaf, scope),
            Mode::Unbounded => self.unbounded(b, inner, leaf, scope, 3),
        }
    }

    fn prefix(&mut self, b: &Block, n: usize, inner: &[Block], leaf: usize, scope: &mut Vec<Var>) -> Formula {
        let k = self.rng.gen_range(0..=n.min(3));
        let xs: Vec<Var> = (0..k).map(|_| self.bind(b.sort.as_ref())).collect();
        let depth = scope.len();
        scope.extend(xs.iter().cloned());
        let body = self.member_at(inner, leaf, scope, 2);
        scope.truncate(depth);
        Formula::quant_block(b.quant, xs, body)
    }

    fn combine(
        &mut self,
        width: usize,
        part: &mut dyn FnMut(&mut Self, &mut Vec<Var>) -> Formula,
        scope: &mut Vec<Var>,
    ) -> Formula {
        let k = self.rng.gen_range(1..=width.max(1));
        let mut acc = part(self, scope);
        for _ in 1..k {
            let next = part(self, scope);
            acc = if self.rng.gen_bool(0.5) { acc.and(next) } else { acc.or(next) };
        }
        acc
    }

    fn nested(&mut self, b: &Block, n: usize, inner: &[Block], leaf: usize, scope: &mut Vec<Var>) -> Formula {
        if n == 0 {
            return self.member_at(inner, leaf, scope, 2);
        }
        self.combine(
            2,
            &mut |g: &mut Self, s: &mut Vec<Var>| {
                if g.rng.gen_bool(0.6) {
                    let x = g.bind(b.sort.as_ref());
                    s.push(x.clone());
                    let body = g.nested(b, n - 1, inner, leaf, s);
                    s.pop();
                    Formula::quant(b.quant, x, body)
                } else {
                    g.nested(b, n - 1, inner, leaf, s)
                }
            },
            scope,
        )
    }

    fn unbounded(&mut self, b: &Block, inner: &[Block], leaf: usize, scope: &mut Vec<Var>, depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.member_at(inner, leaf, scope, 2);
        }
        match self.rng.gen_range(0..3) {
            0 => {
                let x = self.bind(b.sort.as_ref());
                scope.push(x.clone());
                let body = self.unbounded(b, inner, leaf, scope, depth - 1);
                scope.pop();
                Formula::quant(b.quant, x, body)
            }
            1 => self.unbounded(b, inner, leaf, scope, depth - 1).and(self.unbounded(b, inner, leaf, scope, depth - 1)),
            _ => self.unbounded(b, inner, leaf, scope, depth - 1).or(self.unbounded(b, inner, leaf, scope, depth - 1)),
        }
    }
}

/// Random rational functions over `𝔽_p` of height at most `h`.
pub fn random_ratfuncs(seed: u64, p: u64, h: usize, count: usize) -> Vec<RatFunc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_ratfunc(&mut rng, p, h)).collect()
}

/// Every formula of the graph language with at most `max_size` nodes over
/// the variables `x`, `y`: atoms `E(u, v)` and `u = v`, connectives `¬`,
/// `∧`, `∨`, quantifiers `∀`, `∃`. Listed by size, then construction order.
pub fn graph_formulas(max_size: usize) -> Vec<Formula> {
    let vars = [Var::new("x", &Sort::new("vertex")), Var::new("y", &Sort::new("vertex"))];
    let mut levels: Vec<Vec<Formula>> = vec![Vec::new(); max_size + 1];
    if max_size >= 3 {
        for u in &vars {
            for v in &vars {
                levels[3].push(Formula::rel("E", vec![u.term(), v.term()]));
            }
        }
        for u in &vars {
            for v in &vars {
                levels[3].push(u.term().eq(v.term()));
            }
        }
    }
    for s in 4..=max_size {
        let mut level = Vec::new();
        for f in &levels[s - 1] {
            level.push(f.clone().not());
            for q in [Quantifier::Forall, Quantifier::Exists] {
                for x in &vars {
                    level.push(Formula::quant(q, x.clone(), f.clone()));
                }
            }
        }
        for a in 3..s - 1 {
            let b = s - 1 - a;
            if b < 3 {
                continue;
            }
            for f in &levels[a] {
                for g in &levels[b] {
                    level.push(f.clone().and(g.clone()));
                    level.push(f.clone().or(g.clone()));
                }
            }
        }
        levels[s] = level;
    }
    levels.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::well_sorted;
    use crate::signature::{graph, ring, valued_field, RESIDUE};

    #[test]
    fn graph_enumeration_counts() {
        let all = graph_formulas(5);
        assert_eq!(all.len(), 8 + 40 + 200);
        assert!(all.iter().all(|f| f.size() <= 5));
        assert_eq!(graph_formulas(7).iter().filter(|f| f.size() == 7).count(), 5 * 1000 + 2 * 64);
    }

    #[test]
    fn random_formulas_are_well_sorted_and_bounded() {
        for (lang, seed) in [(ring(), 1), (valued_field(), 2), (graph(), 3)] {
            let mut g = Generator::new(&lang, seed).with_free(&[Var::field("u")]);
            for _ in 0..200 {
                let f = g.formula(8);
                assert!(f.size() <= 8, "{f}");
                if lang.has_sort(&Sort::field()) {
                    assert!(well_sorted(&lang, &f).is_empty(), "{f}");
                }
            }
        }
    }

    #[test]
    fn members_belong() {
        let lang = valued_field();
        let mut g = Generator::new(&lang, 7);
        for d in ["E", "A1[E]", "A1 E", "A2 E", "A^2 E", "A@k E", "E@k[A1[F0]]", "A E A"] {
            let desc: FragmentDescriptor = d.parse().unwrap();
            for _ in 0..50 {
                let f = g.member(&desc, 6);
                assert!(desc.contains(&f), "{d}: {f}");
                assert!(well_sorted(&lang, &f).is_empty(), "{f}");
                assert!(f.is_sentence() || !f.free_variables().is_empty());
            }
        }
    }

    #[test]
    fn residue_only() {
        let lang = valued_field();
        let a = Var::new("a", &Sort::new(RESIDUE));
        let mut g = Generator::new(&lang, 9).only_sorts(&[RESIDUE]).with_free(&[a]);
        for _ in 0..100 {
            let f = g.qf(7, &[]);
            assert!(f.free_variables().iter().all(|v| v.sort.name() == RESIDUE));
            assert!(well_sorted(&lang, &f).is_empty());
        }
    }

    #[test]
    fn deterministic() {
        let mut a = Generator::new(&ring(), 5);
        let mut b = Generator::new(&ring(), 5);
        for _ in 0..20 {
            assert_eq!(a.formula(8), b.formula(8));
        }
    }
}
