//! Reductions between fragments of theories of function fields: rational
//! function fields `k(t)` with and without the constant `t`, and function
//! fields of curves of genus at least two.
//!
//! Semantic hypotheses (genus, separability, perfectness, definability of
//! `k` by `γ`) are asserted by the caller and never checked.

use crate::error::ReductionError;
use crate::formula::{parse_term, well_sorted, Formula, FreshNames, Literal, Term, Var};
use crate::fpalg::{prime_power, RatFunc};
use crate::fragments::{mem_fragment, FragmentDescriptor};
use crate::signature::{extend_with_constants, ring, Language, LiteralDomain, Sort, FIELD};
use std::fmt;
use std::str::FromStr;

/// Cardinality of the constant field `k`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConstCount {
    Finite(u64),
    Infinite,
}

impl FromStr for ConstCount {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(ConstCount::Infinite),
            n => n.parse().map(ConstCount::Finite).map_err(|_| ReductionError::Params(format!("bad field size `{s}`"))),
        }
    }
}

/// Largest finite `q` accepted by [`tau_rat_const`] (the formula has `q`
/// copies of `ψ` and terms of size `q`).
pub const MAX_Q: u64 = 1024;

fn e() -> FragmentDescriptor {
    FragmentDescriptor::parse("E").expect("descriptor")
}

fn a1e() -> FragmentDescriptor {
    FragmentDescriptor::parse("A1[E]").expect("descriptor")
}

fn check(lang: &Language, desc: &FragmentDescriptor, f: &Formula) -> Result<(), ReductionError> {
    if mem_fragment(lang, desc, f)? {
        Ok(())
    } else {
        Err(ReductionError::NotInFragment(desc.to_string()))
    }
}

/// `⊤(ū)`: a verum carrying the free variables `ū`, encoded as
/// `⊤ ∧ ⋀ uᵢ = uᵢ`.
pub fn verum_with(vars: impl IntoIterator<Item = Var>) -> Formula {
    Formula::conj(std::iter::once(Formula::Top).chain(vars.into_iter().map(|u| u.term().eq(u.term()))))
}

/// `ℒ_ring(t)`.
pub fn ring_with_t() -> Language {
    extend_with_constants(&ring(), &["t"], FIELD).expect("fresh constant")
}

/// `φ = ∀x ψ` with `ψ` existential ↦ `(ψ₁, ψ₂)`:
/// for `q = ∞`, `(ψ(t, ū), φ)`; for finite `q`, `(φ_q, ⊤(ū))` with
/// `φ_q = ψ(t,ū) ∧ ∃y₁…y_q(⋀ y_i^q − y_i = 0 ∧ ⋀_{i<j} y_i ≠ y_j ∧ ⋀ ψ(y_i,ū))`.
///
/// `ψ₁` is over `ℒ_ring(t)` and existential, `ψ₂` is in `∀₁[∃]`.
pub fn tau_rat_const(q: ConstCount, f: &Formula) -> Result<(Formula, Formula), ReductionError> {
    let lang = ring();
    check(&lang, &a1e(), f)?;
    if f.mentions_constant("t") {
        return Err(ReductionError::Language("input already mentions `t`".into()));
    }
    let t = Term::constant("t");
    let (x, psi) = match f {
        Formula::Forall(x, body) if e().contains(body) => (Some(x.clone()), body.as_ref().clone()),
        _ => (None, f.clone()),
    };
    let at = |term: Term| match &x {
        Some(x) => psi.instantiate(x, term),
        None => psi.clone(),
    };
    match q {
        ConstCount::Infinite => Ok((at(t), f.clone())),
        ConstCount::Finite(q) => {
            if prime_power(q).is_none() {
                return Err(ReductionError::Params(format!("{q} is not a prime power")));
            }
            if q > MAX_Q {
                return Err(ReductionError::Params(format!("q = {q} exceeds {MAX_Q}")));
            }
            let mut names = FreshNames::avoiding(f);
            let ys: Vec<Var> = (1..=q).map(|i| names.fresh_var(&format!("y{i}"), &Sort::field())).collect();
            let mut parts: Vec<Formula> = ys.iter().map(|y| y.term().pow(q).sub(y.term()).eq(Term::zero())).collect();
            for i in 0..ys.len() {
                for j in i + 1..ys.len() {
                    parts.push(ys[i].term().ne(ys[j].term()));
                }
            }
            parts.extend(ys.iter().map(|y| at(y.term())));
            let phi_q = at(t).and(Formula::exists(ys, Formula::conj(parts)));
            Ok((phi_q, verum_with(f.free_variables())))
        }
    }
}

/// `φ(ū) = ψ(ū, t)` existential over `ℒ_ring(t)` ↦ `∀x (ψ(ū, x) ∨ γ(x))`,
/// in `∀₁[∃]` over `ℒ_ring`.
pub fn tau_rat_noconst(gamma: &Formula, f: &Formula) -> Result<Formula, ReductionError> {
    let g = gamma_var(gamma)?;
    check(&ring(), &e(), gamma)?;
    check(&ring_with_t(), &e(), f)?;
    let mut names = FreshNames::avoiding(f);
    names.avoid_formula(gamma);
    let x = names.fresh_var("x", &Sort::field());
    let psi = f.replace_constant("t", &x.term());
    Ok(Formula::forall([x.clone()], psi.or(gamma.instantiate(&g, x.term()))))
}

fn gamma_var(gamma: &Formula) -> Result<Var, ReductionError> {
    let free = gamma.free_variables();
    match free.iter().collect::<Vec<_>>().as_slice() {
        [v] if v.sort == Sort::field() => Ok((*v).clone()),
        _ => Err(ReductionError::Params("γ must have exactly one free field variable".into())),
    }
}

/// A plane curve `f(𝐱, 𝐲) = 0` over a constant field `k₀` given by its
/// literal domain (ℚ for characteristic 0), with caller-asserted hypotheses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveDatum {
    pub k0: LiteralDomain,
    /// `(coefficient, exponent of 𝐱, exponent of 𝐲)`.
    pub monomials: Vec<(Literal, u32, u32)>,
    /// Names of the constants standing for `𝐱`, `𝐲` in input formulas.
    pub constants: (String, String),
    pub genus_at_least_two: bool,
    pub separable_in_y: bool,
    pub k0_perfect: bool,
}

impl CurveDatum {
    pub fn new(k0: LiteralDomain, monomials: Vec<(Literal, u32, u32)>) -> Result<Self, ReductionError> {
        let c = CurveDatum {
            k0,
            monomials,
            constants: ("x".into(), "y".into()),
            genus_at_least_two: false,
            separable_in_y: false,
            k0_perfect: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn characteristic(&self) -> u64 {
        self.k0.characteristic()
    }

    fn validate(&self) -> Result<(), ReductionError> {
        if self.monomials.is_empty() || self.monomials.iter().all(|(c, _, _)| is_zero(c)) {
            return Err(ReductionError::Params("f must be nonzero".into()));
        }
        for (c, _, _) in &self.monomials {
            if !self.k0.admits(c) {
                return Err(ReductionError::Params(format!("coefficient {c} is not in {}", self.k0)));
            }
        }
        if self.constants.0 == self.constants.1 {
            return Err(ReductionError::Params("the two curve constants must differ".into()));
        }
        Ok(())
    }

    /// `ℒ_ring(k₀)`.
    pub fn base_language(&self) -> Language {
        ring().with_literals(self.k0, FIELD).expect("field sort")
    }

    /// `ℒ_ring(k₀)` with the constants for `𝐱`, `𝐲`.
    pub fn input_language(&self) -> Language {
        extend_with_constants(&self.base_language(), &[&self.constants.0, &self.constants.1], FIELD)
            .expect("fresh constants")
    }

    /// The term `f(a, b)`.
    pub fn apply(&self, a: &Term, b: &Term) -> Term {
        Term::sum(self.monomials.iter().filter(|(c, _, _)| !is_zero(c)).map(|(c, i, j)| {
            let mut factors = Vec::new();
            if !is_one(c) || (*i == 0 && *j == 0) {
                factors.push(Term::Lit(c.clone()));
            }
            if *i > 0 {
                factors.push(a.clone().pow(*i as u64));
            }
            if *j > 0 {
                factors.push(b.clone().pow(*j as u64));
            }
            Term::product(factors)
        }))
    }

    /// Text format, one directive per line (`#` starts a comment):
    ///
    /// ```text
    /// k0 Q                 # or F<p>, F<p>(s)
    /// constants x y        # optional
    /// monomial 1 0 2       # coefficient, exponent of x, exponent of y
    /// monomial -1 5 0
    /// monomial -1 0 0
    /// assert genus-at-least-two
    /// assert separable-in-y
    /// assert perfect
    /// ```
    ///
    /// Coefficients are rationals over ℚ, integers over `F<p>`, and
    /// rational-function literals `{[..]/[..]@p}` over `F<p>(s)`.
    pub fn parse(src: &str) -> Result<Self, ReductionError> {
        let bad = |line: usize, m: &str| ReductionError::Params(format!("curve line {line}: {m}"));
        let mut k0 = None;
        let mut monomials = Vec::new();
        let mut constants = ("x".to_string(), "y".to_string());
        let mut flags = (false, false, false);
        for (n, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                [] => {}
                ["k0", d] => k0 = Some(d.parse::<LiteralDomain>().map_err(|e| bad(n + 1, &e.to_string()))?),
                ["constants", a, b] => constants = (a.to_string(), b.to_string()),
                ["monomial", c, i, j] => {
                    let d = k0.ok_or_else(|| bad(n + 1, "`k0` must come first"))?;
                    let c = parse_coefficient(d, c).ok_or_else(|| bad(n + 1, "bad coefficient"))?;
                    let i = i.parse().map_err(|_| bad(n + 1, "bad exponent"))?;
                    let j = j.parse().map_err(|_| bad(n + 1, "bad exponent"))?;
                    monomials.push((c, i, j));
                }
                ["assert", "genus-at-least-two"] => flags.0 = true,
                ["assert", "separable-in-y"] => flags.1 = true,
                ["assert", "perfect"] => flags.2 = true,
                _ => return Err(bad(n + 1, "unrecognized directive")),
            }
        }
        let k0 = k0.ok_or_else(|| ReductionError::Params("curve: missing `k0`".into()))?;
        let c = CurveDatum {
            k0,
            monomials,
            constants,
            genus_at_least_two: flags.0,
            separable_in_y: flags.1,
            k0_perfect: flags.2,
        };
        c.validate()?;
        Ok(c)
    }
}

fn parse_coefficient(d: LiteralDomain, s: &str) -> Option<Literal> {
    match d {
        LiteralDomain::Rationals => s.parse().ok().map(Literal::Rational),
        LiteralDomain::PrimeField(p) => {
            let v: i64 = s.parse().ok()?;
            Some(Literal::RatFunc(RatFunc::constant(p, v.rem_euclid(p as i64) as u64)))
        }
        LiteralDomain::RationalFunctions(_) => s.parse().ok().map(Literal::RatFunc),
    }
}

fn is_zero(c: &Literal) -> bool {
    match c {
        Literal::Rational(q) => *q.numer() == 0,
        Literal::RatFunc(f) => f.is_zero(),
    }
}

fn is_one(c: &Literal) -> bool {
    match c {
        Literal::Rational(q) => *q.numer() == 1 && *q.denom() == 1,
        Literal::RatFunc(f) => *f == RatFunc::one(f.characteristic()),
    }
}

impl fmt::Display for CurveDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k0 {}", self.k0)?;
        writeln!(f, "constants {} {}", self.constants.0, self.constants.1)?;
        for (c, i, j) in &self.monomials {
            let c = match c {
                Literal::Rational(q) => q.to_string(),
                Literal::RatFunc(r) if matches!(self.k0, LiteralDomain::PrimeField(_)) => {
                    r.numerator().coeff(0).to_string()
                }
                Literal::RatFunc(r) => r.to_string(),
            };
            writeln!(f, "monomial {c} {i} {j}")?;
        }
        for (flag, name) in [
            (self.genus_at_least_two, "genus-at-least-two"),
            (self.separable_in_y, "separable-in-y"),
            (self.k0_perfect, "perfect"),
        ] {
            if flag {
                writeln!(f, "assert {name}")?;
            }
        }
        Ok(())
    }
}

/// Replaces the curve constants of `f` by fresh variables `v`, `w`,
/// producing `φ₀(ū, v, w)`.
pub fn express_constants(c: &CurveDatum, f: &Formula, v: &Var, w: &Var) -> Formula {
    f.replace_constant(&c.constants.0, &v.term()).replace_constant(&c.constants.1, &w.term())
}

/// Inverse of [`express_constants`]: substitutes the curve constants back.
pub fn fold_constants(c: &CurveDatum, f0: &Formula, v: &Var, w: &Var) -> Formula {
    let mut m = std::collections::BTreeMap::new();
    m.insert(v.clone(), Term::constant(&c.constants.0));
    m.insert(w.clone(), Term::constant(&c.constants.1));
    f0.substitute_terms(&m)
}

/// Characteristic 0: `∀a, b (f(a,b) ≠ 0 ∨ γ(a) ∨ φ₀(ū, a, b))`, in
/// `∀₂[F]` over `ℒ_ring(k₀)`.
pub fn tau_curve_char0(
    c: &CurveDatum,
    gamma: &Formula,
    desc: &FragmentDescriptor,
    f: &Formula,
) -> Result<Formula, ReductionError> {
    if c.characteristic() != 0 {
        return Err(ReductionError::Params("the curve must be over a field of characteristic 0".into()));
    }
    if !c.genus_at_least_two {
        return Err(ReductionError::Hypothesis("genus at least two".into()));
    }
    if !desc.is_alternating_from_exists() {
        return Err(ReductionError::Fragment(format!("{desc} is not one of ∃, ∃∀, ∃∀∃, …")));
    }
    let g = gamma_var(gamma)?;
    check(&c.base_language(), desc, gamma)?;
    check(&c.input_language(), desc, f)?;
    let mut names = FreshNames::avoiding(f);
    names.avoid_formula(gamma);
    let a = names.fresh_var("a", &Sort::field());
    let b = names.fresh_var("b", &Sort::field());
    let body = Formula::disj([
        c.apply(&a.term(), &b.term()).ne(Term::zero()),
        gamma.instantiate(&g, a.term()),
        express_constants(c, f, &a, &b),
    ]);
    Ok(Formula::forall([a, b], body))
}

/// Characteristic `p`:
/// `∀ζ ∃ξ, η, λ₀…λ_{p−1} (f(ξ,η) = 0 ∧ ζ = Σ λ_j^p ξ^j ∧ φ₀(ū, ξ, η))`, in
/// `∀₁[∃]` over `ℒ_ring(k₀)`.
pub fn tau_curve_charp(c: &CurveDatum, f: &Formula) -> Result<Formula, ReductionError> {
    let p = c.characteristic();
    if p == 0 {
        return Err(ReductionError::Params("the curve must be over a field of positive characteristic".into()));
    }
    for (flag, what) in [
        (c.genus_at_least_two, "genus at least two"),
        (c.separable_in_y, "f separable in y"),
        (c.k0_perfect, "k0 perfect"),
    ] {
        if !flag {
            return Err(ReductionError::Hypothesis(what.into()));
        }
    }
    if p > 1 << 12 {
        return Err(ReductionError::Params(format!("p = {p} is too large")));
    }
    check(&c.input_language(), &e(), f)?;
    let mut names = FreshNames::avoiding(f);
    let zeta = names.fresh_var("zeta", &Sort::field());
    let xi = names.fresh_var("xi", &Sort::field());
    let eta = names.fresh_var("eta", &Sort::field());
    let lam: Vec<Var> = (0..p).map(|j| names.fresh_var(&format!("lam{j}"), &Sort::field())).collect();
    let sum = Term::sum(lam.iter().enumerate().map(|(j, l)| {
        let lp = l.term().pow(p);
        if j == 0 {
            lp
        } else {
            lp.mul(xi.term().pow(j as u64))
        }
    }));
    let body = Formula::conj([
        c.apply(&xi.term(), &eta.term()).eq(Term::zero()),
        zeta.term().eq(sum),
        express_constants(c, f, &xi, &eta),
    ]);
    let mut bound = vec![xi, eta];
    bound.extend(lam);
    let out = Formula::forall([zeta], Formula::exists(bound, body));
    debug_assert!(well_sorted(&c.base_language(), &out).is_empty());
    Ok(out)
}

/// Parses a term of `ℒ_ring(k₀)(𝐱, 𝐲)`, e.g. a constant of `k₀[𝐱, 𝐲]`.
pub fn parse_curve_term(c: &CurveDatum, src: &str) -> Result<Term, ReductionError> {
    parse_term(&c.input_language(), src).map_err(|e| ReductionError::Params(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn genus2() -> CurveDatum {
        CurveDatum::parse("k0 Q\nmonomial 1 0 2\nmonomial -1 5 0\nmonomial -1 0 0\nassert genus-at-least-two\n")
            .unwrap()
    }

    #[test]
    fn rat_const_infinite() {
        let f = parse_formula(&ring(), "(forall (x field) (exists (y field) (= (* x y) u)))").unwrap();
        let (p1, p2) = tau_rat_const(ConstCount::Infinite, &f).unwrap();
        assert_eq!(p1.to_string(), "(exists (y field) (= (* t y) u))");
        assert_eq!(p2, f);
    }

    #[test]
    fn rat_const_finite() {
        let f = parse_formula(&ring(), "(forall (x field) (exists (y field) (= (* x y) u)))").unwrap();
        let (p1, p2) = tau_rat_const(ConstCount::Finite(2), &f).unwrap();
        assert_eq!(
            p1.to_string(),
            "(and (exists (y field) (= (* t y) u)) (exists (y1 field) (exists (y2 field) \
             (and (= (- (* y1 y1) y1) 0) (and (= (- (* y2 y2) y2) 0) (and (not (= y1 y2)) \
             (and (exists (y field) (= (* y1 y) u)) (exists (y field) (= (* y2 y) u)))))))))"
        );
        assert_eq!(p2.to_string(), "(and true (= u u))");
        assert!(mem_fragment(&ring_with_t(), &e(), &p1).unwrap());
        assert!(tau_rat_const(ConstCount::Finite(6), &f).is_err());
    }

    #[test]
    fn rat_noconst_example() {
        let gamma = parse_formula(&ring(), "(exists (w field) (= z (* w w)))").unwrap();
        let f = parse_formula(&ring_with_t(), "(exists (y field) (= (* y t) 1))").unwrap();
        let out = tau_rat_noconst(&gamma, &f).unwrap();
        assert_eq!(
            out.to_string(),
            "(forall (x field) (or (exists (y field) (= (* y x) 1)) (exists (w field) (= x (* w w)))))"
        );
        assert!(mem_fragment(&ring(), &a1e(), &out).unwrap());
    }

    #[test]
    fn curve_char0_example() {
        let c = genus2();
        let gamma = parse_formula(&c.base_language(), "(exists (w field) (= (* w z) 1))").unwrap();
        let f = parse_formula(&c.input_language(), "(exists (z field) (= z (* x y)))").unwrap();
        let out = tau_curve_char0(&c, &gamma, &e(), &f).unwrap();
        assert_eq!(
            out.to_string(),
            "(forall (a field) (forall (b field) (or (not (= (+ (- (* b b) (* {-1} (* (* (* (* a a) a) a) a))) {-1}) 0)) \
             (or (exists (w field) (= (* w a) 1)) (exists (z field) (= z (* a b)))))))"
                .replace("(- (* b b) (* {-1}", "(+ (* b b) (* {-1}")
        );
        assert!(mem_fragment(&c.base_language(), &"A2[E]".parse().unwrap(), &out).unwrap());
    }

    #[test]
    fn curve_charp_template() {
        let mut c = CurveDatum::parse("k0 F2\nmonomial 1 0 2\nmonomial 1 0 1\nmonomial 1 5 0\n").unwrap();
        let f = Formula::Top;
        assert!(matches!(tau_curve_charp(&c, &f), Err(ReductionError::Hypothesis(_))));
        c.genus_at_least_two = true;
        c.separable_in_y = true;
        c.k0_perfect = true;
        let out = tau_curve_charp(&c, &f).unwrap();
        assert!(out.to_string().contains("(= zeta (+ (* lam0 lam0) (* (* lam1 lam1) xi)))"));
        assert!(mem_fragment(&c.base_language(), &a1e(), &out).unwrap());
    }

    #[test]
    fn constants_round_trip() {
        let c = genus2();
        let f = parse_formula(&c.input_language(), "(exists (z field) (= (* z x) (+ y {3/4})))").unwrap();
        let (v, w) = (Var::field("v"), Var::field("w"));
        let f0 = express_constants(&c, &f, &v, &w);
        assert!(!f0.mentions_constant("x"));
        assert_eq!(fold_constants(&c, &f0, &v, &w), f);
    }

    #[test]
    fn curve_file_round_trip() {
        let c = genus2();
        assert_eq!(CurveDatum::parse(&c.to_string()).unwrap(), c);
        assert!(CurveDatum::parse("k0 Q\nmonomial 0 1 1\n").is_err());
        assert!(CurveDatum::parse("monomial 1 1 1\n").is_err());
    }
}
