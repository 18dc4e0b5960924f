//! Coding blocks of universal quantifiers by one universal quantifier in
//! characteristic `p`, using `p`-th powers.
//!
//! `χ_{p,n,r}(x, ȳ, z̄)` defines, for a `p`-basis `z̄` of a field with
//! `[K:K^p] = p^n`, a surjection `K → K^r`; `π_{p,n}(z̄)` defines the
//! `p`-dependent tuples. The three maps `tau_*` turn a `∀F` formula into a
//! formula with a bounded universal prefix.
//!
//! Auxiliary bound variables are `lam{i}` (multi-indices flattened in
//! row-major order), `w`, `y{i}`, `z{i}`; a name already in use gets a
//! primed suffix.

use crate::error::ReductionError;
use crate::formula::{well_sorted, Formula, FreshNames, Quantifier, Term, Var};
use crate::fpalg::is_prime;
use crate::fragments::{mem_fragment, prnx, relativize, Block, FragmentDescriptor, Mode};
use crate::signature::{ring, Language, Sort, SymbolKind, FIELD};
use std::collections::BTreeMap;

fn check_p(p: u64) -> Result<(), ReductionError> {
    if is_prime(p) && p <= 1 << 16 {
        Ok(())
    } else {
        Err(ReductionError::Params(format!("p = {p} is not a supported prime")))
    }
}

/// All multi-indices in `{0, …, base−1}^len`, row-major (last index fastest).
fn multi_indices(base: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..base).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

/// `Π_j z_j^{i_j}` times `coeff`, omitting trivial factors.
fn monomial(coeff: Term, zs: &[Term], idx: &[u64]) -> Term {
    zs.iter().zip(idx).filter(|(_, &i)| i > 0).fold(coeff, |acc, (z, &i)| acc.mul(z.clone().pow(i)))
}

fn names_avoiding(terms: &[&Term]) -> FreshNames {
    let mut names = FreshNames::new();
    for t in terms {
        names.avoid_term(t);
    }
    names
}

fn lambdas(names: &mut FreshNames, count: usize) -> Vec<Var> {
    (0..count).map(|i| names.fresh_var(&format!("lam{i}"), &Sort::field())).collect()
}

fn std_vars(stem: &str, k: usize) -> Vec<Term> {
    (1..=k).map(|i| Var::field(&format!("{stem}{i}")).term()).collect()
}

/// `χ_{p,n,r}(x, y₁…y_r, z₁…z_n)` with the standard free variables.
pub fn chi(p: u64, n: usize, r: usize) -> Result<Formula, ReductionError> {
    check_p(p)?;
    if n == 0 {
        return Err(ReductionError::Params("χ needs n ≥ 1".into()));
    }
    Ok(chi_with(p, &Var::field("x").term(), &std_vars("y", r), &std_vars("z", n)))
}

/// `χ_{p,n,r}(x, ȳ, z̄)` for arbitrary terms; `r = ys.len()`, `n = zs.len()`.
pub fn chi_with(p: u64, x: &Term, ys: &[Term], zs: &[Term]) -> Formula {
    match ys.len() {
        0 => Formula::Top,
        1 => x.clone().eq(ys[0].clone()),
        2 => chi2(p, x, &ys[0], &ys[1], zs),
        r => {
            let mut args: Vec<&Term> = vec![x];
            args.extend(ys);
            args.extend(zs);
            let w = names_avoiding(&args).fresh_var("w", &Sort::field());
            let mut head: Vec<Term> = ys[..r - 2].to_vec();
            head.push(w.term());
            let inner = chi_with(p, x, &head, zs);
            Formula::exists([w.clone()], inner.and(chi2(p, &w.term(), &ys[r - 2], &ys[r - 1], zs)))
        }
    }
}

fn chi2(p: u64, x: &Term, y1: &Term, y2: &Term, zs: &[Term]) -> Formula {
    let mut args: Vec<&Term> = vec![x, y1, y2];
    args.extend(zs);
    let mut names = names_avoiding(&args);
    let idx = multi_indices(p, zs.len());
    let lam = lambdas(&mut names, idx.len());
    let sum = Term::sum(idx.iter().zip(&lam).map(|(i, l)| monomial(l.term().pow(p), zs, i)));
    Formula::exists(
        lam.clone(),
        Formula::conj([x.clone().eq(sum), y1.clone().eq(lam[0].term()), y2.clone().eq(lam[lam.len() - 1].term())]),
    )
}

/// `π_{p,n}(z₁…z_n)`: the tuple is `p`-dependent.
pub fn pi(p: u64, n: usize) -> Result<Formula, ReductionError> {
    check_p(p)?;
    if n == 0 {
        return Err(ReductionError::Params("π needs n ≥ 1".into()));
    }
    Ok(pi_with(p, &std_vars("z", n)))
}

pub fn pi_with(p: u64, zs: &[Term]) -> Formula {
    let mut names = names_avoiding(&zs.iter().collect::<Vec<_>>());
    let idx = multi_indices(p, zs.len());
    let lam = lambdas(&mut names, idx.len());
    let sum = Term::sum(idx.iter().zip(&lam).map(|(i, l)| monomial(l.term().pow(p), zs, i)));
    let nonzero = Formula::disj(lam.iter().map(|l| l.term().ne(Term::zero())));
    Formula::exists(lam.clone(), sum.eq(Term::zero()).and(nonzero))
}

/// `Q·desc` for an unbounded, unrestricted block.
pub(crate) fn prepend_unbounded(q: Quantifier, desc: &FragmentDescriptor) -> FragmentDescriptor {
    desc.prepend(Block::new(q, Mode::Unbounded))
}

/// `Q_k[desc]`.
pub(crate) fn prepend_prefix(q: Quantifier, k: usize, desc: &FragmentDescriptor) -> FragmentDescriptor {
    desc.prepend(Block::new(q, Mode::Prefix(k)))
}

/// Splits a member of `outer·desc` (`outer` a universal block) as
/// `∀x₁…x_r ψ` with `ψ ∈ desc`, via the prenex form relative to `desc`.
pub(crate) fn split_universal(
    outer: Block,
    desc: &FragmentDescriptor,
    lang: &Language,
    f: &Formula,
) -> Result<(Vec<Var>, Formula), ReductionError> {
    let whole = desc.prepend(outer);
    if !mem_fragment(lang, &whole, f)? {
        return Err(ReductionError::NotInFragment(whole.to_string()));
    }
    let pr = prnx(desc, lang, f)?;
    if pr.prefix.iter().any(|(q, _)| *q != Quantifier::Forall) || !desc.contains(&pr.matrix) {
        return Err(ReductionError::NotInFragment(whole.to_string()));
    }
    Ok((pr.prefix.into_iter().map(|(_, x)| x).collect(), pr.matrix))
}

/// Replaces each non-field universal `x` by a fresh field variable `x'`,
/// reading `x` as `v(x')` or `res(x')`; both maps are onto.
fn onto_field(lang: &Language, xs: Vec<Var>, psi: Formula, f: &Formula) -> Result<(Vec<Var>, Formula), ReductionError> {
    let mut names = FreshNames::avoiding(f);
    names.avoid_formula(&psi);
    let mut psi = psi;
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        if x.sort == Sort::field() {
            out.push(x);
            continue;
        }
        let Some(map) = crate::vfred::onto_map(lang, &x.sort) else {
            return Err(ReductionError::Params(format!("cannot code the universal `{x}` by field elements")));
        };
        let xf = names.fresh_var(&x.name, &Sort::field());
        psi = psi.instantiate(&x, Term::app(map, vec![xf.term()]));
        out.push(xf);
    }
    Ok((out, psi))
}

fn require_ring(lang: &Language) -> Result<(), ReductionError> {
    if lang.has_ring_on(FIELD) {
        Ok(())
    } else {
        Err(ReductionError::Language(format!("{} lacks the ring operations on `field`", lang.name())))
    }
}

fn require_absorbing(desc: &FragmentDescriptor) -> Result<(), ReductionError> {
    if desc.absorbs_exists() {
        Ok(())
    } else {
        Err(ReductionError::Fragment(format!("{desc} does not satisfy ∃F = F")))
    }
}

/// With a `p`-basis named by the constants `cs` (positional):
/// `∀w ∃x̄ (χ_{p,n,r}(w, x̄, c̄) ∧ ψ(x̄, ū))` where `∀x̄ ψ` is the prenex form
/// of `f` relative to `desc`. Universals over the value group or residue
/// field are first moved onto the field through `v` or `res`. Output lies
/// in `∀₁[desc]`.
pub fn tau_param(
    p: u64,
    lang: &Language,
    cs: &[&str],
    desc: &FragmentDescriptor,
    f: &Formula,
) -> Result<Formula, ReductionError> {
    check_p(p)?;
    if cs.is_empty() {
        return Err(ReductionError::Params("a p-basis of at least one constant is required".into()));
    }
    require_ring(lang)?;
    require_absorbing(desc)?;
    for c in cs {
        match lang.symbol(c) {
            Some(s) if s.kind == SymbolKind::Constant && s.result.as_ref().map(|r| r.name()) == Some(FIELD) => {}
            _ => return Err(ReductionError::Language(format!("missing field constant `{c}`"))),
        }
    }
    let (xs, psi) = split_universal(Block::new(Quantifier::Forall, Mode::Unbounded), desc, lang, f)?;
    let (xs, psi) = onto_field(lang, xs, psi, f)?;
    let mut names = FreshNames::avoiding(f);
    names.avoid_formula(&psi);
    let w = names.fresh_var("w", &Sort::field());
    let cterms: Vec<Term> = cs.iter().map(|c| Term::constant(c)).collect();
    let xterms: Vec<Term> = xs.iter().map(Var::term).collect();
    let body = Formula::exists(xs, chi_with(p, &w.term(), &xterms, &cterms).and(psi));
    Ok(Formula::forall([w], body))
}

/// Without parameters:
/// `∀w, z₁…z_n (π_{p,n}(z̄) ∨ ∃x̄ (χ_{p,n,r}(w, x̄, z̄) ∧ ψ(x̄, ū)))`, in
/// `∀_{n+1}[desc]`.
pub fn tau_noparam(
    p: u64,
    n: usize,
    lang: &Language,
    desc: &FragmentDescriptor,
    f: &Formula,
) -> Result<Formula, ReductionError> {
    check_p(p)?;
    if n == 0 {
        return Err(ReductionError::Params("n ≥ 1 is required".into()));
    }
    require_ring(lang)?;
    require_absorbing(desc)?;
    let (xs, psi) = split_universal(Block::new(Quantifier::Forall, Mode::Unbounded), desc, lang, f)?;
    let (xs, psi) = onto_field(lang, xs, psi, f)?;
    let mut names = FreshNames::avoiding(f);
    names.avoid_formula(&psi);
    let w = names.fresh_var("w", &Sort::field());
    let zs: Vec<Var> = (1..=n).map(|i| names.fresh_var(&format!("z{i}"), &Sort::field())).collect();
    let zterms: Vec<Term> = zs.iter().map(Var::term).collect();
    let xterms: Vec<Term> = xs.iter().map(Var::term).collect();
    let coded = Formula::exists(xs, chi_with(p, &w.term(), &xterms, &zterms).and(psi));
    let mut prefix = vec![w];
    prefix.extend(zs);
    Ok(Formula::forall(prefix, pi_with(p, &zterms).or(coded)))
}

/// The free variable of a one-variable formula.
fn sole_free_var(g: &Formula, what: &str) -> Result<Var, ReductionError> {
    let free = g.free_variables();
    match free.iter().collect::<Vec<_>>().as_slice() {
        [v] if v.sort == Sort::field() => Ok((*v).clone()),
        _ => Err(ReductionError::Params(format!("{what} must have exactly one free field variable"))),
    }
}

fn check_gamma(gamma: &Formula) -> Result<Var, ReductionError> {
    let v = sole_free_var(gamma, "γ")?;
    if !mem_fragment(&ring(), &FragmentDescriptor::parse("E")?, gamma)? {
        return Err(ReductionError::NotInFragment("∃ (for γ)".into()));
    }
    Ok(v)
}

/// `η_ν(x) = ∃ȳ, z̄ (⋀ γ(z_i) ∧ x = Σ y_i^{p^ν} z_i)` with `p^{nν}` summands,
/// defining `K^{p^ν}k` when `γ` defines `k`.
pub fn eta_nu(p: u64, n: usize, nu: u32, gamma: &Formula) -> Result<Formula, ReductionError> {
    check_p(p)?;
    let g = check_gamma(gamma)?;
    if nu == 0 {
        return Err(ReductionError::Params("ν ≥ 1 is required".into()));
    }
    Ok(eta_with(p, n, nu, gamma, &g, &Var::field("x").term()))
}

fn eta_with(p: u64, n: usize, nu: u32, gamma: &Formula, g: &Var, x: &Term) -> Formula {
    let count = (p.pow(nu)).pow(n as u32) as usize;
    let mut names = names_avoiding(&[x]);
    let ys: Vec<Var> = (1..=count).map(|i| names.fresh_var(&format!("y{i}"), &Sort::field())).collect();
    let zs: Vec<Var> = (1..=count).map(|i| names.fresh_var(&format!("z{i}"), &Sort::field())).collect();
    let e = p.pow(nu);
    let mut parts: Vec<Formula> = zs.iter().map(|z| gamma.instantiate(g, z.term())).collect();
    parts.push(x.clone().eq(Term::sum(ys.iter().zip(&zs).map(|(y, z)| y.term().pow(e).mul(z.term())))));
    let mut vars = ys;
    vars.extend(zs);
    Formula::exists(vars, Formula::conj(parts))
}

/// `π′(z₁…z_d)`: the tuple is not a `p`-basis of `K` over `K^p k`.
pub fn pi_prime(p: u64, n: usize, d: usize, gamma: &Formula) -> Result<Formula, ReductionError> {
    check_p(p)?;
    let g = check_gamma(gamma)?;
    if d == 0 {
        return Err(ReductionError::Params("d ≥ 1 is required".into()));
    }
    Ok(pi_prime_with(p, n, gamma, &g, &std_vars("z", d)))
}

fn pi_prime_with(p: u64, n: usize, gamma: &Formula, g: &Var, zs: &[Term]) -> Formula {
    let mut names = names_avoiding(&zs.iter().collect::<Vec<_>>());
    let idx = multi_indices(p, zs.len());
    let lam = lambdas(&mut names, idx.len());
    let mut parts: Vec<Formula> = lam.iter().map(|l| eta_with(p, n, 1, gamma, g, &l.term())).collect();
    let sum = Term::sum(idx.iter().zip(&lam).map(|(i, l)| monomial(l.term(), zs, i)));
    parts.push(sum.eq(Term::zero()));
    parts.push(Formula::disj(lam.iter().map(|l| l.term().ne(Term::zero()))));
    Formula::exists(lam.clone(), Formula::conj(parts))
}

/// The exponent `ν ≥ 1` used for `r` coded variables: the least `ν` with
/// `r ≤ p^ν` (so `p^{ν−1} < r ≤ p^ν` whenever `r > p`).
pub fn nu_for(p: u64, r: usize) -> u32 {
    let mut nu = 1;
    while (p.pow(nu) as usize) < r {
        nu += 1;
    }
    nu
}

/// Function fields `k(X)` of a `d`-dimensional variety over a field `k`
/// defined by `γ`, with `[k:k^p] = p^n`. `desc` must be one of `∃`, `∃∀`,
/// `∃∀∃`, …; the output lies in `∀_{d+1}[desc]`.
pub fn tau_funcfield(
    p: u64,
    n: usize,
    d: usize,
    gamma: &Formula,
    desc: &FragmentDescriptor,
    f: &Formula,
) -> Result<Formula, ReductionError> {
    check_p(p)?;
    if d == 0 {
        return Err(ReductionError::Params("d ≥ 1 is required".into()));
    }
    if !desc.is_alternating_from_exists() {
        return Err(ReductionError::Fragment(format!("{desc} is not one of ∃, ∃∀, ∃∀∃, …")));
    }
    let g = check_gamma(gamma)?;
    let lang = ring();
    let (xs, psi) = split_universal(Block::new(Quantifier::Forall, Mode::Unbounded), desc, &lang, f)?;
    let r = xs.len();
    let nu = nu_for(p, r);
    let side = p.pow(nu);
    if (side as usize).pow(d as u32) > 1 << 16 {
        return Err(ReductionError::Params("coding needs too many auxiliary variables".into()));
    }

    let mut names = FreshNames::avoiding(f);
    names.avoid_formula(gamma);
    let w = names.fresh_var("w", &Sort::field());
    let zs: Vec<Var> = (1..=d).map(|i| names.fresh_var(&format!("z{i}"), &Sort::field())).collect();
    let zterms: Vec<Term> = zs.iter().map(Var::term).collect();
    let idx = multi_indices(side, d);
    let lam = lambdas(&mut names, idx.len());

    let v = names.fresh_var("v", &Sort::field());
    let eta = eta_with(p, n, nu, gamma, &g, &v.term());
    let eta_neg = prnx(&FragmentDescriptor::quantifier_free(), &lang, &eta.clone().not())?.formula;
    let rel = relativize(&psi, &eta, &eta_neg)?;
    // x_i ↦ λ_{i−1, 0, …, 0}
    let stride = idx.len() / side as usize;
    let map: BTreeMap<Var, Var> = xs.iter().enumerate().map(|(i, x)| (x.clone(), lam[i * stride].clone())).collect();
    let rel = rel.substitute(&map).map_err(|e| ReductionError::Params(e.to_string()))?;

    let mut parts = vec![w.term().eq(Term::sum(idx.iter().zip(&lam).map(|(i, l)| monomial(l.term(), &zterms, i))))];
    parts.extend(lam.iter().map(|l| eta_with(p, n, nu, gamma, &g, &l.term())));
    parts.extend(f.free_variables().iter().map(|u| gamma.instantiate(&g, u.term())));
    parts.push(rel);
    let body = Formula::exists(lam, pi_prime_with(p, n, gamma, &g, &zterms).or(Formula::conj(parts)));
    let mut prefix = vec![w];
    prefix.extend(zs);
    let out = Formula::forall(prefix, body);
    debug_assert!(well_sorted(&lang, &out).is_empty());
    Ok(out)
}

/// The target descriptors: `∀₁[F]`, `∀_{n+1}[F]`, `∀_{d+1}[F]`.
pub fn target_param(desc: &FragmentDescriptor) -> FragmentDescriptor {
    prepend_prefix(Quantifier::Forall, 1, desc)
}

pub fn target_noparam(n: usize, desc: &FragmentDescriptor) -> FragmentDescriptor {
    prepend_prefix(Quantifier::Forall, n + 1, desc)
}

pub fn target_funcfield(d: usize, desc: &FragmentDescriptor) -> FragmentDescriptor {
    prepend_prefix(Quantifier::Forall, d + 1, desc)
}

/// `∀F`, the source descriptor of all three maps.
pub fn source(desc: &FragmentDescriptor) -> FragmentDescriptor {
    prepend_unbounded(Quantifier::Forall, desc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::signature::extend_with_constants;

    fn e() -> FragmentDescriptor {
        "E".parse().unwrap()
    }

    #[test]
    fn chi_small_cases() {
        assert_eq!(chi(3, 2, 0).unwrap(), Formula::Top);
        assert_eq!(chi(3, 2, 1).unwrap().to_string(), "(= x y1)");
        assert_eq!(
            chi(2, 1, 2).unwrap().to_string(),
            "(exists (lam0 field) (exists (lam1 field) (and (= x (+ (* lam0 lam0) (* (* lam1 lam1) z1))) \
             (and (= y1 lam0) (= y2 lam1)))))"
        );
    }

    #[test]
    fn chi_recursion_binds_fresh_w() {
        let c = chi(2, 1, 4).unwrap();
        let free: Vec<String> = c.free_variables().into_iter().map(|v| v.name).collect();
        assert_eq!(free, ["x", "y1", "y2", "y3", "y4", "z1"]);
        assert!(c.to_string().contains("(exists (w'1 field)"));
        assert!(mem_fragment(&ring(), &e(), &c).unwrap());
    }

    #[test]
    fn pi_shape() {
        assert_eq!(
            pi(2, 1).unwrap().to_string(),
            "(exists (lam0 field) (exists (lam1 field) (and (= (+ (* lam0 lam0) (* (* lam1 lam1) z1)) 0) \
             (or (not (= lam0 0)) (not (= lam1 0))))))"
        );
        assert_eq!(pi(3, 2).unwrap().free_variables().len(), 2);
        assert!(pi(4, 1).is_err());
    }

    #[test]
    fn tau_param_example() {
        let lang = extend_with_constants(&ring(), &["c1"], FIELD).unwrap();
        let f =
            parse_formula(&lang, "(forall (x1 field) (forall (x2 field) (exists (v field) (= (* x1 x2) (+ v u)))))")
                .unwrap();
        let t = tau_param(2, &lang, &["c1"], &e(), &f).unwrap();
        assert!(t
            .to_string()
            .starts_with("(forall (w field) (exists (x1 field) (exists (x2 field) (and (exists (lam0 field)"));
        assert!(mem_fragment(&lang, &target_param(&e()), &t).unwrap());
        assert_eq!(t.free_variables(), f.free_variables());
        assert!(tau_param(2, &ring(), &["c1"], &e(), &f).is_err());
    }

    #[test]
    fn tau_param_r0() {
        let lang = extend_with_constants(&ring(), &["c1"], FIELD).unwrap();
        let f = parse_formula(&lang, "(exists (v field) (= v u))").unwrap();
        let t = tau_param(2, &lang, &["c1"], &e(), &f).unwrap();
        assert_eq!(t.to_string(), "(forall (w field) (and true (exists (v field) (= v u))))");
    }

    #[test]
    fn tau_noparam_example() {
        let f = parse_formula(&ring(), "(forall (x field) (exists (v field) (= (* x v) u)))").unwrap();
        let t = tau_noparam(2, 1, &ring(), &e(), &f).unwrap();
        assert!(t.to_string().starts_with("(forall (w field) (forall (z1 field) (or (exists (lam0 field)"));
        assert!(mem_fragment(&ring(), &target_noparam(1, &e()), &t).unwrap());
        assert!(!mem_fragment(&ring(), &target_noparam(0, &e()), &t).unwrap());
        assert_eq!(t.free_variables(), f.free_variables());
    }

    #[test]
    fn nu_choice() {
        assert_eq!(nu_for(2, 0), 1);
        assert_eq!(nu_for(2, 1), 1);
        assert_eq!(nu_for(2, 2), 1);
        assert_eq!(nu_for(2, 3), 2);
        assert_eq!(nu_for(2, 5), 3);
        assert_eq!(nu_for(3, 3), 1);
    }

    #[test]
    fn param_moves_group_universals_to_the_field() {
        let lang = extend_with_constants(&crate::signature::valued_field(), &["t"], FIELD).unwrap();
        let f = parse_formula(&lang, "(forall (g group) (<=G 0G g))").unwrap();
        let out = tau_param(2, &lang, &["t"], &e(), &f).unwrap();
        assert!(out.to_string().contains("(<=G 0G (v g'1))"), "{out}");
        assert!(well_sorted(&lang, &out).is_empty());
    }

    #[test]
    fn tau_funcfield_example() {
        let gamma = parse_formula(&ring(), "(exists (t field) (= x (* t t)))").unwrap();
        let f = parse_formula(&ring(), "(forall (x field) (exists (y field) (= (* x y) u)))").unwrap();
        let t = tau_funcfield(2, 1, 1, &gamma, &e(), &f).unwrap();
        assert!(t.to_string().starts_with(
            "(forall (w field) (forall (z1 field) (exists (lam0 field) (exists (lam1 field) (or (exists (lam0 field)"
        ));
        assert!(mem_fragment(&ring(), &target_funcfield(1, &e()), &t).unwrap());
        assert_eq!(t.free_variables(), f.free_variables());
        let ea: FragmentDescriptor = "E A".parse().unwrap();
        let g =
            parse_formula(&ring(), "(forall (x field) (exists (y field) (forall (z field) (= (* x y) z))))").unwrap();
        let t2 = tau_funcfield(2, 1, 2, &gamma, &ea, &g).unwrap();
        assert!(mem_fragment(&ring(), &target_funcfield(2, &ea), &t2).unwrap());
        assert!(tau_funcfield(2, 1, 1, &gamma, &"A E".parse().unwrap(), &f).is_err());
    }
}
