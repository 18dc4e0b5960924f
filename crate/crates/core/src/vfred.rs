//! Reductions for valued fields: the uniformizer formula, removing a named
//! uniformizer, and two reductions for a finite residue field.

use crate::error::ReductionError;
use crate::formula::{Formula, FreshNames, Quantifier, Term, Var};
use crate::fpalg::prime_power;
use crate::fragments::{mem_fragment, prnx, Block, FragmentDescriptor, Mode};
use crate::pcoding::split_universal;
use crate::signature::{extend_with_constants, remove_constants, Language, Sort, FIELD, GROUP, RESIDUE};
use std::collections::BTreeMap;

/// Largest number of `ψ` copies [`tau_finite_residue`] will produce.
pub const MAX_COPIES: u64 = 1 << 16;

fn v(x: &Var) -> Term {
    Term::app("v", vec![x.term()])
}

fn zero_g() -> Term {
    Term::constant("0G")
}

/// The matrix `η(x, z) = v(x) > 0 ∧ (v(z) ≥ v(x) ∨ v(z) ≤ 0)`.
pub fn eta_with(x: &Var, z: &Var) -> Formula {
    Formula::rel("<G", vec![zero_g(), v(x)])
        .and(Formula::rel("<=G", vec![v(x), v(z)]).or(Formula::rel("<=G", vec![v(z), zero_g()])))
}

/// `(ν(x), η(x, z))` with `ν = ∀z η`, defining the uniformizers of a
/// discretely valued field.
pub fn uniformizer_formula() -> (Formula, Formula) {
    let (x, z) = (Var::field("x"), Var::field("z"));
    let eta = eta_with(&x, &z);
    (Formula::forall([z], eta.clone()), eta)
}

fn require_val(lang: &Language) -> Result<(), ReductionError> {
    for s in ["v", "<G", "<=G", "0G"] {
        if lang.symbol(s).is_none() {
            return Err(ReductionError::Language(format!("{} lacks `{s}`", lang.name())));
        }
    }
    if !lang.has_sort(&Sort::new(GROUP)) {
        return Err(ReductionError::Language(format!("{} lacks the value group sort", lang.name())));
    }
    Ok(())
}

fn require_field_constant(lang: &Language, c: &str) -> Result<(), ReductionError> {
    match lang.symbol(c) {
        Some(s) if s.arity() == 0 && s.result.as_ref().map(|r| r.name()) == Some(FIELD) => Ok(()),
        _ => Err(ReductionError::Language(format!("`{c}` is not a field-sort constant of {}", lang.name()))),
    }
}

/// `∀ₙ[∃₁[F]]`.
pub fn drop_pi_source(n: usize, desc: &FragmentDescriptor) -> FragmentDescriptor {
    desc.prepend(Block::new(Quantifier::Exists, Mode::Prefix(1)))
        .prepend(Block::new(Quantifier::Forall, Mode::Prefix(n)))
}

/// `φ = ∀y₁…yₙ ∃z ψ(ū, t, ȳ, z)` over `lang` (which names `t`) ↦
/// `∀x ∀ȳ ∃z (¬η(x, z) ∨ ψ(ū, x, ȳ, z))` over `lang` without `t`.
///
/// Fewer than `n` universals and a missing `∃z` are allowed (the latter gets
/// a vacuous field-sort `z`). Returns the output language alongside.
pub fn tau_drop_pi(
    n: usize,
    desc: &FragmentDescriptor,
    lang: &Language,
    t: &str,
    f: &Formula,
) -> Result<(Formula, Language), ReductionError> {
    require_val(lang)?;
    require_field_constant(lang, t)?;
    let src = drop_pi_source(n, desc);
    if !mem_fragment(lang, &src, f)? {
        return Err(ReductionError::NotInFragment(src.to_string()));
    }
    let mut names = FreshNames::avoiding(f);
    let mut ys = Vec::new();
    let mut cur = f;
    while let Formula::Forall(y, body) = cur {
        if desc.contains(cur) || ys.len() == n {
            break;
        }
        ys.push(y.clone());
        cur = body;
    }
    let (z, psi) = match cur {
        Formula::Exists(z, body) if z.sort == Sort::field() && desc.contains(body) => {
            (z.clone(), body.as_ref().clone())
        }
        _ if desc.contains(cur) => (names.fresh_var("z", &Sort::field()), cur.clone()),
        _ => return Err(ReductionError::NotInFragment(src.to_string())),
    };
    if z.sort != Sort::field() {
        return Err(ReductionError::Params(format!("the existential variable `{z}` must range over the field")));
    }
    let x = names.fresh_var("x", &Sort::field());
    let body = eta_with(&x, &z).not().or(psi.replace_constant(t, &x.term()));
    let mut bound = vec![x];
    bound.extend(ys);
    let out = Formula::forall(bound, Formula::exists([z], body));
    let target = remove_constants(lang, &[t])?;
    Ok((out, target))
}

/// [`tau_drop_pi`] after bringing `f` into the shape `∀ₙ[∃₁[F]]` by `prnx`.
pub fn tau_drop_pi_prenex(
    n: usize,
    desc: &FragmentDescriptor,
    lang: &Language,
    t: &str,
    f: &Formula,
) -> Result<(Formula, Language), ReductionError> {
    let pr = prnx(desc, lang, f)?;
    if !desc.contains(&pr.matrix) {
        return Err(ReductionError::NotInFragment(format!("prenex matrix is not in {desc}")));
    }
    tau_drop_pi(n, desc, lang, t, &pr.formula)
}

/// The unrestricted form for arbitrary `φ(t)`: `∀x ∃z (¬η(x, z) ∨ φ(x))`
/// with `z` fresh.
pub fn tau_drop_pi_full(lang: &Language, t: &str, f: &Formula) -> Result<(Formula, Language), ReductionError> {
    require_val(lang)?;
    require_field_constant(lang, t)?;
    let d = crate::formula::well_sorted(lang, f);
    if !d.is_empty() {
        return Err(crate::fragments::FragmentError::IllSorted(d).into());
    }
    let mut names = FreshNames::avoiding(f);
    let x = names.fresh_var("x", &Sort::field());
    let z = names.fresh_var("z", &Sort::field());
    let body = eta_with(&x, &z).not().or(f.replace_constant(t, &x.term()));
    Ok((Formula::forall([x], Formula::exists([z], body)), remove_constants(lang, &[t])?))
}

/// `η_q(z̄) = ⋀ z_j^q = z_j ∧ ⋀_{i<j} z_i ≠ z_j`.
pub fn eta_q(q: u64, zs: &[Var]) -> Formula {
    Formula::conj(eta_q_parts(q, zs))
}

fn eta_q_parts(q: u64, zs: &[Var]) -> Vec<Formula> {
    let mut parts: Vec<Formula> = zs.iter().map(|z| z.term().pow(q).eq(z.term())).collect();
    parts.extend(distinct(zs));
    parts
}

fn distinct(zs: &[Var]) -> Vec<Formula> {
    let mut out = Vec::new();
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            out.push(zs[i].term().ne(zs[j].term()));
        }
    }
    out
}

fn check_q(q: u64) -> Result<(), ReductionError> {
    match prime_power(q) {
        Some(_) if q <= MAX_COPIES => Ok(()),
        Some(_) => Err(ReductionError::Params(format!("q = {q} is too large"))),
        None => Err(ReductionError::Params(format!("{q} is not a prime power"))),
    }
}

/// For a sentence `φ` in the closure of `∀₁[∃]` over `lang` (which has the
/// ring on the field sort), each component `∀x ψ(x)` becomes
/// `∃y, z₁…z_q (η_q(z̄) ∧ y·t = 1 ∧ ψ(y) ∧ ⋀ψ(z_j + t) ∧ ⋀ψ(z_j))`;
/// existential components are kept. A universal over the value group or the
/// residue field is first moved onto the field through `v` or `res`. The
/// result is existential over `lang(t)`, returned alongside.
pub fn tau_a1e_to_e(q: u64, lang: &Language, f: &Formula) -> Result<(Formula, Language), ReductionError> {
    check_q(q)?;
    if !lang.has_ring_on(FIELD) {
        return Err(ReductionError::Language(format!("{} lacks the ring operations on `field`", lang.name())));
    }
    if lang.symbol("t").is_some() {
        return Err(ReductionError::Language(format!("{} already has a symbol `t`", lang.name())));
    }
    if !f.is_sentence() {
        return Err(ReductionError::Params("input must be a sentence".into()));
    }
    let target = extend_with_constants(lang, &["t"], FIELD)?;
    let closed = FragmentDescriptor::parse("A1 E").expect("descriptor");
    let out = if mem_fragment(lang, &closed, f)? {
        decompose(q, lang, f)?
    } else {
        let pr = prnx(&FragmentDescriptor::parse("E").expect("descriptor"), lang, f)?;
        match pr.prefix.as_slice() {
            [(Quantifier::Forall, x)] => leaf(q, lang, x, &pr.matrix)?,
            _ => return Err(ReductionError::NotInFragment("A1[E]".into())),
        }
    };
    Ok((out, target))
}

fn decompose(q: u64, lang: &Language, f: &Formula) -> Result<Formula, ReductionError> {
    let e = FragmentDescriptor::parse("E").expect("descriptor");
    Ok(match f {
        _ if e.contains(f) => f.clone(),
        Formula::Forall(x, body) if e.contains(body) => leaf(q, lang, x, body)?,
        Formula::And(a, b) => decompose(q, lang, a)?.and(decompose(q, lang, b)?),
        Formula::Or(a, b) => decompose(q, lang, a)?.or(decompose(q, lang, b)?),
        _ => return Err(ReductionError::NotInFragment("A1 E".into())),
    })
}

/// Surjections from the field onto the other sorts of `𝔏_val` (with
/// `v(0) = ∞`), used to move a universal quantifier onto the field sort.
pub(crate) fn onto_map(lang: &Language, sort: &Sort) -> Option<&'static str> {
    let name = match sort.name() {
        GROUP => "v",
        RESIDUE => "res",
        _ => return None,
    };
    let s = lang.symbol(name)?;
    (s.args.len() == 1 && s.args[0] == Sort::field() && s.result.as_ref() == Some(sort)).then_some(name)
}

fn leaf(q: u64, lang: &Language, x: &Var, psi: &Formula) -> Result<Formula, ReductionError> {
    if x.sort != Sort::field() {
        let Some(map) = onto_map(lang, &x.sort) else {
            return Err(ReductionError::Params(format!("cannot move the universal `{x}` onto the field")));
        };
        let mut names = FreshNames::avoiding(psi);
        let xf = names.fresh_var(&x.name, &Sort::field());
        let moved = psi.instantiate(x, Term::app(map, vec![xf.term()]));
        return leaf(q, lang, &xf, &moved);
    }
    let mut names = FreshNames::avoiding(psi);
    names.reserve(&x.name);
    let y = names.fresh_var("y", &Sort::field());
    let zs: Vec<Var> = (1..=q).map(|j| names.fresh_var(&format!("z{j}"), &Sort::field())).collect();
    let t = Term::constant("t");
    let mut parts = eta_q_parts(q, &zs);
    parts.extend([y.term().mul(t.clone()).eq(Term::one()), psi.instantiate(x, y.term())]);
    parts.extend(zs.iter().map(|z| psi.instantiate(x, z.term().add(t.clone()))));
    parts.extend(zs.iter().map(|z| psi.instantiate(x, z.term())));
    let mut bound = vec![y];
    bound.extend(zs);
    Ok(Formula::exists(bound, Formula::conj(parts)))
}

/// `∀^𝐤F`: universals over the residue sort in front of `F`.
pub fn residue_universal(desc: &FragmentDescriptor) -> FragmentDescriptor {
    desc.prepend(Block::restricted(Quantifier::Forall, Mode::Unbounded, RESIDUE))
}

/// `∃^𝐤[F]`.
pub fn residue_existential_prefix(desc: &FragmentDescriptor) -> FragmentDescriptor {
    desc.prepend(Block::restricted(Quantifier::Exists, Mode::PrefixAny, RESIDUE))
}

/// `φ = ∀^𝐤 x₁…x_r ψ(x̄, ū)` ↦
/// `∃^𝐤 z₁…z_q (⋀_{i<j} z_i ≠ z_j ∧ ⋀_{j̄ ∈ [q]^r} ψ(z_{j₁},…,z_{j_r}, ū))`,
/// equivalent to `φ` whenever the residue field has exactly `q` elements.
pub fn tau_finite_residue(
    q: u64,
    desc: &FragmentDescriptor,
    lang: &Language,
    f: &Formula,
) -> Result<Formula, ReductionError> {
    check_q(q)?;
    let residue = Sort::new(RESIDUE);
    if !lang.has_sort(&residue) {
        return Err(ReductionError::Language(format!("{} has no residue sort", lang.name())));
    }
    let outer = Block::restricted(Quantifier::Forall, Mode::Unbounded, RESIDUE);
    let (xs, psi) = split_universal(outer, desc, lang, f)?;
    if let Some(x) = xs.iter().find(|x| x.sort != residue) {
        return Err(ReductionError::NotInFragment(format!("`{x}` is not a residue variable")));
    }
    let copies = u32::try_from(xs.len()).ok().and_then(|r| q.checked_pow(r)).filter(|&c| c <= MAX_COPIES);
    let Some(copies) = copies else {
        return Err(ReductionError::Params(format!("{q}^{} copies exceed {MAX_COPIES}", xs.len())));
    };
    let mut names = FreshNames::avoiding(f);
    for x in &xs {
        names.reserve(&x.name);
    }
    let zs: Vec<Var> = (1..=q).map(|j| names.fresh_var(&format!("z{j}"), &residue)).collect();
    let mut parts = distinct(&zs);
    for k in 0..copies {
        let mut rest = k;
        let mut map = BTreeMap::new();
        for x in xs.iter().rev() {
            map.insert(x.clone(), zs[(rest % q) as usize].term());
            rest /= q;
        }
        parts.push(psi.substitute_terms(&map));
    }
    Ok(Formula::exists(zs, Formula::conj(parts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, well_sorted};
    use crate::models::{all_assignments, eval, finite_field, trivially_valued_field};
    use crate::signature::{ring, valued_field};

    fn val_t() -> Language {
        extend_with_constants(&valued_field(), &["t"], FIELD).unwrap()
    }

    fn d(s: &str) -> FragmentDescriptor {
        s.parse().unwrap()
    }

    #[test]
    fn uniformizer_shape() {
        let (nu, eta) = uniformizer_formula();
        assert_eq!(nu.to_string(), "(forall (z field) (and (<G 0G (v x)) (or (<=G (v x) (v z)) (<=G (v z) 0G))))");
        assert!(eta.is_quantifier_free());
        assert_eq!(nu.free_variables().into_iter().collect::<Vec<_>>(), vec![Var::field("x")]);
        assert!(mem_fragment(&valued_field(), &d("A1[F0]"), &nu).unwrap());
    }

    #[test]
    fn drop_pi_examples() {
        let f = parse_formula(&val_t(), "(forall (y field) (exists (z field) (= (* z t) (+ y u))))").unwrap();
        let (out, lang) = tau_drop_pi(1, &d("E"), &val_t(), "t", &f).unwrap();
        assert_eq!(
            out.to_string(),
            "(forall (x field) (forall (y field) (exists (z field) (or (not (and (<G 0G (v x)) \
             (or (<=G (v x) (v z)) (<=G (v z) 0G)))) (= (* z x) (+ y u))))))"
        );
        assert_eq!(lang, valued_field());
        assert!(mem_fragment(&lang, &d("A2[E1[E]]"), &out).unwrap());
        assert_eq!(out.free_variables(), f.free_variables());

        let g = parse_formula(&val_t(), "(exists (z field) (= z t))").unwrap();
        let (out, _) = tau_drop_pi(0, &d("F0"), &val_t(), "t", &g).unwrap();
        assert!(out.to_string().starts_with("(forall (x field) (exists (z field) (or (not"));
    }

    #[test]
    fn drop_pi_rejects_shape() {
        let f = parse_formula(&val_t(), "(exists (z field) (forall (y field) (= (* z t) y)))").unwrap();
        assert!(tau_drop_pi(1, &d("F0"), &val_t(), "t", &f).is_err());
        let g = parse_formula(&val_t(), "(exists (z field) (forall (y field) (= (* z t) y)))").unwrap();
        assert!(tau_drop_pi_prenex(1, &d("F0"), &val_t(), "t", &g).is_err());
    }

    #[test]
    fn a1e_template_q2() {
        let f = parse_formula(&ring(), "(forall (x field) (exists (w field) (= (* w x) x)))").unwrap();
        let (out, lang) = tau_a1e_to_e(2, &ring(), &f).unwrap();
        let psi = |s: &str| format!("(exists (w field) (= (* w {s}) {s}))");
        let expected = format!(
            "(exists (y field) (exists (z1 field) (exists (z2 field) (and (= (* z1 z1) z1) (and (= (* z2 z2) z2) \
             (and (not (= z1 z2)) (and (= (* y t) 1) (and {} (and {} (and {} (and {} {})))))))))))",
            psi("y"),
            psi("(+ z1 t)"),
            psi("(+ z2 t)"),
            psi("z1"),
            psi("z2")
        );
        assert_eq!(out.to_string(), expected);
        assert!(mem_fragment(&lang, &d("E"), &out).unwrap());
    }

    #[test]
    fn a1e_moves_residue_universals_to_the_field() {
        let val = valued_field();
        let f = parse_formula(&val, "(forall (a residue) (exists (b residue) (= (+k a b) 0k)))").unwrap();
        let (out, lang) = tau_a1e_to_e(2, &val, &f).unwrap();
        assert!(out.to_string().contains("(+k (res y) b)"), "{out}");
        assert!(mem_fragment(&lang, &FragmentDescriptor::parse("E").unwrap(), &out).unwrap());
        let g = parse_formula(&val, "(forall (g group) (<=G g infG))").unwrap();
        assert!(tau_a1e_to_e(2, &val, &g).unwrap().0.to_string().contains("(<=G (v y) infG)"));
        assert!(tau_a1e_to_e(2, &ring(), &parse_formula(&ring(), "(forall (x field) (= x x))").unwrap()).is_ok());
    }

    #[test]
    fn a1e_is_uniform_in_the_language() {
        let f = parse_formula(&ring(), "(forall (x field) (exists (w field) (= (* w w) x)))").unwrap();
        let (small, _) = tau_a1e_to_e(3, &ring(), &f).unwrap();
        let (big, big_lang) = tau_a1e_to_e(3, &valued_field(), &f).unwrap();
        assert_eq!(small, big);
        assert!(well_sorted(&big_lang, &big).is_empty());
    }

    #[test]
    fn eta_q_witnesses_in_f3() {
        let s = finite_field(3).unwrap();
        let zs: Vec<Var> = (1..=3).map(|j| Var::field(&format!("z{j}"))).collect();
        let eta = eta_q(3, &zs);
        let sols: Vec<_> = all_assignments(&s, &zs).into_iter().filter(|a| eval(&s, &eta, a).unwrap()).collect();
        assert_eq!(sols.len(), 6);
        for a in sols {
            let mut vals: Vec<u32> = a.values().copied().collect();
            vals.sort();
            assert_eq!(vals, vec![0, 1, 2]);
        }
    }

    #[test]
    fn finite_residue_template() {
        let lang = valued_field();
        let f = parse_formula(&lang, "(forall (a residue) (= (*k a a) a))").unwrap();
        let out = tau_finite_residue(2, &d("F0"), &lang, &f).unwrap();
        assert_eq!(
            out.to_string(),
            "(exists (z1 residue) (exists (z2 residue) (and (not (= z1 z2)) (and (= (*k z1 z1) z1) (= (*k z2 z2) z2)))))"
        );
        assert!(mem_fragment(&lang, &residue_existential_prefix(&d("F0")), &out).unwrap());
        let g = parse_formula(&lang, "(forall (a residue) (forall (b residue) (= (+k a b) (+k b a))))").unwrap();
        let out = tau_finite_residue(2, &d("F0"), &lang, &g).unwrap();
        assert_eq!(out.to_string().matches("(= (+k").count(), 4);
        let h = parse_formula(&lang, "(forall (a field) (= a a))").unwrap();
        assert!(tau_finite_residue(2, &d("F0"), &lang, &h).is_err());
    }

    #[test]
    fn finite_residue_agrees_on_size_q() {
        let lang = valued_field();
        for q in [2, 3, 4] {
            let s = trivially_valued_field(q).unwrap();
            for src in [
                "(forall (a residue) (forall (b residue) (or (= (*k a b) 0k) (not (= a 0k)))))",
                "(forall (a residue) (not (= (*k a a) (+k 1k 1k))))",
                "(forall (a residue) (or (= a u) (not (= a u))))",
            ] {
                let f = parse_formula(&lang, src).unwrap();
                let out = tau_finite_residue(q, &d("F0"), &lang, &f).unwrap();
                let us: Vec<Var> = f.free_variables().into_iter().collect();
                for a in all_assignments(&s, &us) {
                    assert_eq!(eval(&s, &f, &a).unwrap(), eval(&s, &out, &a).unwrap(), "{q} {src}");
                }
            }
        }
    }
}
