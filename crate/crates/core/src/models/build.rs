use super::{FiniteStructure, Interp, ModelError};
use crate::formula::{Formula, Var};
use crate::fpalg::{prime_power, Poly};
use crate::signature::{graph, ring, valued_field, Sort, VERTEX};

fn tournament(n: usize, arcs: &[(u32, u32)]) -> FiniteStructure {
    let mut s = FiniteStructure::new(&graph(), vec![n]).expect("nonempty");
    s.set_relation("E", |a| arcs.contains(&(a[0], a[1]))).expect("E");
    s
}

/// One arc `0 → 1`.
pub fn gamma2() -> FiniteStructure {
    tournament(2, &[(0, 1)])
}

/// The 3-cycle `0 → 1 → 2 → 0`.
pub fn gamma3() -> FiniteStructure {
    tournament(3, &[(0, 1), (1, 2), (2, 0)])
}

/// The 3-cycle on `0, 1, 2` plus a source `3` with arcs to all of them.
pub fn gamma4() -> FiniteStructure {
    tournament(4, &[(0, 1), (1, 2), (2, 0), (3, 0), (3, 1), (3, 2)])
}

/// Disjoint union of one-sorted relational structures over the same
/// language; elements are renumbered consecutively, first part first.
pub fn disjoint_union(parts: &[&FiniteStructure]) -> Result<FiniteStructure, ModelError> {
    let first = parts.first().ok_or_else(|| ModelError::Invalid("empty union".into()))?;
    let lang = first.language().clone();
    if lang.sorts().len() != 1 {
        return Err(ModelError::Invalid("disjoint union needs a one-sorted language".into()));
    }
    let mut offsets = Vec::new();
    let mut total = 0;
    for p in parts {
        if p.language() != &lang {
            return Err(ModelError::LanguageMismatch);
        }
        p.validate()?;
        offsets.push(total);
        total += p.sizes[0];
    }
    let locate = |x: u32| -> (usize, u32) {
        let i = offsets.iter().rposition(|&o| o <= x as usize).expect("offset");
        (i, x - offsets[i] as u32)
    };
    let mut out = FiniteStructure::new(&lang, vec![total])?;
    for sym in lang.symbols() {
        if sym.result.is_some() {
            return Err(ModelError::Invalid("disjoint union needs a relational language".into()));
        }
        out.set_relation(&sym.name, |args| {
            let located: Vec<(usize, u32)> = args.iter().map(|&x| locate(x)).collect();
            let part = located.first().map_or(0, |l| l.0);
            located.iter().all(|l| l.0 == part)
                && parts[part].holds(&sym.name, &located.iter().map(|l| l.1).collect::<Vec<_>>()).unwrap_or(false)
        })?;
    }
    Ok(out)
}

/// `(N_c, M_c)` with `N_c = c·Γ₂ ⊔ c·Γ₄` and `M_c = N_c ⊔ Γ₃`.
pub fn tournament_models(c: usize) -> Result<(FiniteStructure, FiniteStructure), ModelError> {
    if c == 0 {
        return Err(ModelError::Invalid("at least one copy is required".into()));
    }
    let (g2, g3, g4) = (gamma2(), gamma3(), gamma4());
    let mut parts: Vec<&FiniteStructure> = vec![&g2; c];
    parts.extend(std::iter::repeat_n(&g4, c));
    let n = disjoint_union(&parts)?;
    parts.push(&g3);
    let m = disjoint_union(&parts)?;
    Ok((n, m))
}

/// The `∀²∃` graph sentence separating `N` from `M`: every vertex is a sink,
/// a source, or has three distinct neighbours.
pub fn example_sentence() -> Formula {
    let v = Sort::new(VERTEX);
    let x = Var::new("x", &v);
    let y = Var::new("y", &v);
    let z: Vec<Var> = (1..=3).map(|i| Var::new(&format!("z{i}"), &v)).collect();
    let e = |a: &Var, b: &Var| Formula::rel("E", vec![a.term(), b.term()]);
    let mut parts = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                parts.push(z[i].term().eq(z[j].term()).not());
            }
        }
    }
    for zi in &z {
        parts.push(e(&x, zi).or(e(zi, &x)));
    }
    let body = Formula::disj([
        Formula::forall([y.clone()], e(&x, &y).not()),
        Formula::forall([y.clone()], e(&y, &x).not()),
        Formula::exists(z, Formula::conj(parts)),
    ]);
    Formula::forall([x], body)
}

/// `ℤ/m` in the ring language; rational literals are read modulo `m`.
pub fn modular_ring(m: u64) -> Result<FiniteStructure, ModelError> {
    if !(2..=u32::MAX as u64).contains(&m) {
        return Err(ModelError::Invalid(format!("modulus {m} must be at least 2")));
    }
    let mut s = FiniteStructure::new(&ring(), vec![m as usize])?;
    set_ring_ops(&mut s, "", m as usize, &|a, b| ((a as u64 + b as u64) % m) as u32, &|a, b| {
        ((a as u64 * b as u64) % m) as u32
    })?;
    s.set_literal_modulus(m);
    Ok(s)
}

/// Irreducible polynomials defining `𝔽_{p^k}` for `p^k ≤ 64`, `k ≥ 2`
/// (coefficients from the constant term up). The primitive element is the
/// class of the variable; element `Σ cᵢ·pⁱ` encodes `Σ cᵢ·αⁱ`.
const MODULI: &[(u64, u32, &[u64])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 2, &[3, 6, 1]),
];

/// The irreducible polynomial used for `𝔽_q`, if `q` is a proper prime power
/// in the table.
pub fn field_modulus(q: u64) -> Option<Poly> {
    let (p, k) = prime_power(q)?;
    MODULI.iter().find(|m| m.0 == p && m.1 == k).map(|m| Poly::new(p, m.2.to_vec()))
}

fn digits(x: u32, p: u64, k: u32) -> Vec<u64> {
    let mut x = x as u64;
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(poly: &Poly, p: u64, k: u32) -> u32 {
    (0..k as usize).rev().fold(0u64, |acc, i| acc * p + poly.coeff(i)) as u32
}

/// `𝔽_q` for a prime power `q ≤ 64`, in the ring language.
pub fn finite_field(q: u64) -> Result<FiniteStructure, ModelError> {
    let (p, k) = prime_power(q).ok_or_else(|| ModelError::Invalid(format!("{q} is not a prime power")))?;
    if q > 64 {
        return Err(ModelError::Invalid(format!("field size {q} exceeds 64")));
    }
    if k == 1 {
        return modular_ring(q);
    }
    let mut s = FiniteStructure::new(&ring(), vec![q as usize])?;
    let (add, mul) = field_ops(q)?;
    set_ring_ops(&mut s, "", q as usize, &add, &mul)?;
    s.set_literal_modulus(p);
    Ok(s)
}

type BinOp = Box<dyn Fn(u32, u32) -> u32>;

fn field_ops(q: u64) -> Result<(BinOp, BinOp), ModelError> {
    let (p, k) = prime_power(q).ok_or_else(|| ModelError::Invalid(format!("{q} is not a prime power")))?;
    if k == 1 {
        return Ok((
            Box::new(move |a, b| ((a as u64 + b as u64) % q) as u32),
            Box::new(move |a, b| ((a as u64 * b as u64) % q) as u32),
        ));
    }
    let modulus = field_modulus(q).ok_or_else(|| ModelError::Invalid(format!("no modulus for {q}")))?;
    let add = move |a: u32, b: u32| {
        let s = Poly::new(p, digits(a, p, k)).add(&Poly::new(p, digits(b, p, k)));
        undigits(&s, p, k)
    };
    let mul = move |a: u32, b: u32| {
        let m = Poly::new(p, digits(a, p, k)).mul(&Poly::new(p, digits(b, p, k)));
        undigits(&m.div_rem(&modulus).1, p, k)
    };
    Ok((Box::new(add), Box::new(mul)))
}

fn set_ring_ops(
    s: &mut FiniteStructure,
    suffix: &str,
    n: usize,
    add: &dyn Fn(u32, u32) -> u32,
    mul: &dyn Fn(u32, u32) -> u32,
) -> Result<(), ModelError> {
    let neg: Vec<u32> =
        (0..n as u32).map(|a| (0..n as u32).find(|&b| add(a, b) == 0).expect("additive inverse")).collect();
    s.set_function(&format!("+{suffix}"), |x| add(x[0], x[1]))?;
    s.set_function(&format!("-{suffix}"), |x| add(x[0], neg[x[1] as usize]))?;
    s.set_function(&format!("*{suffix}"), |x| mul(x[0], x[1]))?;
    s.set_constant(&format!("0{suffix}"), 0)?;
    s.set_constant(&format!("1{suffix}"), 1)?;
    Ok(())
}

/// `𝔽_q` with the trivial valuation, as a valued-field structure: the value
/// group carrier is `{0_Γ, ∞_Γ}` (elements 0 and 1), `v(x) = 0_Γ` for
/// `x ≠ 0`, and the residue map is the identity onto a copy of `𝔽_q`.
pub fn trivially_valued_field(q: u64) -> Result<FiniteStructure, ModelError> {
    let (p, _) = prime_power(q).ok_or_else(|| ModelError::Invalid(format!("{q} is not a prime power")))?;
    if q > 64 {
        return Err(ModelError::Invalid(format!("field size {q} exceeds 64")));
    }
    let n = q as usize;
    let mut s = FiniteStructure::new(&valued_field(), vec![n, 2, n])?;
    let (add, mul) = field_ops(q)?;
    set_ring_ops(&mut s, "", n, &add, &mul)?;
    set_ring_ops(&mut s, "k", n, &add, &mul)?;
    s.set_function("+G", |x| x[0].max(x[1]))?;
    s.set_function("-G", |x| x[0])?;
    s.set_constant("0G", 0)?;
    s.set_constant("infG", 1)?;
    s.set_relation("<=G", |x| x[0] <= x[1])?;
    s.set_relation("<G", |x| x[0] < x[1])?;
    s.set_function("v", |x| u32::from(x[0] == 0))?;
    s.set_function("res", |x| x[0])?;
    s.set_literal_modulus(p);
    Ok(s)
}

/// Builders by name: `gamma2`, `gamma3`, `gamma4`, `N<c>`, `M<c>`, `F<q>`
/// (finite field), `Z<m>` (modular ring), `V<q>` (trivially valued `𝔽_q`).
pub fn named_structure(name: &str) -> Result<FiniteStructure, ModelError> {
    let unknown = || ModelError::Invalid(format!("unknown structure `{name}`"));
    match name {
        "gamma2" => return Ok(gamma2()),
        "gamma3" => return Ok(gamma3()),
        "gamma4" => return Ok(gamma4()),
        _ => {}
    }
    let (head, num) = name.split_at(name.char_indices().nth(1).map_or(name.len(), |(i, _)| i));
    let k: u64 = num.parse().map_err(|_| unknown())?;
    match head {
        "N" => Ok(tournament_models(k as usize)?.0),
        "M" => Ok(tournament_models(k as usize)?.1),
        "F" => finite_field(k),
        "Z" => modular_ring(k),
        "V" => trivially_valued_field(k),
        _ => Err(unknown()),
    }
}

impl FiniteStructure {
    /// Characteristic of a ring structure (order of `1` under `+`), if the
    /// language has ring operations on its first sort.
    pub fn characteristic(&self) -> Option<u64> {
        let one = self.function_value("1", &[])?;
        let mut acc = one;
        for n in 1..=self.sizes[0] as u64 {
            if acc == 0 {
                return Some(n);
            }
            acc = self.function_value("+", &[acc, one])?;
        }
        None
    }

    /// Whether the structure is a field (every nonzero element invertible).
    pub fn is_field(&self) -> bool {
        let n = self.sizes[0] as u32;
        let Some(Interp::Function(_)) = self.lang.symbol_index("*").and_then(|i| self.interp[i].as_ref()) else {
            return false;
        };
        n > 1 && (1..n).all(|a| (1..n).any(|b| self.function_value("*", &[a, b]) == Some(1)))
    }
}

#[cfg(test)]
mod tests {
    use super::super::eval;
    use super::*;
    use crate::formula::parse_formula;
    use std::collections::BTreeMap;

    fn holds(s: &FiniteStructure, src: &str) -> bool {
        eval(s, &parse_formula(s.language(), src).unwrap(), &BTreeMap::new()).unwrap()
    }

    #[test]
    fn field_tables_are_fields() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64] {
            let f = finite_field(q).unwrap();
            assert!(f.is_field(), "F{q}");
            assert_eq!(f.characteristic(), prime_power(q).map(|(p, _)| p));
        }
        assert!(finite_field(6).is_err());
        assert!(finite_field(128).is_err());
    }

    #[test]
    fn f4_has_a_cube_root_of_unity() {
        assert!(holds(&finite_field(4).unwrap(), "(exists (x field) (= (+ (* x x) (+ x 1)) 0))"));
        assert!(!holds(&finite_field(2).unwrap(), "(exists (x field) (= (+ (* x x) (+ x 1)) 0))"));
    }

    #[test]
    fn z6_has_nontrivial_idempotents() {
        let src = "(exists (x field) (and (= (* x x) x) (and (not (= x 0)) (not (= x 1)))))";
        assert!(holds(&modular_ring(6).unwrap(), src));
        assert!(!modular_ring(6).unwrap().is_field());
    }

    #[test]
    fn tournament_sizes() {
        let (n, m) = tournament_models(1).unwrap();
        assert_eq!((n.carrier_sizes()[0], m.carrier_sizes()[0]), (6, 9));
        assert!(tournament_models(0).is_err());
    }

    #[test]
    fn separating_sentence() {
        let s = example_sentence();
        for c in 1..=2 {
            let (n, m) = tournament_models(c).unwrap();
            assert_eq!(eval(&n, &s, &BTreeMap::new()), Ok(true));
            assert_eq!(eval(&m, &s, &BTreeMap::new()), Ok(false));
        }
    }

    #[test]
    fn trivial_valuation() {
        let v = trivially_valued_field(4).unwrap();
        v.validate().unwrap();
        assert!(holds(&v, "(forall (x field) (or (= x 0) (= (v x) 0G)))"));
        assert!(holds(&v, "(= (v 0) infG)"));
    }

    #[test]
    fn names() {
        assert_eq!(named_structure("M2").unwrap().carrier_sizes(), &[15]);
        assert_eq!(named_structure("F9").unwrap().carrier_sizes(), &[9]);
        assert!(named_structure("X1").is_err());
    }
}
