//! Syntactic fragments built from the quantifier-free formulas by quantifier
//! blocks and closure, decided by structural recursion.
//!
//! For a fragment `G` and quantifier `Q`:
//!
//! * `Q₁[G] = {Qxψ : ψ ∈ G} ∪ G` and `Qₙ[G] = Q₁[Qₙ₋₁[G]]` (mode [`Mode::Prefix`]);
//! * `Q[G] = ⋃ₙ Qₙ[G]` ([`Mode::PrefixAny`]);
//! * `QₙG` is the closure of `Qₙ[G]` under `⊤, ⊥, ∧, ∨` and substitution
//!   ([`Mode::Closed`]);
//! * `Q¹G = Q₁G`, `Qⁿ⁺¹G = Q₁(QⁿG)` ([`Mode::Nested`]);
//! * `QG = ⋃ₙ QⁿG` ([`Mode::Unbounded`]).
//!
//! A block may restrict its quantifiers to one sort (`∀^𝐤`). Every fragment
//! here is invariant under renaming of variables, so closure under
//! substitution never adds a formula of a new shape: `φ` lies in the closure
//! of `S` iff it is `⊤`, `⊥`, a member of `S`, or a conjunction/disjunction
//! of two members of the closure.
//!
//! Text syntax, outermost block first: `E` (= `∃`), `A1[E]` (= `∀₁[∃]`),
//! `A2 E` (= `∀₂∃`), `A^2 E` (= `∀²∃`), `A@k E` (= `∀^𝐤∃`), `E@k[A E]`,
//! `F0`. The sort name `k` abbreviates `residue`.

mod prenex;
mod relativize;

pub use prenex::{prnx, split_prefix, Prenex};
pub use relativize::relativize;

use crate::formula::{well_sorted, Diagnostic, Formula, Quantifier};
use crate::signature::{Language, Sort, RESIDUE};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FragmentError {
    #[error("malformed fragment descriptor `{0}`")]
    Descriptor(String),
    #[error("ill-sorted formula: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllSorted(Vec<Diagnostic>),
    #[error("{0}")]
    NotInFragment(String),
    #[error("invalid relativizing formula: {0}")]
    BadRelativizer(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    /// `Qₙ[·]`: at most `n` leading quantifiers, no closure.
    Prefix(usize),
    /// `Q[·]`: any number of leading quantifiers, no closure.
    PrefixAny,
    /// `Qₙ·`: closure of `Qₙ[·]`.
    Closed(usize),
    /// `Qⁿ·`: `n`-fold nesting of `Q₁`.
    Nested(usize),
    /// `Q·`: union over all nestings.
    Unbounded,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Block {
    pub quant: Quantifier,
    pub mode: Mode,
    pub sort: Option<Sort>,
}

impl Block {
    pub fn new(quant: Quantifier, mode: Mode) -> Self {
        Block { quant, mode, sort: None }
    }

    pub fn restricted(quant: Quantifier, mode: Mode, sort: &str) -> Self {
        Block { quant, mode, sort: Some(Sort::new(sort)) }
    }

    fn admits(&self, q: Quantifier, s: &Sort) -> bool {
        self.quant == q && self.sort.as_ref().is_none_or(|t| t == s)
    }
}

/// A fragment: quantifier blocks, outermost first, over the quantifier-free
/// formulas.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FragmentDescriptor {
    pub blocks: Vec<Block>,
}

impl FragmentDescriptor {
    /// The quantifier-free fragment `F₀`.
    pub fn quantifier_free() -> Self {
        Self::default()
    }

    pub fn parse(s: &str) -> Result<Self, FragmentError> {
        s.parse()
    }

    /// `Q·self` for the given block.
    pub fn prepend(&self, block: Block) -> Self {
        let mut blocks = vec![block];
        blocks.extend(self.blocks.iter().cloned());
        FragmentDescriptor { blocks }
    }

    /// The fragment below the outermost block.
    pub fn inner(&self) -> Self {
        FragmentDescriptor { blocks: self.blocks.iter().skip(1).cloned().collect() }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Syntactic membership; sorts are not checked (see [`mem_fragment`]).
    pub fn contains(&self, f: &Formula) -> bool {
        self.mem(f, 0)
    }

    /// Membership in the negation closure `F′`: the least fragment containing
    /// this one and closed under `¬`.
    pub fn contains_negation_closure(&self, f: &Formula) -> bool {
        self.contains(f)
            || match f {
                Formula::Top | Formula::Bot => true,
                Formula::Not(a) => self.contains_negation_closure(a),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    self.contains_negation_closure(a) && self.contains_negation_closure(b)
                }
                _ => false,
            }
    }

    /// Whether `∃·self = self` holds at the descriptor level: the outermost
    /// block is an unrestricted, unbounded `∃`.
    pub fn absorbs_exists(&self) -> bool {
        matches!(self.blocks.first(), Some(Block { quant: Quantifier::Exists, mode: Mode::Unbounded, sort: None }))
    }

    /// Whether the descriptor is one of `∃`, `∃∀`, `∃∀∃`, … (unrestricted,
    /// unbounded, alternating, starting with `∃`).
    pub fn is_alternating_from_exists(&self) -> bool {
        !self.blocks.is_empty()
            && self.blocks.iter().enumerate().all(|(i, b)| {
                let q = if i % 2 == 0 { Quantifier::Exists } else { Quantifier::Forall };
                b.quant == q && b.mode == Mode::Unbounded && b.sort.is_none()
            })
    }

    fn mem(&self, f: &Formula, i: usize) -> bool {
        let Some(b) = self.blocks.get(i) else {
            return f.is_quantifier_free();
        };
        match b.mode {
            Mode::Prefix(n) => self.prefix(f, b, n, i + 1),
            Mode::PrefixAny => self.prefix(f, b, usize::MAX, i + 1),
            Mode::Closed(n) => closure(f, &|g| self.prefix(g, b, n, i + 1)),
            Mode::Nested(n) => self.nested(f, b, n, i + 1),
            Mode::Unbounded => self.unbounded(f, b, i + 1),
        }
    }

    fn prefix(&self, f: &Formula, b: &Block, n: usize, inner: usize) -> bool {
        if self.mem(f, inner) {
            return true;
        }
        match f.as_quant() {
            Some((q, x, body)) if n > 0 && b.admits(q, &x.sort) => self.prefix(body, b, n - 1, inner),
            _ => false,
        }
    }

    fn nested(&self, f: &Formula, b: &Block, n: usize, inner: usize) -> bool {
        if n == 0 {
            return self.mem(f, inner);
        }
        let step = |g: &Formula| {
            self.nested(g, b, n - 1, inner)
                || matches!(g.as_quant(), Some((q, x, body)) if b.admits(q, &x.sort) && self.nested(body, b, n - 1, inner))
        };
        closure(f, &step)
    }

    fn unbounded(&self, f: &Formula, b: &Block, inner: usize) -> bool {
        if self.mem(f, inner) {
            return true;
        }
        match f {
            Formula::Top | Formula::Bot => true,
            Formula::And(a, c) | Formula::Or(a, c) => self.unbounded(a, b, inner) && self.unbounded(c, b, inner),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let q = f.as_quant().expect("quantifier").0;
                b.admits(q, &x.sort) && self.unbounded(body, b, inner)
            }
            _ => false,
        }
    }
}

fn closure(f: &Formula, member: &dyn Fn(&Formula) -> bool) -> bool {
    match f {
        Formula::Top | Formula::Bot => true,
        _ if member(f) => true,
        Formula::And(a, b) | Formula::Or(a, b) => closure(a, member) && closure(b, member),
        _ => false,
    }
}

/// Membership of a well-sorted formula; ill-sorted input is an error.
pub fn mem_fragment(lang: &Language, desc: &FragmentDescriptor, f: &Formula) -> Result<bool, FragmentError> {
    let d = well_sorted(lang, f);
    if !d.is_empty() {
        return Err(FragmentError::IllSorted(d));
    }
    Ok(desc.contains(f))
}

/// Number of quantifier nodes.
pub fn multiplicity(f: &Formula) -> usize {
    f.quantifier_count()
}

impl fmt::Display for FragmentDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("F0");
        }
        let b = &self.blocks[0];
        f.write_str(match b.quant {
            Quantifier::Forall => "A",
            Quantifier::Exists => "E",
        })?;
        match b.mode {
            Mode::Prefix(n) | Mode::Closed(n) => write!(f, "{n}")?,
            Mode::Nested(n) => write!(f, "^{n}")?,
            Mode::PrefixAny | Mode::Unbounded => {}
        }
        if let Some(s) = &b.sort {
            let name = if s.name() == RESIDUE { "k" } else { s.name() };
            write!(f, "@{name}")?;
        }
        let inner = self.inner();
        match b.mode {
            Mode::Prefix(_) | Mode::PrefixAny => write!(f, "[{inner}]"),
            _ if inner.blocks.is_empty() => Ok(()),
            _ => write!(f, " {inner}"),
        }
    }
}

impl FromStr for FragmentDescriptor {
    type Err = FragmentError;

    fn from_str(s: &str) -> Result<Self, FragmentError> {
        let chars: Vec<char> = s.chars().collect();
        let mut pos = 0;
        let d = parse_desc(&chars, &mut pos).ok_or_else(|| FragmentError::Descriptor(s.into()))?;
        skip_spaces(&chars, &mut pos);
        if pos != chars.len() {
            return Err(FragmentError::Descriptor(s.into()));
        }
        Ok(d)
    }
}

fn skip_spaces(c: &[char], pos: &mut usize) {
    while *pos < c.len() && c[*pos] == ' ' {
        *pos += 1;
    }
}

fn number(c: &[char], pos: &mut usize) -> Option<usize> {
    let start = *pos;
    while *pos < c.len() && c[*pos].is_ascii_digit() {
        *pos += 1;
    }
    (start != *pos).then(|| c[start..*pos].iter().collect::<String>().parse().ok()).flatten()
}

fn parse_desc(c: &[char], pos: &mut usize) -> Option<FragmentDescriptor> {
    skip_spaces(c, pos);
    if c[*pos..].starts_with(&['F', '0']) {
        *pos += 2;
        return Some(FragmentDescriptor::default());
    }
    let quant = match c.get(*pos)? {
        'A' => Quantifier::Forall,
        'E' => Quantifier::Exists,
        _ => return None,
    };
    *pos += 1;
    let (count, nested) = if c.get(*pos) == Some(&'^') {
        *pos += 1;
        (Some(number(c, pos)?), true)
    } else {
        (number(c, pos), false)
    };
    let sort = if c.get(*pos) == Some(&'@') {
        *pos += 1;
        let start = *pos;
        while *pos < c.len() && (c[*pos].is_alphanumeric() || c[*pos] == '_') {
            *pos += 1;
        }
        let name: String = c[start..*pos].iter().collect();
        if name.is_empty() {
            return None;
        }
        Some(Sort::new(if name == "k" { RESIDUE } else { &name }))
    } else {
        None
    };
    let (mode, inner) = if c.get(*pos) == Some(&'[') {
        if nested {
            return None;
        }
        *pos += 1;
        let inner = parse_desc(c, pos)?;
        skip_spaces(c, pos);
        if c.get(*pos) != Some(&']') {
            return None;
        }
        *pos += 1;
        (count.map_or(Mode::PrefixAny, Mode::Prefix), inner)
    } else {
        let mode = match (count, nested) {
            (Some(n), true) => Mode::Nested(n),
            (Some(n), false) => Mode::Closed(n),
            (None, _) => Mode::Unbounded,
        };
        let mut look = *pos;
        skip_spaces(c, &mut look);
        let inner = if look < c.len() && matches!(c[look], 'A' | 'E' | 'F') {
            *pos = look;
            parse_desc(c, pos)?
        } else {
            FragmentDescriptor::default()
        };
        (mode, inner)
    };
    Some(FragmentDescriptor { blocks: vec![Block { quant, mode, sort }] }.concat(inner))
}

impl FragmentDescriptor {
    fn concat(mut self, inner: FragmentDescriptor) -> Self {
        self.blocks.extend(inner.blocks);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::signature::{graph, ring};

    fn d(s: &str) -> FragmentDescriptor {
        s.parse().unwrap()
    }

    fn g(s: &str) -> Formula {
        parse_formula(&graph(), s).unwrap()
    }

    #[test]
    fn descriptor_syntax_round_trips() {
        for s in ["F0", "E", "A1[E]", "A2 E", "A^2 E", "A@k E", "E@k[A E]", "A1@k E", "A[F0]", "E A E"] {
            assert_eq!(d(s).to_string(), s);
        }
        assert!("Q".parse::<FragmentDescriptor>().is_err());
        assert!("A^2[E]".parse::<FragmentDescriptor>().is_err());
        assert!("A1[E".parse::<FragmentDescriptor>().is_err());
    }

    #[test]
    fn existential_and_prefix() {
        let f = g("(exists (y vertex) (E x y))");
        assert!(d("E").contains(&f));
        assert!(d("A1[E]").contains(&f));
        let h = g("(forall (x vertex) (exists (y vertex) (E x y)))");
        assert!(!d("E").contains(&h));
        assert!(d("A1[E]").contains(&h));
        assert!(!d("A1[F0]").contains(&h));
    }

    #[test]
    fn closure_versus_prefix() {
        let f = g("(and (forall (x vertex) (E x x)) (forall (y vertex) (E y y)))");
        assert!(!d("A1[F0]").contains(&f));
        assert!(d("A1 F0").contains(&f));
    }

    #[test]
    fn nested_versus_closed() {
        // ∀x(∀y¬E(x,y) ∨ ∃z E(x,z)) lies in ∀²∃ but not in ∀₂∃.
        let f = g("(forall (x vertex) (or (forall (y vertex) (not (E x y))) (exists (z vertex) (E x z))))");
        assert!(d("A^2 E").contains(&f));
        assert!(!d("A2 E").contains(&f));
        assert!(d("A E").contains(&f));
    }

    #[test]
    fn sort_restricted_block() {
        let v = crate::signature::valued_field();
        let f = parse_formula(&v, "(forall (a residue) (exists (x field) (= (res x) a)))").unwrap();
        assert!(d("A@k E").contains(&f));
        let h = parse_formula(&v, "(forall (x field) (exists (a residue) (= (res x) a)))").unwrap();
        assert!(!d("A@k E").contains(&h));
        assert!(d("A E").contains(&h));
    }

    #[test]
    fn negation_closure() {
        let f = g("(not (exists (y vertex) (E x y)))");
        assert!(!d("E").contains(&f));
        assert!(d("E").contains_negation_closure(&f));
        assert!(!d("E").contains_negation_closure(&g("(forall (y vertex) (E x y))")));
    }

    #[test]
    fn ill_sorted_is_an_error() {
        let f = parse_formula(&graph(), "(E x y)").unwrap();
        assert!(mem_fragment(&ring(), &d("E"), &f).is_err());
        assert_eq!(mem_fragment(&graph(), &d("E"), &f), Ok(true));
    }
}
