//! Multi-sorted first-order languages, their expansions by constants, language
//! inclusions, symbol presentations, and Gödel coding of formulas.
//!
//! Built-in languages:
//!
//! | name    | sorts                    | symbols |
//! |---------|--------------------------|---------|
//! | `ring`  | `field`                  | `+ - * 0 1` (binary `-`) |
//! | `graph` | `vertex`                 | relation `E` |
//! | `val`   | `field` `group` `residue`| ring ops on `field`; `+k -k *k 0k 1k` on `residue`; `+G`, unary `-G`, `0G`, `infG`, relations `<=G`, `<G`; `v: field → group`, `res: field → residue` |

mod godel;
mod text;

pub use godel::{godel_decode, godel_encode, GodelError};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("presentation is not injective: code {0} is used twice")]
    NonInjectivePresentation(u64),
    #[error("presentation is partial: symbol `{0}` has no code")]
    PartialPresentation(String),
    #[error("not an inclusion: {0}")]
    NotAnInclusion(String),
    #[error("signature text, line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A sort name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Sort(Arc<str>);

impl Sort {
    pub fn new(name: &str) -> Self {
        Sort(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn field() -> Self {
        Sort::new(FIELD)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const FIELD: &str = "field";
pub const GROUP: &str = "group";
pub const RESIDUE: &str = "residue";
pub const VERTEX: &str = "vertex";

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum SymbolKind {
    Function,
    Relation,
    Constant,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    pub args: Vec<Sort>,
    /// Result sort; `None` exactly for relations.
    pub result: Option<Sort>,
}

impl Symbol {
    pub fn function(name: &str, args: &[&str], result: &str) -> Self {
        Symbol {
            name: name.into(),
            kind: SymbolKind::Function,
            args: args.iter().map(|s| Sort::new(s)).collect(),
            result: Some(Sort::new(result)),
        }
    }

    pub fn relation(name: &str, args: &[&str]) -> Self {
        Symbol {
            name: name.into(),
            kind: SymbolKind::Relation,
            args: args.iter().map(|s| Sort::new(s)).collect(),
            result: None,
        }
    }

    pub fn constant(name: &str, sort: &str) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Constant, args: Vec::new(), result: Some(Sort::new(sort)) }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

/// Which constants of an infinite field `k₀` may appear as literals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LiteralDomain {
    /// ℚ.
    Rationals,
    /// 𝔽_p, written as constant rational-function literals.
    PrimeField(u64),
    /// 𝔽_p(s).
    RationalFunctions(u64),
}

impl LiteralDomain {
    pub fn admits(&self, lit: &crate::formula::Literal) -> bool {
        use crate::formula::Literal;
        match (self, lit) {
            (LiteralDomain::Rationals, Literal::Rational(..)) => true,
            (LiteralDomain::PrimeField(p), Literal::RatFunc(f)) => f.characteristic() == *p && f.height() == 0,
            (LiteralDomain::RationalFunctions(p), Literal::RatFunc(f)) => f.characteristic() == *p,
            _ => false,
        }
    }

    fn includes(&self, other: &LiteralDomain) -> bool {
        use LiteralDomain::*;
        match (self, other) {
            (a, b) if a == b => true,
            (RationalFunctions(p), PrimeField(q)) => p == q,
            _ => false,
        }
    }
}

impl std::str::FromStr for LiteralDomain {
    type Err = SignatureError;

    /// `Q`, `F<p>` or `F<p>(s)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let d = text::parse_domain(s.trim())
            .ok_or_else(|| SignatureError::Syntax { line: 0, message: format!("bad literal domain `{s}`") })?;
        match d {
            LiteralDomain::PrimeField(p) | LiteralDomain::RationalFunctions(p)
                if !crate::fpalg::is_prime(p) || p > crate::fpalg::MAX_CHARACTERISTIC =>
            {
                Err(SignatureError::Syntax { line: 0, message: format!("{p} is not a supported prime") })
            }
            d => Ok(d),
        }
    }
}

impl LiteralDomain {
    /// Characteristic of the constant field (0 for ℚ).
    pub fn characteristic(&self) -> u64 {
        match self {
            LiteralDomain::Rationals => 0,
            LiteralDomain::PrimeField(p) | LiteralDomain::RationalFunctions(p) => *p,
        }
    }
}

impl fmt::Display for LiteralDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiteralDomain::Rationals => f.write_str("Q"),
            LiteralDomain::PrimeField(p) => write!(f, "F{p}"),
            LiteralDomain::RationalFunctions(p) => write!(f, "F{p}(s)"),
        }
    }
}

/// A multi-sorted language: sorts, uniquely named symbols, an optional
/// presentation (injection symbol → ℕ), and optionally a lazily represented
/// set of field constants (literals).
#[derive(Clone, Debug)]
pub struct Language {
    name: String,
    sorts: Vec<Sort>,
    symbols: Vec<Symbol>,
    index: HashMap<String, usize>,
    presentation: Option<Vec<u64>>,
    literals: Option<(LiteralDomain, Sort)>,
}

impl PartialEq for Language {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts && self.symbols == other.symbols && self.literals == other.literals
    }
}

impl Eq for Language {}

impl Language {
    pub fn new(name: &str, sorts: Vec<Sort>, symbols: Vec<Symbol>) -> Result<Self, SignatureError> {
        let mut lang = Language {
            name: name.into(),
            sorts: Vec::new(),
            symbols: Vec::new(),
            index: HashMap::new(),
            presentation: None,
            literals: None,
        };
        for s in sorts {
            if lang.sorts.contains(&s) {
                return Err(SignatureError::DuplicateSort(s.to_string()));
            }
            lang.sorts.push(s);
        }
        for sym in symbols {
            lang.push_symbol(sym)?;
        }
        Ok(lang)
    }

    fn push_symbol(&mut self, sym: Symbol) -> Result<(), SignatureError> {
        if !valid_symbol_name(&sym.name) {
            return Err(SignatureError::InvalidName(sym.name));
        }
        if self.index.contains_key(&sym.name) {
            return Err(SignatureError::DuplicateSymbol(sym.name));
        }
        for s in sym.args.iter().chain(sym.result.iter()) {
            if !self.sorts.contains(s) {
                return Err(SignatureError::UnknownSort(s.to_string()));
            }
        }
        self.index.insert(sym.name.clone(), self.symbols.len());
        self.symbols.push(sym);
        Ok(())
    }

    /// Attaches a presentation; `codes[i]` is the code of the i-th symbol.
    pub fn with_presentation(mut self, codes: Vec<u64>) -> Result<Self, SignatureError> {
        if codes.len() != self.symbols.len() {
            let missing = self.symbols.get(codes.len()).map(|s| s.name.clone()).unwrap_or_default();
            return Err(SignatureError::PartialPresentation(missing));
        }
        let mut seen = std::collections::HashSet::new();
        for &c in &codes {
            if !seen.insert(c) {
                return Err(SignatureError::NonInjectivePresentation(c));
            }
        }
        self.presentation = Some(codes);
        Ok(self)
    }

    /// Presents symbols by their declaration index.
    pub fn with_default_presentation(self) -> Self {
        let codes = (0..self.symbols.len() as u64).collect();
        self.with_presentation(codes).expect("indices are injective")
    }

    pub fn with_literals(mut self, domain: LiteralDomain, sort: &str) -> Result<Self, SignatureError> {
        let sort = Sort::new(sort);
        if !self.sorts.contains(&sort) {
            return Err(SignatureError::UnknownSort(sort.to_string()));
        }
        self.name = format!("{}({})", self.name, domain);
        self.literals = Some((domain, sort));
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        self.sorts.contains(s)
    }

    pub fn sort_index(&self, s: &Sort) -> Option<usize> {
        self.sorts.iter().position(|t| t == s)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.index.get(name).map(|&i| &self.symbols[i])
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn literals(&self) -> Option<&(LiteralDomain, Sort)> {
        self.literals.as_ref()
    }

    pub fn presentation(&self) -> Option<&[u64]> {
        self.presentation.as_deref()
    }

    /// Code of `name` under the presentation.
    pub fn code_of(&self, name: &str) -> Option<u64> {
        let i = self.symbol_index(name)?;
        self.presentation.as_ref().map(|p| p[i])
    }

    /// Inverse of [`Language::code_of`].
    pub fn symbol_with_code(&self, code: u64) -> Option<&Symbol> {
        let codes = self.presentation.as_ref()?;
        codes.iter().position(|&c| c == code).map(|i| &self.symbols[i])
    }

    /// Whether the ring operations `+ - * 0 1` live on `sort`.
    pub fn has_ring_on(&self, sort: &str) -> bool {
        let s = [sort, sort];
        [("+", &s[..]), ("-", &s[..]), ("*", &s[..])].iter().all(|(n, a)| {
            self.symbol(n).is_some_and(|sym| {
                sym.kind == SymbolKind::Function
                    && sym.args.iter().map(Sort::name).eq(a.iter().copied())
                    && sym.result.as_ref().is_some_and(|r| r.name() == sort)
            })
        }) && ["0", "1"].iter().all(|n| {
            self.symbol(n).is_some_and(|sym| {
                sym.kind == SymbolKind::Constant && sym.result.as_ref().is_some_and(|r| r.name() == sort)
            })
        })
    }

    pub fn to_text(&self) -> String {
        text::print(self)
    }

    pub fn from_text(src: &str) -> Result<Self, SignatureError> {
        text::parse(src)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Symbol names: nonempty, no whitespace, parentheses, braces, brackets, or `'`
/// (the prime is reserved for generated variable names).
pub fn valid_symbol_name(name: &str) -> bool {
    !name.is_empty()
        && !name.chars().any(|c| c.is_whitespace() || "(){}[];'@:".contains(c))
        && !matches!(name, "=" | "and" | "or" | "not" | "forall" | "exists" | "true" | "false")
}

/// `{+, −, ·, 0, 1}` on the single sort `field`.
pub fn ring() -> Language {
    Language::new("ring", vec![Sort::field()], ring_symbols(FIELD, ""))
        .expect("well-formed")
        .with_default_presentation()
}

fn ring_symbols(sort: &str, suffix: &str) -> Vec<Symbol> {
    let n = |s: &str| format!("{s}{suffix}");
    vec![
        Symbol::function(&n("+"), &[sort, sort], sort),
        Symbol::function(&n("-"), &[sort, sort], sort),
        Symbol::function(&n("*"), &[sort, sort], sort),
        Symbol::constant(&n("0"), sort),
        Symbol::constant(&n("1"), sort),
    ]
}

/// `{E}` on the single sort `vertex`.
pub fn graph() -> Language {
    Language::new("graph", vec![Sort::new(VERTEX)], vec![Symbol::relation("E", &[VERTEX, VERTEX])])
        .expect("well-formed")
        .with_default_presentation()
}

/// The three-sorted valued-field language.
pub fn valued_field() -> Language {
    let mut symbols = ring_symbols(FIELD, "");
    symbols.extend(ring_symbols(RESIDUE, "k"));
    symbols.extend([
        Symbol::function("+G", &[GROUP, GROUP], GROUP),
        Symbol::function("-G", &[GROUP], GROUP),
        Symbol::constant("0G", GROUP),
        Symbol::constant("infG", GROUP),
        Symbol::relation("<=G", &[GROUP, GROUP]),
        Symbol::relation("<G", &[GROUP, GROUP]),
        Symbol::function("v", &[FIELD], GROUP),
        Symbol::function("res", &[FIELD], RESIDUE),
    ]);
    let sorts = [FIELD, GROUP, RESIDUE].iter().map(|s| Sort::new(s)).collect();
    Language::new("val", sorts, symbols).expect("well-formed").with_default_presentation()
}

/// `L(c̄)`: adds fresh constants of sort `sort`. Existing presentations are
/// extended by assigning codes above the current maximum.
pub fn extend_with_constants(lang: &Language, names: &[&str], sort: &str) -> Result<Language, SignatureError> {
    let mut out = lang.clone();
    for n in names {
        out.push_symbol(Symbol::constant(n, sort))?;
    }
    if let Some(codes) = &mut out.presentation {
        let next = codes.iter().max().map_or(0, |m| m + 1);
        codes.extend((0..names.len() as u64).map(|i| next + i));
    }
    if !names.is_empty() {
        out.name = format!("{}({})", lang.name, names.join(","));
    }
    Ok(out)
}

/// Removes the named constants (used when a reduction eliminates them).
pub fn remove_constants(lang: &Language, names: &[&str]) -> Result<Language, SignatureError> {
    let mut out = Language::new(&lang.name, lang.sorts.clone(), Vec::new())?;
    let mut codes = Vec::new();
    for (i, sym) in lang.symbols.iter().enumerate() {
        if sym.kind == SymbolKind::Constant && names.contains(&sym.name.as_str()) {
            continue;
        }
        out.push_symbol(sym.clone())?;
        if let Some(p) = &lang.presentation {
            codes.push(p[i]);
        }
    }
    for n in names {
        if lang.symbol(n).is_none() {
            return Err(SignatureError::UnknownSymbol(n.to_string()));
        }
    }
    if lang.presentation.is_some() {
        out.presentation = Some(codes);
    }
    out.literals = lang.literals.clone();
    Ok(out)
}

/// A checked inclusion `sub ⊆ sup`: every sort and symbol of `sub` occurs in
/// `sup` with the same signature, and literal domains are included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageInclusion {
    sub: Language,
    sup: Language,
}

impl LanguageInclusion {
    pub fn new(sub: &Language, sup: &Language) -> Result<Self, SignatureError> {
        let bad = |m: String| Err(SignatureError::NotAnInclusion(m));
        for s in &sub.sorts {
            if !sup.has_sort(s) {
                return bad(format!("sort `{s}` missing from {}", sup.name));
            }
        }
        for sym in &sub.symbols {
            match sup.symbol(&sym.name) {
                Some(t) if t == sym => {}
                Some(_) => return bad(format!("symbol `{}` has a different signature", sym.name)),
                None => return bad(format!("symbol `{}` missing from {}", sym.name, sup.name)),
            }
        }
        match (&sub.literals, &sup.literals) {
            (None, _) => {}
            (Some((d, s)), Some((e, t))) if s == t && e.includes(d) => {}
            _ => return bad("literal constants are not included".into()),
        }
        Ok(LanguageInclusion { sub: sub.clone(), sup: sup.clone() })
    }

    pub fn identity(lang: &Language) -> Self {
        LanguageInclusion { sub: lang.clone(), sup: lang.clone() }
    }

    pub fn sub(&self) -> &Language {
        &self.sub
    }

    pub fn sup(&self) -> &Language {
        &self.sup
    }

    /// `self` followed by `next`.
    pub fn compose(&self, next: &LanguageInclusion) -> Result<Self, SignatureError> {
        if self.sup != next.sub {
            return Err(SignatureError::NotAnInclusion("inclusions are not composable".into()));
        }
        Ok(LanguageInclusion { sub: self.sub.clone(), sup: next.sup.clone() })
    }
}

/// Looks up a built-in language by name: `ring`, `graph`, `val`.
pub fn builtin(name: &str) -> Option<Language> {
    match name {
        "ring" => Some(ring()),
        "graph" => Some(graph()),
        "val" => Some(valued_field()),
        _ => None,
    }
}

/// The sort carrying literal constants, if any.
pub fn literal_sort_of(lang: &Language) -> Option<&Sort> {
    lang.literals.as_ref().map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_adds_constants() {
        let rt = extend_with_constants(&ring(), &["t"], FIELD).unwrap();
        assert_eq!(rt.symbols().len(), 6);
        assert_eq!(rt.symbol("t").unwrap().kind, SymbolKind::Constant);
        assert_eq!(rt.code_of("t"), Some(5));
        assert_eq!(rt.name(), "ring(t)");
    }

    #[test]
    fn duplicate_constant_rejected() {
        assert_eq!(extend_with_constants(&ring(), &["0"], FIELD), Err(SignatureError::DuplicateSymbol("0".into())));
    }

    #[test]
    fn inclusions() {
        let r = ring();
        let rt = extend_with_constants(&r, &["t"], FIELD).unwrap();
        let v = valued_field();
        assert!(LanguageInclusion::new(&r, &rt).is_ok());
        assert!(LanguageInclusion::new(&r, &v).is_ok());
        assert!(LanguageInclusion::new(&rt, &r).is_err());
        assert!(LanguageInclusion::new(&graph(), &v).is_err());
        let a = LanguageInclusion::new(&r, &rt).unwrap();
        let b = LanguageInclusion::identity(&rt);
        assert_eq!(a.compose(&b).unwrap(), a);
        assert!(b.compose(&a).is_err());
    }

    #[test]
    fn valued_field_has_ring_on_both_sorts() {
        let v = valued_field();
        assert!(v.has_ring_on(FIELD));
        assert!(!v.has_ring_on(RESIDUE)); // residue ops carry the `k` suffix
        assert!(ring().has_ring_on(FIELD));
        assert!(!graph().has_ring_on(VERTEX));
    }

    #[test]
    fn presentation_must_be_injective() {
        let r = Language::new("r", vec![Sort::field()], ring_symbols(FIELD, "")).unwrap();
        assert_eq!(r.clone().with_presentation(vec![0, 1, 2, 3, 3]), Err(SignatureError::NonInjectivePresentation(3)));
        assert!(r.with_presentation(vec![0, 1]).is_err());
    }
}
