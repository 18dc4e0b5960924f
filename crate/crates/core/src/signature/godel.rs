//! Gödel numbering of formulas relative to a presented language.
//!
//! The formula is flattened into a tagged preorder token stream of naturals;
//! each token is written with the Elias γ code of `n + 1`, the codes are
//! concatenated behind a leading 1 bit, and the resulting bit string is read
//! as a binary numeral. The γ code is prefix-free, so the map is injective,
//! and numbers grow linearly in formula size (iterating a pairing function
//! squares the code at every node).
//!
//! Symbols are written by their presentation code; variable names as their
//! UTF-8 bytes; sorts by their index in the language; literals by a fixed
//! injection of ℚ and 𝔽_p(s) into token strings.

use super::{Language, Sort, SymbolKind};
use crate::formula::{Formula, Literal, Term, Var};
use crate::fpalg::{Poly, RatFunc};
use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GodelError {
    #[error("language `{0}` has no presentation")]
    MissingPresentation(String),
    #[error("symbol `{0}` is not in the language")]
    UnknownSymbol(String),
    #[error("sort `{0}` is not in the language")]
    UnknownSort(String),
    #[error("not the code of a formula: {0}")]
    NotInImage(String),
}

const F_TOP: u64 = 0;
const F_BOT: u64 = 1;
const F_EQ: u64 = 2;
const F_REL: u64 = 3;
const F_NOT: u64 = 4;
const F_AND: u64 = 5;
const F_OR: u64 = 6;
const F_ALL: u64 = 7;
const F_EX: u64 = 8;
const T_VAR: u64 = 0;
const T_CONST: u64 = 1;
const T_APP: u64 = 2;
const T_LIT: u64 = 3;

struct Writer<'a> {
    lang: &'a Language,
    bits: Vec<bool>,
}

impl Writer<'_> {
    fn nat(&mut self, n: u64) {
        self.big(&BigUint::from(n));
    }

    fn big(&mut self, n: &BigUint) {
        let x = n + 1u32;
        let len = x.bits();
        self.bits.extend(std::iter::repeat_n(false, len as usize - 1));
        for i in (0..len).rev() {
            self.bits.push(x.bit(i));
        }
    }

    fn symbol(&mut self, name: &str) -> Result<(), GodelError> {
        let code = self.lang.code_of(name).ok_or_else(|| GodelError::UnknownSymbol(name.into()))?;
        self.nat(code);
        Ok(())
    }

    fn sort(&mut self, s: &Sort) -> Result<(), GodelError> {
        let i = self.lang.sort_index(s).ok_or_else(|| GodelError::UnknownSort(s.to_string()))?;
        self.nat(i as u64);
        Ok(())
    }

    fn var(&mut self, v: &Var) -> Result<(), GodelError> {
        self.nat(v.name.len() as u64);
        for b in v.name.bytes() {
            self.nat(b as u64);
        }
        self.sort(&v.sort)
    }

    fn literal(&mut self, l: &Literal) {
        match l {
            Literal::Rational(q) => {
                self.nat(0);
                self.nat(u64::from(*q.numer() < 0));
                self.nat(q.numer().unsigned_abs());
                self.nat(*q.denom() as u64);
            }
            Literal::RatFunc(f) => {
                self.nat(1);
                self.nat(f.characteristic());
                for poly in [f.numerator(), f.denominator()] {
                    self.nat(poly.coeffs().len() as u64);
                    for &c in poly.coeffs() {
                        self.nat(c);
                    }
                }
            }
        }
    }

    fn term(&mut self, t: &Term) -> Result<(), GodelError> {
        match t {
            Term::Var(v) => {
                self.nat(T_VAR);
                self.var(v)
            }
            Term::Const(c) => {
                self.nat(T_CONST);
                self.symbol(c)
            }
            Term::App(f, args) => {
                self.nat(T_APP);
                self.symbol(f)?;
                args.iter().try_for_each(|a| self.term(a))
            }
            Term::Lit(l) => {
                self.nat(T_LIT);
                self.literal(l);
                Ok(())
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<(), GodelError> {
        match f {
            Formula::Top => self.nat(F_TOP),
            Formula::Bot => self.nat(F_BOT),
            Formula::Eq(a, b) => {
                self.nat(F_EQ);
                self.term(a)?;
                self.term(b)?;
            }
            Formula::Rel(r, args) => {
                self.nat(F_REL);
                self.symbol(r)?;
                args.iter().try_for_each(|a| self.term(a))?;
            }
            Formula::Not(a) => {
                self.nat(F_NOT);
                self.formula(a)?;
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.nat(if matches!(f, Formula::And(..)) { F_AND } else { F_OR });
                self.formula(a)?;
                self.formula(b)?;
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                self.nat(if matches!(f, Formula::Forall(..)) { F_ALL } else { F_EX });
                self.var(v)?;
                self.formula(a)?;
            }
        }
        Ok(())
    }
}

/// Gödel number of `f` under the presentation of `lang`.
pub fn godel_encode(lang: &Language, f: &Formula) -> Result<BigUint, GodelError> {
    if lang.presentation().is_none() {
        return Err(GodelError::MissingPresentation(lang.name().into()));
    }
    let mut w = Writer { lang, bits: vec![true] };
    w.formula(f)?;
    let mut n = BigUint::zero();
    for b in w.bits {
        n <<= 1;
        if b {
            n |= BigUint::one();
        }
    }
    Ok(n)
}

struct Reader<'a> {
    lang: &'a Language,
    n: &'a BigUint,
    /// Index of the next bit to read, counting down from the top.
    pos: u64,
}

fn not_in_image<T>(m: &str) -> Result<T, GodelError> {
    Err(GodelError::NotInImage(m.into()))
}

impl Reader<'_> {
    fn bit(&mut self) -> Result<bool, GodelError> {
        if self.pos == 0 {
            return not_in_image("truncated code");
        }
        self.pos -= 1;
        Ok(self.n.bit(self.pos))
    }

    fn big(&mut self) -> Result<BigUint, GodelError> {
        let mut zeros = 0u64;
        while !self.bit()? {
            zeros += 1;
        }
        let mut x = BigUint::one();
        for _ in 0..zeros {
            x <<= 1;
            if self.bit()? {
                x |= BigUint::one();
            }
        }
        Ok(x - 1u32)
    }

    fn nat(&mut self) -> Result<u64, GodelError> {
        self.big()?.to_u64().map_or_else(|| not_in_image("token out of range"), Ok)
    }

    fn symbol(&mut self, kind: SymbolKind) -> Result<(String, usize), GodelError> {
        let code = self.nat()?;
        match self.lang.symbol_with_code(code) {
            Some(s) if s.kind == kind => Ok((s.name.clone(), s.arity())),
            Some(s) => not_in_image(&format!("symbol `{}` used at the wrong kind", s.name)),
            None => not_in_image(&format!("no symbol has code {code}")),
        }
    }

    fn var(&mut self) -> Result<Var, GodelError> {
        let len = self.nat()?;
        if len > 1 << 16 {
            return not_in_image("variable name too long");
        }
        let bytes = (0..len)
            .map(|_| self.nat().and_then(|b| u8::try_from(b).map_or_else(|_| not_in_image("bad byte"), Ok)))
            .collect::<Result<Vec<u8>, _>>()?;
        let name = String::from_utf8(bytes).or_else(|_| not_in_image("variable name is not UTF-8"))?;
        let si = self.nat()? as usize;
        let sort = self.lang.sorts().get(si).cloned().map_or_else(|| not_in_image("bad sort index"), Ok)?;
        Ok(Var::new(&name, &sort))
    }

    fn literal(&mut self) -> Result<Literal, GodelError> {
        match self.nat()? {
            0 => {
                let neg = self.nat()?;
                let num = self.nat()?;
                let den = self.nat()?;
                if neg > 1 || den == 0 || num > i64::MAX as u64 || den > i64::MAX as u64 {
                    return not_in_image("bad rational");
                }
                let num = if neg == 1 { -(num as i64) } else { num as i64 };
                Ok(Literal::Rational(Rational64::new(num, den as i64)))
            }
            1 => {
                let p = self.nat()?;
                let mut polys = Vec::new();
                for _ in 0..2 {
                    let len = self.nat()?;
                    if len > 1 << 16 {
                        return not_in_image("polynomial too long");
                    }
                    let cs = (0..len).map(|_| self.nat()).collect::<Result<Vec<_>, _>>()?;
                    polys.push(cs);
                }
                let den = polys.pop().expect("two");
                let num = polys.pop().expect("two");
                RatFunc::new(Poly::new(p, num), Poly::new(p, den))
                    .map(Literal::RatFunc)
                    .or_else(|e| not_in_image(&e.to_string()))
            }
            _ => not_in_image("bad literal tag"),
        }
    }

    fn term(&mut self) -> Result<Term, GodelError> {
        match self.nat()? {
            T_VAR => Ok(Term::Var(self.var()?)),
            T_CONST => Ok(Term::Const(self.symbol(SymbolKind::Constant)?.0)),
            T_APP => {
                let (f, arity) = self.symbol(SymbolKind::Function)?;
                let args = (0..arity).map(|_| self.term()).collect::<Result<_, _>>()?;
                Ok(Term::App(f, args))
            }
            T_LIT => Ok(Term::Lit(self.literal()?)),
            _ => not_in_image("bad term tag"),
        }
    }

    fn formula(&mut self) -> Result<Formula, GodelError> {
        Ok(match self.nat()? {
            F_TOP => Formula::Top,
            F_BOT => Formula::Bot,
            F_EQ => Formula::Eq(self.term()?, self.term()?),
            F_REL => {
                let (r, arity) = self.symbol(SymbolKind::Relation)?;
                let args = (0..arity).map(|_| self.term()).collect::<Result<_, _>>()?;
                Formula::Rel(r, args)
            }
            F_NOT => self.formula()?.not(),
            F_AND => self.formula()?.and(self.formula()?),
            F_OR => self.formula()?.or(self.formula()?),
            F_ALL => {
                let v = self.var()?;
                Formula::Forall(v, Box::new(self.formula()?))
            }
            F_EX => {
                let v = self.var()?;
                Formula::Exists(v, Box::new(self.formula()?))
            }
            _ => return not_in_image("bad formula tag"),
        })
    }
}

/// Inverse of [`godel_encode`]; numbers outside the image are rejected.
pub fn godel_decode(lang: &Language, n: &BigUint) -> Result<Formula, GodelError> {
    if lang.presentation().is_none() {
        return Err(GodelError::MissingPresentation(lang.name().into()));
    }
    if n.is_zero() {
        return not_in_image("zero");
    }
    let mut r = Reader { lang, n, pos: n.bits() - 1 };
    let f = r.formula()?;
    if r.pos != 0 {
        return not_in_image("trailing bits");
    }
    // Canonicity check: e.g. non-reduced literals decode but re-encode differently.
    if &godel_encode(lang, &f)? != n {
        return not_in_image("non-canonical code");
    }
    Ok(f)
}
