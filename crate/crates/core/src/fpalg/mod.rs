//! Exact arithmetic in 𝔽_p(s), the p-th-root decomposition over the p-basis
//! {1, s, …, s^{p−1}}, and a bounded witness search for existential sentences.
//!
//! This module is the ground-truth oracle for the coding formulas in
//! [`crate::pcoding`]: everything here is computed independently of the
//! formula machinery.

mod poly;
mod search;

pub use poly::{inv_mod, is_prime, pow_mod, prime_power, Poly};
pub use search::{eval_formula, eval_term, exists_bounded, Outcome, SearchConfig, SearchError};

use rand::Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FpError {
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a supported prime characteristic")]
    BadCharacteristic(u64),
    #[error("malformed rational-function literal: {0}")]
    Parse(String),
}

/// Largest characteristic accepted; keeps products inside `u64`.
pub const MAX_CHARACTERISTIC: u64 = 1 << 31;

/// An element of 𝔽_p(s) as a reduced fraction.
///
/// Invariant: `gcd(num, den) = 1`, `den` is monic, and zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, FpError> {
        let p = num.characteristic();
        check_char(p)?;
        if den.characteristic() != p {
            return Err(FpError::CharacteristicMismatch(p, den.characteristic()));
        }
        if den.is_zero() {
            return Err(FpError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: Poly, den: Poly) -> Self {
        let p = num.characteristic();
        if num.is_zero() {
            return RatFunc { num, den: Poly::one(p) };
        }
        let g = num.gcd(&den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        let lc = d.leading();
        let inv = inv_mod(lc, p);
        RatFunc { num: n.scale(inv), den: d.scale(inv) }
    }

    pub fn zero(p: u64) -> Self {
        RatFunc { num: Poly::zero(p), den: Poly::one(p) }
    }

    pub fn one(p: u64) -> Self {
        Self::constant(p, 1)
    }

    pub fn constant(p: u64, c: u64) -> Self {
        RatFunc { num: Poly::constant(p, c), den: Poly::one(p) }
    }

    /// The transcendental `s`.
    pub fn s(p: u64) -> Self {
        RatFunc { num: Poly::s(p), den: Poly::one(p) }
    }

    pub fn from_poly(num: Poly) -> Self {
        let p = num.characteristic();
        RatFunc { num, den: Poly::one(p) }
    }

    pub fn characteristic(&self) -> u64 {
        self.num.characteristic()
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `max(deg num, deg den)`.
    pub fn height(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    fn same_char(&self, other: &RatFunc) -> Result<u64, FpError> {
        let (p, q) = (self.characteristic(), other.characteristic());
        if p == q {
            Ok(p)
        } else {
            Err(FpError::CharacteristicMismatch(p, q))
        }
    }

    pub fn checked_add(&self, other: &RatFunc) -> Result<RatFunc, FpError> {
        self.same_char(other)?;
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Ok(Self::reduced(num, self.den.mul(&other.den)))
    }

    pub fn checked_sub(&self, other: &RatFunc) -> Result<RatFunc, FpError> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &RatFunc) -> Result<RatFunc, FpError> {
        self.same_char(other)?;
        Ok(Self::reduced(self.num.mul(&other.num), self.den.mul(&other.den)))
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<RatFunc, FpError> {
        self.same_char(other)?;
        if other.is_zero() {
            return Err(FpError::DivisionByZero);
        }
        Ok(Self::reduced(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<RatFunc, FpError> {
        RatFunc::one(self.characteristic()).checked_div(self)
    }

    pub fn pow(&self, e: u64) -> RatFunc {
        RatFunc { num: self.num.pow(e), den: self.den.pow(e) }
    }

    /// Human-readable form such as `(s^3 + s)/(s + 1)`.
    pub fn pretty(&self) -> String {
        let n = pretty_poly(&self.num);
        if self.den.is_one() {
            return n;
        }
        format!("({})/({})", n, pretty_poly(&self.den))
    }
}

fn check_char(p: u64) -> Result<(), FpError> {
    if is_prime(p) && p < MAX_CHARACTERISTIC {
        Ok(())
    } else {
        Err(FpError::BadCharacteristic(p))
    }
}

fn pretty_poly(f: &Poly) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, &c) in f.coeffs().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "s".into(),
            _ => format!("s^{i}"),
        };
        parts.push(match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        });
    }
    parts.join(" + ")
}

impl fmt::Display for RatFunc {
    /// Literal form `{[a0,…]/[b0,…]@p}` with ascending dense coefficients.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}/{}@{}}}", self.num, self.den, self.characteristic())
    }
}

impl FromStr for RatFunc {
    type Err = FpError;

    /// Accepts `{[a0,…]/[b0,…]@p}`; the `/[…]` part may be omitted.
    fn from_str(s: &str) -> Result<Self, FpError> {
        let bad = || FpError::Parse(s.to_string());
        let body = s.trim().strip_prefix('{').and_then(|b| b.strip_suffix('}')).ok_or_else(bad)?;
        let (fraction, p) = body.rsplit_once('@').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        check_char(p)?;
        let (n, d) = match fraction.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (fraction, None),
        };
        let num = parse_coeffs(n, p).ok_or_else(bad)?;
        let den = match d {
            Some(d) => parse_coeffs(d, p).ok_or_else(bad)?,
            None => Poly::one(p),
        };
        RatFunc::new(num, den)
    }
}

fn parse_coeffs(s: &str, p: u64) -> Option<Poly> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let coeffs = inner.split(',').map(|c| c.trim().parse::<u64>().ok()).collect::<Option<Vec<_>>>()?;
    Some(Poly::new(p, coeffs))
}

macro_rules! forward_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl std::ops::$tr for &RatFunc {
            type Output = RatFunc;
            /// Panics on mismatched characteristics (and on division by zero).
            fn $m(self, rhs: &RatFunc) -> RatFunc {
                self.$checked(rhs).expect(concat!("RatFunc ", stringify!($m)))
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

impl std::ops::Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::neg(self)
    }
}

/// Unique `λ_0, …, λ_{p−1}` with `f = Σ_j λ_j^p s^j`.
///
/// Write `f = N/D = N·D^{p−1} / D^p`. Since `D^p = D(s^p)` coefficientwise,
/// splitting `G = N·D^{p−1}` by exponent residue gives `G = Σ_j s^j H_j(s)^p`,
/// hence `λ_j = H_j / D`.
pub fn pth_root_decompose(f: &RatFunc) -> Vec<RatFunc> {
    let p = f.characteristic();
    let pu = p as usize;
    let g = f.num.mul(&f.den.pow(p - 1));
    (0..pu)
        .map(|j| {
            let h: Vec<u64> = g.coeffs().iter().skip(j).step_by(pu).copied().collect();
            RatFunc::reduced(Poly::new(p, h), f.den.clone())
        })
        .collect()
}

/// Whether `f ∈ 𝔽_p(s)^p`.
pub fn is_pth_power(f: &RatFunc) -> bool {
    pth_root_decompose(f).iter().skip(1).all(RatFunc::is_zero)
}

/// `Σ_j λ_j^p s^j` — inverse of [`pth_root_decompose`].
pub fn pth_root_recompose(lambdas: &[RatFunc]) -> RatFunc {
    let p = lambdas[0].characteristic();
    let mut acc = RatFunc::zero(p);
    let mut s_j = RatFunc::one(p);
    for l in lambdas {
        acc = &acc + &(&l.pow(p) * &s_j);
        s_j = &s_j * &RatFunc::s(p);
    }
    acc
}

/// Every element of height at most `h`, ordered by height, then denominator,
/// then numerator coefficients.
pub fn elements_up_to_height(p: u64, h: usize) -> Vec<RatFunc> {
    let polys = polys_up_to_degree(p, h);
    let mut out = Vec::new();
    for den in polys.iter().filter(|d| d.leading() == 1) {
        for num in &polys {
            if !num.is_zero() && !num.gcd(den).is_one() {
                continue;
            }
            if num.is_zero() && !den.is_one() {
                continue;
            }
            out.push(RatFunc { num: num.clone(), den: den.clone() });
        }
    }
    out.sort_by(|a, b| {
        (a.height(), a.den.degree(), a.den.coeffs(), a.num.degree(), a.num.coeffs()).cmp(&(
            b.height(),
            b.den.degree(),
            b.den.coeffs(),
            b.num.degree(),
            b.num.coeffs(),
        ))
    });
    out
}

fn polys_up_to_degree(p: u64, d: usize) -> Vec<Poly> {
    let mut out = vec![Vec::new()];
    for _ in 0..=d {
        let mut next = Vec::with_capacity(out.len() * p as usize);
        for v in &out {
            for c in 0..p {
                let mut w: Vec<u64> = v.clone();
                w.push(c);
                next.push(w);
            }
        }
        out = next;
    }
    let mut polys: Vec<Poly> = out.into_iter().map(|c| Poly::new(p, c)).collect();
    polys.sort_by(|a, b| (a.degree(), a.coeffs()).cmp(&(b.degree(), b.coeffs())));
    polys.dedup();
    polys
}

/// A random element of height at most `h`.
pub fn random_ratfunc<R: Rng + ?Sized>(rng: &mut R, p: u64, h: usize) -> RatFunc {
    let num: Vec<u64> = (0..=rng.gen_range(0..=h)).map(|_| rng.gen_range(0..p)).collect();
    let dd = rng.gen_range(0..=h);
    let mut den: Vec<u64> = (0..dd).map(|_| rng.gen_range(0..p)).collect();
    den.push(1);
    RatFunc::reduced(Poly::new(p, num), Poly::new(p, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    #[test]
    fn literal_round_trip() {
        let f = rf("{[0,1,0,1]/[1,1]@2}");
        assert_eq!(f.to_string().parse::<RatFunc>().unwrap(), f);
        assert_eq!(rf("{[2,2]/[2]@3}"), rf("{[1,1]@3}"));
        assert!("{[1]/[0]@3}".parse::<RatFunc>().is_err());
        assert!("{[1]@4}".parse::<RatFunc>().is_err());
    }

    #[test]
    fn decompose_one_over_s() {
        // 1/s = (1/s)^2 · s in characteristic 2.
        let l = pth_root_decompose(&rf("{[1]/[0,1]@2}"));
        assert_eq!(l, vec![RatFunc::zero(2), rf("{[1]/[0,1]@2}")]);
    }

    #[test]
    fn decompose_polynomial() {
        // s^3 + s = 0^2 + (s+1)^2·s over 𝔽_2.
        let l = pth_root_decompose(&rf("{[0,1,0,1]@2}"));
        assert_eq!(l, vec![RatFunc::zero(2), rf("{[1,1]@2}")]);
    }

    #[test]
    fn pth_powers() {
        assert!(is_pth_power(&rf("{[1,0,1]@2}")));
        assert!(!is_pth_power(&RatFunc::s(2)));
        assert!(is_pth_power(&rf("{[1]/[0,0,0,1]@3}")));
    }

    #[test]
    fn mismatched_characteristic_is_an_error() {
        assert_eq!(RatFunc::s(2).checked_add(&RatFunc::s(3)), Err(FpError::CharacteristicMismatch(2, 3)));
        assert_eq!(RatFunc::s(5).checked_div(&RatFunc::zero(5)), Err(FpError::DivisionByZero));
    }

    #[test]
    fn enumeration_counts() {
        // Height 0 over 𝔽_2: {0, 1}.
        assert_eq!(elements_up_to_height(2, 0).len(), 2);
        let h1 = elements_up_to_height(2, 1);
        // 0, 1, s, s+1, 1/s, 1/(s+1), (s+1)/s, s/(s+1).
        assert_eq!(h1.len(), 8);
        let mut dedup = h1.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), h1.len());
    }
}
