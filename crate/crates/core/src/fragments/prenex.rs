use super::{FragmentDescriptor, FragmentError};
use crate::formula::{rename_bound, well_sorted, Formula, FreshNames, Quantifier, Var};
use crate::signature::Language;
use std::collections::BTreeSet;

/// Output of [`prnx`]: `Q₁x₁ … Qₙxₙ η` with `η` in the negation closure
/// `F′` and `n` minimal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Prenex {
    pub formula: Formula,
    pub prefix: Vec<(Quantifier, Var)>,
    pub matrix: Formula,
}

impl Prenex {
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }
}

/// Splits `f` as `Q₁x₁ … Qₙxₙ η` with `η ∈ F′` and `n` minimal, or `None`
/// if no such split exists.
pub fn split_prefix(desc: &FragmentDescriptor, f: &Formula) -> Option<(Vec<(Quantifier, Var)>, Formula)> {
    let mut prefix = Vec::new();
    let mut cur = f;
    loop {
        if desc.contains_negation_closure(cur) {
            return Some((prefix, cur.clone()));
        }
        let (q, x, body) = cur.as_quant()?;
        prefix.push((q, x.clone()));
        cur = body;
    }
}

fn rebuild(prefix: &[(Quantifier, Var)], matrix: Formula) -> Formula {
    prefix.iter().rev().fold(matrix, |acc, (q, x)| Formula::quant(*q, x.clone(), acc))
}

/// Renames the binder at depth `depth` of a prenex formula to `y`.
fn rename_at(f: &Formula, depth: usize, y: &Var) -> Formula {
    if depth == 0 {
        return rename_bound(f, y);
    }
    match f.as_quant() {
        Some((q, x, body)) => Formula::quant(q, x.clone(), rename_at(body, depth - 1, y)),
        None => f.clone(),
    }
}

/// Prenex form relative to the fragment `desc`.
///
/// Members of `F′` are left alone; a quantifier is pulled through `¬` by
/// flipping the minimal prefix; for `∧`/`∨` the prefixes are concatenated,
/// first conjunct first. A bound variable of the second operand that clashes
/// with a bound variable or free variable of the first is renamed to the next
/// unused primed name. Symmetrically, a bound variable of the first operand
/// that occurs free in the second is renamed, so no free occurrence is ever
/// captured.
pub fn prnx(desc: &FragmentDescriptor, lang: &Language, f: &Formula) -> Result<Prenex, FragmentError> {
    let d = well_sorted(lang, f);
    if !d.is_empty() {
        return Err(FragmentError::IllSorted(d));
    }
    let mut names = FreshNames::avoiding(f);
    let formula = go(desc, f, &mut names);
    let (prefix, matrix) = split_prefix(desc, &formula).expect("prenex output splits");
    Ok(Prenex { formula, prefix, matrix })
}

fn split(desc: &FragmentDescriptor, f: &Formula) -> (Vec<(Quantifier, Var)>, Formula) {
    split_prefix(desc, f).expect("prenex output splits")
}

fn go(desc: &FragmentDescriptor, f: &Formula, names: &mut FreshNames) -> Formula {
    if desc.contains_negation_closure(f) {
        return f.clone();
    }
    match f {
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let q = f.as_quant().expect("quantifier").0;
            Formula::quant(q, x.clone(), go(desc, body, names))
        }
        Formula::Not(a) => {
            let p = go(desc, a, names);
            let (prefix, eta) = split(desc, &p);
            let flipped: Vec<_> = prefix.into_iter().map(|(q, x)| (q.dual(), x)).collect();
            rebuild(&flipped, eta.not())
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let is_and = matches!(f, Formula::And(..));
            let mut p1 = go(desc, a, names);
            let mut p2 = go(desc, b, names);

            let free2 = p2.free_variables();
            let (pre1, _) = split(desc, &p1);
            for (j, (_, x)) in pre1.iter().enumerate() {
                if free2.contains(x) {
                    let y = Var::new(&names.fresh_indexed(&x.name), &x.sort);
                    p1 = rename_at(&p1, j, &y);
                }
            }

            let (pre1, eta1) = split(desc, &p1);
            let mut clash: BTreeSet<Var> = eta1.free_variables();
            clash.extend(pre1.iter().map(|(_, x)| x.clone()));
            let (pre2, _) = split(desc, &p2);
            for (j, (_, x)) in pre2.iter().enumerate() {
                if clash.contains(x) {
                    let y = Var::new(&names.fresh_indexed(&x.name), &x.sort);
                    p2 = rename_at(&p2, j, &y);
                }
            }

            let (pre2, eta2) = split(desc, &p2);
            let matrix = if is_and { eta1.and(eta2) } else { eta1.or(eta2) };
            let mut prefix = pre1;
            prefix.extend(pre2);
            rebuild(&prefix, matrix)
        }
        // Atoms are quantifier-free, hence in F′.
        _ => f.clone(),
    }
}
