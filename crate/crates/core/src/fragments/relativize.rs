use super::FragmentError;
use crate::formula::{Formula, Var};

/// Relativizes the quantifiers of `f` to the set defined by `eta`:
/// `(∃xα)^η = ∃x(η(x) ∧ α^η)` and `(∀xα)^η = ∀x(η′(x) ∨ α^η)`, where
/// `eta_neg` is a formula equivalent to `¬η` (typically its prenex form).
///
/// `eta` must have exactly one free variable; only quantifiers over that
/// variable's sort are relativized.
pub fn relativize(f: &Formula, eta: &Formula, eta_neg: &Formula) -> Result<Formula, FragmentError> {
    let free = eta.free_variables();
    let v = match free.iter().collect::<Vec<_>>().as_slice() {
        [v] => (*v).clone(),
        _ => return Err(FragmentError::BadRelativizer(format!("expected one free variable, found {}", free.len()))),
    };
    if !eta_neg.free_variables().is_subset(&free) {
        return Err(FragmentError::BadRelativizer("negated form has extra free variables".into()));
    }
    Ok(go(f, &v, eta, eta_neg))
}

fn go(f: &Formula, v: &Var, eta: &Formula, eta_neg: &Formula) -> Formula {
    match f {
        Formula::Not(a) => go(a, v, eta, eta_neg).not(),
        Formula::And(a, b) => go(a, v, eta, eta_neg).and(go(b, v, eta, eta_neg)),
        Formula::Or(a, b) => go(a, v, eta, eta_neg).or(go(b, v, eta, eta_neg)),
        Formula::Exists(x, a) if x.sort == v.sort => {
            Formula::Exists(x.clone(), Box::new(eta.instantiate(v, x.term()).and(go(a, v, eta, eta_neg))))
        }
        Formula::Forall(x, a) if x.sort == v.sort => {
            Formula::Forall(x.clone(), Box::new(eta_neg.instantiate(v, x.term()).or(go(a, v, eta, eta_neg))))
        }
        Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(go(a, v, eta, eta_neg))),
        Formula::Forall(x, a) => Formula::Forall(x.clone(), Box::new(go(a, v, eta, eta_neg))),
        atom => atom.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::signature::ring;

    #[test]
    fn relativizes_both_quantifiers() {
        let r = ring();
        let eta = parse_formula(&r, "(exists (w field) (= v (* w w)))").unwrap();
        let eta_neg = parse_formula(&r, "(forall (w field) (not (= v (* w w))))").unwrap();
        let f = parse_formula(&r, "(forall (x field) (exists (y field) (= x y)))").unwrap();
        let g = relativize(&f, &eta, &eta_neg).unwrap();
        assert_eq!(
            g.to_string(),
            "(forall (x field) (or (forall (w field) (not (= x (* w w)))) \
             (exists (y field) (and (exists (w field) (= y (* w w))) (= x y)))))"
        );
    }

    #[test]
    fn relativizer_needs_one_free_variable() {
        let r = ring();
        let eta = parse_formula(&r, "(= a b)").unwrap();
        assert!(relativize(&Formula::Top, &eta, &eta).is_err());
    }
}
