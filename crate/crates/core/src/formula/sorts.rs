use super::{Formula, Term};
use crate::signature::{Language, Sort, SymbolKind};
use std::collections::BTreeMap;
use std::fmt;

/// A sort-checking complaint located by child indices from the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagnostic {
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("at /")?;
        let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "{}: {}", p.join("/"), self.message)
    }
}

/// The sort of a term, or a description of why it has none.
pub fn term_sort(lang: &Language, t: &Term) -> Result<Sort, String> {
    let mut diags = Vec::new();
    check_term(lang, t, &mut Vec::new(), &mut diags)
        .ok_or_else(|| diags.first().map(|d| d.message.clone()).unwrap_or_default())
}

fn check_term(lang: &Language, t: &Term, path: &mut Vec<usize>, out: &mut Vec<Diagnostic>) -> Option<Sort> {
    let mut err = |m: String, path: &Vec<usize>| {
        out.push(Diagnostic { path: path.clone(), message: m });
        None
    };
    match t {
        Term::Var(v) => {
            if lang.has_sort(&v.sort) {
                Some(v.sort.clone())
            } else {
                err(format!("variable `{}` has unknown sort `{}`", v.name, v.sort), path)
            }
        }
        Term::Lit(l) => match lang.literals() {
            Some((dom, sort)) if dom.admits(l) => Some(sort.clone()),
            _ => err(format!("literal {l} is not a constant of {}", lang.name()), path),
        },
        Term::Const(c) => match lang.symbol(c) {
            Some(sym) if sym.kind == SymbolKind::Constant => sym.result.clone(),
            Some(_) => err(format!("`{c}` is not a constant"), path),
            None => err(format!("unknown constant `{c}`"), path),
        },
        Term::App(f, args) => {
            let sym = match lang.symbol(f) {
                Some(s) if s.kind == SymbolKind::Function => s.clone(),
                Some(_) => return err(format!("`{f}` is not a function symbol"), path),
                None => return err(format!("unknown function `{f}`"), path),
            };
            if sym.arity() != args.len() {
                return err(format!("`{f}` expects {} arguments, got {}", sym.arity(), args.len()), path);
            }
            let mut ok = true;
            for (i, (a, want)) in args.iter().zip(&sym.args).enumerate() {
                path.push(i);
                match check_term(lang, a, path, out) {
                    Some(s) if &s == want => {}
                    Some(s) => {
                        out.push(Diagnostic {
                            path: path.clone(),
                            message: format!("argument {} of `{f}` has sort `{s}`, expected `{want}`", i + 1),
                        });
                        ok = false;
                    }
                    None => ok = false,
                }
                path.pop();
            }
            ok.then(|| sym.result.clone()).flatten()
        }
    }
}

/// All sort errors in `f`; empty iff `f` is a well-sorted formula of `lang`.
pub fn well_sorted(lang: &Language, f: &Formula) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_formula(lang, f, &mut Vec::new(), &mut out);
    let mut seen: BTreeMap<&str, &Sort> = BTreeMap::new();
    let free = f.free_variables();
    for v in &free {
        if let Some(s) = seen.insert(&v.name, &v.sort) {
            out.push(Diagnostic {
                path: Vec::new(),
                message: format!("free variable `{}` is used at sorts `{s}` and `{}`", v.name, v.sort),
            });
        }
    }
    out
}

fn check_formula(lang: &Language, f: &Formula, path: &mut Vec<usize>, out: &mut Vec<Diagnostic>) {
    let child = |i: usize, g: &Formula, path: &mut Vec<usize>, out: &mut Vec<Diagnostic>| {
        path.push(i);
        check_formula(lang, g, path, out);
        path.pop();
    };
    match f {
        Formula::Top | Formula::Bot => {}
        Formula::Eq(a, b) => {
            path.push(0);
            let sa = check_term(lang, a, path, out);
            path.pop();
            path.push(1);
            let sb = check_term(lang, b, path, out);
            path.pop();
            if let (Some(x), Some(y)) = (sa, sb) {
                if x != y {
                    out.push(Diagnostic {
                        path: path.clone(),
                        message: format!("equation between sorts `{x}` and `{y}`"),
                    });
                }
            }
        }
        Formula::Rel(r, args) => {
            let sym = match lang.symbol(r) {
                Some(s) if s.kind == SymbolKind::Relation => s.clone(),
                Some(_) => {
                    out.push(Diagnostic { path: path.clone(), message: format!("`{r}` is not a relation") });
                    return;
                }
                None => {
                    out.push(Diagnostic { path: path.clone(), message: format!("unknown relation `{r}`") });
                    return;
                }
            };
            if sym.arity() != args.len() {
                out.push(Diagnostic {
                    path: path.clone(),
                    message: format!("`{r}` expects {} arguments, got {}", sym.arity(), args.len()),
                });
                return;
            }
            for (i, (a, want)) in args.iter().zip(&sym.args).enumerate() {
                path.push(i);
                if let Some(s) = check_term(lang, a, path, out) {
                    if &s != want {
                        out.push(Diagnostic {
                            path: path.clone(),
                            message: format!("argument {} of `{r}` has sort `{s}`, expected `{want}`", i + 1),
                        });
                    }
                }
                path.pop();
            }
        }
        Formula::Not(a) => child(0, a, path, out),
        Formula::And(a, b) | Formula::Or(a, b) => {
            child(0, a, path, out);
            child(1, b, path, out);
        }
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            if !lang.has_sort(&v.sort) {
                out.push(Diagnostic {
                    path: path.clone(),
                    message: format!("bound variable `{}` has unknown sort `{}`", v.name, v.sort),
                });
            }
            child(0, a, path, out);
        }
    }
}
