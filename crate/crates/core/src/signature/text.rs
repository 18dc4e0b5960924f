//! Line-oriented signature files.
//!
//! ```text
//! # comments start with '#'
//! language val
//! sorts field group residue
//! function + : field field -> field @0
//! function -G : group -> group
//! constant 0 : field
//! relation <=G : group group
//! literals Q field
//! ```
//!
//! The `@N` presentation codes are optional but must be given for every
//! symbol or for none. `literals` accepts `Q`, `F<p>` and `F<p>(s)`.

use super::{Language, LiteralDomain, SignatureError, Sort, Symbol, SymbolKind};

pub(super) fn parse(src: &str) -> Result<Language, SignatureError> {
    let mut name = "custom".to_string();
    let mut sorts: Option<Vec<Sort>> = None;
    let mut symbols = Vec::new();
    let mut codes = Vec::new();
    let mut literals = None;
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let err = |m: &str| SignatureError::Syntax { line: line_no, message: m.to_string() };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match head {
            "language" => name = rest.to_string(),
            "sorts" => {
                if sorts.is_some() {
                    return Err(err("sorts declared twice"));
                }
                sorts = Some(rest.split_whitespace().map(Sort::new).collect());
            }
            "literals" => {
                let mut parts = rest.split_whitespace();
                let dom = parts.next().ok_or_else(|| err("missing literal domain"))?;
                let sort = parts.next().ok_or_else(|| err("missing literal sort"))?;
                literals = Some((parse_domain(dom).ok_or_else(|| err("unknown literal domain"))?, sort.to_string()));
            }
            "function" | "relation" | "constant" => {
                if sorts.is_none() {
                    return Err(err("symbols must follow the sorts line"));
                }
                let (decl, code) = match rest.rsplit_once('@') {
                    Some((d, c)) => (d.trim(), Some(c.trim().parse::<u64>().map_err(|_| err("bad code"))?)),
                    None => (rest, None),
                };
                let (sym_name, sig) = decl.split_once(" :").ok_or_else(|| err("expected `NAME : SIGNATURE`"))?;
                let sym_name = sym_name.trim();
                let sig = sig.trim();
                let sym = match head {
                    "function" => {
                        let (args, res) = sig.split_once("->").ok_or_else(|| err("expected `->`"))?;
                        let args: Vec<&str> = args.split_whitespace().collect();
                        if args.is_empty() {
                            return Err(err("functions need at least one argument; use `constant`"));
                        }
                        Symbol::function(sym_name, &args, res.trim())
                    }
                    "relation" => Symbol::relation(sym_name, &sig.split_whitespace().collect::<Vec<_>>()),
                    _ => Symbol::constant(sym_name, sig),
                };
                symbols.push(sym);
                codes.push(code);
            }
            other => return Err(err(&format!("unknown directive `{other}`"))),
        }
    }
    let sorts = sorts.ok_or(SignatureError::Syntax { line: 0, message: "missing sorts line".into() })?;
    let mut lang = Language::new(&name, sorts, symbols)?;
    if codes.iter().any(Option::is_some) {
        let all: Option<Vec<u64>> = codes.iter().copied().collect();
        match all {
            Some(c) => lang = lang.with_presentation(c)?,
            None => {
                let i = codes.iter().position(Option::is_none).unwrap_or(0);
                return Err(SignatureError::PartialPresentation(lang.symbols()[i].name.clone()));
            }
        }
    }
    if let Some((dom, sort)) = literals {
        let keep = lang.name.clone();
        lang = lang.with_literals(dom, &sort)?;
        lang.name = keep;
    }
    Ok(lang)
}

pub(super) fn parse_domain(s: &str) -> Option<LiteralDomain> {
    if s == "Q" {
        return Some(LiteralDomain::Rationals);
    }
    let rest = s.strip_prefix('F')?;
    match rest.strip_suffix("(s)") {
        Some(p) => p.parse().ok().map(LiteralDomain::RationalFunctions),
        None => rest.parse().ok().map(LiteralDomain::PrimeField),
    }
}

pub(super) fn print(lang: &Language) -> String {
    let mut out = format!("language {}\nsorts", lang.name);
    for s in lang.sorts() {
        out.push(' ');
        out.push_str(s.name());
    }
    out.push('\n');
    for (i, sym) in lang.symbols().iter().enumerate() {
        let args: Vec<&str> = sym.args.iter().map(Sort::name).collect();
        let line = match sym.kind {
            SymbolKind::Function => format!(
                "function {} : {} -> {}",
                sym.name,
                args.join(" "),
                sym.result.as_ref().map_or("", |r| r.name())
            ),
            SymbolKind::Relation => format!("relation {} : {}", sym.name, args.join(" ")),
            SymbolKind::Constant => {
                format!("constant {} : {}", sym.name, sym.result.as_ref().map_or("", |r| r.name()))
            }
        };
        out.push_str(&line);
        if let Some(codes) = lang.presentation() {
            out.push_str(&format!(" @{}", codes[i]));
        }
        out.push('\n');
    }
    if let Some((dom, sort)) = lang.literals() {
        out.push_str(&format!("literals {dom} {sort}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn builtins_round_trip() {
        for lang in [ring(), graph(), valued_field()] {
            let text = lang.to_text();
            let back = Language::from_text(&text).unwrap();
            assert_eq!(back, lang);
            assert_eq!(back.presentation(), lang.presentation());
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn literals_line() {
        let src = "sorts field\nconstant 0 : field\nliterals F5(s) field\n";
        let lang = Language::from_text(src).unwrap();
        assert_eq!(lang.literals().unwrap().0, LiteralDomain::RationalFunctions(5));
    }

    #[test]
    fn partial_presentation_rejected() {
        let src = "sorts a\nconstant c : a @1\nconstant d : a\n";
        assert!(matches!(Language::from_text(src), Err(SignatureError::PartialPresentation(_))));
    }

    #[test]
    fn unknown_sort_rejected() {
        let src = "sorts a\nfunction f : b -> a\n";
        assert_eq!(Language::from_text(src), Err(SignatureError::UnknownSort("b".into())));
    }
}
