//! `reduce --map …`: the reduction maps and the coding formulas.

use std::io::Write;

use clap::{Args, ValueEnum};
use fragred::ffred::{self, ConstCount, CurveDatum};
use fragred::formula::{parse_formula, Formula};
use fragred::fragments::FragmentDescriptor;
use fragred::pcoding;
use fragred::signature::{extend_with_constants, ring, Language, FIELD};
use fragred::vfred;
use serde_json::json;

use crate::{descriptor, emit, fail, parse_all, Failure, LangArgs, Outcome};

#[derive(Clone, Copy, ValueEnum)]
pub enum Map {
    Chi,
    Pi,
    TauParam,
    TauNoparam,
    TauFf,
    TauRatConst,
    TauRatNoconst,
    #[value(name = "tau-curve-0")]
    TauCurve0,
    TauCurveP,
    TauDropPi,
    TauA1e,
    TauFinres,
}

#[derive(Args)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    map: Map,
    /// Characteristic for the `p`-coding maps.
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Size of the `p`-basis, or of the universal block for `tau-drop-pi`.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Arity of `χ`.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Dimension of the variety for `tau-ff`.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Field size: a prime power, or `inf` for `tau-rat-const`.
    #[arg(long, default_value = "2")]
    q: String,
    /// Inner fragment `F`.
    #[arg(long, default_value = "E")]
    fragment: String,
    /// One-variable existential formula `γ`.
    #[arg(long)]
    gamma: Option<String>,
    /// Constants naming a `p`-basis, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "t")]
    basis: Vec<String>,
    /// Curve description file for `tau-curve-0` / `tau-curve-p`.
    #[arg(long)]
    curve: Option<String>,
    /// Constant removed by `tau-drop-pi`.
    #[arg(long, default_value = "t")]
    uniformizer: String,
    formula: Option<String>,
}

fn finite_q(q: &str) -> Result<u64, Failure> {
    match q.parse::<ConstCount>()? {
        ConstCount::Finite(q) => Ok(q),
        ConstCount::Infinite => fail("this map needs a finite --q"),
    }
}

fn gamma(args: &ReduceArgs, lang: &Language) -> Result<Formula, Failure> {
    let Some(src) = &args.gamma else { return fail("this map needs --gamma") };
    Ok(parse_formula(lang, src)?)
}

fn curve(args: &ReduceArgs) -> Result<CurveDatum, Failure> {
    let Some(path) = &args.curve else { return fail("this map needs --curve FILE") };
    Ok(CurveDatum::parse(&std::fs::read_to_string(path)?)?)
}

/// One output formula with the fragment and language it is declared to lie in.
struct Image {
    formula: Formula,
    target: FragmentDescriptor,
    lang: Language,
}

fn print(out: &mut impl Write, json: bool, input: Option<&Formula>, images: &[Image]) -> Outcome {
    let items: Vec<_> = images
        .iter()
        .map(|i| {
            json!({
                "output": i.formula.to_string(),
                "target": i.target.to_string(),
                "language": i.lang.name(),
                "signature": i.lang.to_text(),
            })
        })
        .collect();
    let value = json!({ "input": input.map(Formula::to_string), "images": items });
    let text: Vec<String> = images.iter().map(|i| i.formula.to_string()).collect();
    emit(out, json, value, &text.join("\n"))
}

pub fn run(lang_args: &LangArgs, args: &ReduceArgs, json: bool, out: &mut impl Write) -> Outcome {
    let desc = descriptor(&args.fragment)?;
    let e = descriptor("E")?;
    let img = |formula, target, lang: &Language| Image { formula, target, lang: lang.clone() };
    match args.map {
        Map::Chi => {
            let f = pcoding::chi(args.p, args.n, args.r)?;
            return print(out, json, None, &[img(f, descriptor("E")?, &ring())]);
        }
        Map::Pi => {
            let f = pcoding::pi(args.p, args.n)?;
            return print(out, json, None, &[img(f, descriptor("E")?, &ring())]);
        }
        _ => {}
    }
    // Input language per map.
    let lang = match args.map {
        Map::TauRatConst | Map::TauFf => ring(),
        Map::TauRatNoconst => ffred::ring_with_t(),
        Map::TauCurve0 | Map::TauCurveP => curve(args)?.input_language(),
        Map::TauParam => {
            let base = lang_args.language()?;
            let missing: Vec<&str> =
                args.basis.iter().map(String::as_str).filter(|c| base.symbol(c).is_none()).collect();
            if missing.is_empty() {
                base
            } else {
                extend_with_constants(&base, &missing, FIELD)?
            }
        }
        Map::TauDropPi => {
            let base = lang_args.language()?;
            if base.symbol(&args.uniformizer).is_some() {
                base
            } else {
                extend_with_constants(&base, &[args.uniformizer.as_str()], FIELD)?
            }
        }
        _ => lang_args.language()?,
    };
    for f in parse_all(&lang, &args.formula)? {
        let images = match args.map {
            Map::Chi | Map::Pi => unreachable!("handled above"),
            Map::TauParam => {
                let cs: Vec<&str> = args.basis.iter().map(String::as_str).collect();
                let g = pcoding::tau_param(args.p, &lang, &cs, &desc, &f)?;
                vec![img(g, pcoding::target_param(&desc), &lang)]
            }
            Map::TauNoparam => {
                let g = pcoding::tau_noparam(args.p, args.n, &lang, &desc, &f)?;
                vec![img(g, pcoding::target_noparam(args.n, &desc), &lang)]
            }
            Map::TauFf => {
                let g = pcoding::tau_funcfield(args.p, args.n, args.d, &gamma(args, &ring())?, &desc, &f)?;
                vec![img(g, pcoding::target_funcfield(args.d, &desc), &lang)]
            }
            Map::TauRatConst => {
                let q: ConstCount = args.q.parse()?;
                let (g1, g2) = ffred::tau_rat_const(q, &f)?;
                vec![img(g1, e.clone(), &ffred::ring_with_t()), img(g2, descriptor("A1[E]")?, &ring())]
            }
            Map::TauRatNoconst => {
                let g = ffred::tau_rat_noconst(&gamma(args, &ring())?, &f)?;
                vec![img(g, descriptor("A1[E]")?, &ring())]
            }
            Map::TauCurve0 => {
                let c = curve(args)?;
                let g = ffred::tau_curve_char0(&c, &gamma(args, &c.base_language())?, &desc, &f)?;
                vec![img(g, descriptor("A2[E]")?, &c.base_language())]
            }
            Map::TauCurveP => {
                let c = curve(args)?;
                let g = ffred::tau_curve_charp(&c, &f)?;
                vec![img(g, descriptor("A1[E]")?, &c.base_language())]
            }
            Map::TauDropPi => {
                let (g, target) = vfred::tau_drop_pi_prenex(args.n, &desc, &lang, &args.uniformizer, &f)?;
                vec![img(g, vfred::drop_pi_source(args.n + 1, &desc), &target)]
            }
            Map::TauA1e => {
                let (g, target) = vfred::tau_a1e_to_e(finite_q(&args.q)?, &lang, &f)?;
                vec![img(g, e.clone(), &target)]
            }
            Map::TauFinres => {
                let g = vfred::tau_finite_residue(finite_q(&args.q)?, &desc, &lang, &f)?;
                vec![img(g, vfred::residue_existential_prefix(&desc), &lang)]
            }
        };
        print(out, json, Some(&f), &images)?;
    }
    Ok(())
}
