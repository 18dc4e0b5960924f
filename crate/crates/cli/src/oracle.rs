//! `oracle …`: arithmetic in 𝔽_p(s).

use std::collections::BTreeMap;
use std::io::Write;

use clap::Subcommand;
use fragred::formula::parse_formula;
use fragred::fpalg::{
    elements_up_to_height, exists_bounded, is_pth_power, pth_root_decompose, pth_root_recompose, Outcome as Search,
    RatFunc, SearchConfig,
};
use fragred::signature::{ring, LiteralDomain, FIELD};
use serde_json::json;

use crate::{emit, fail, inputs, Failure, Outcome};

#[derive(Subcommand)]
pub enum OracleOp {
    /// `f = Σ_j s^j λ_j^p`: prints `λ_0 … λ_{p−1}`.
    Decompose { f: String },
    /// `Σ_j s^j λ_j^p` from `λ_0 … λ_{p−1}`.
    Recompose { lambdas: Vec<String> },
    /// Whether `f` is a `p`-th power.
    IsPthPower { f: String },
    /// Every element of height at most `h`.
    Elements {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        height: usize,
    },
    /// Bounded witness search for an existential ring formula.
    Search {
        #[arg(long)]
        p: u64,
        /// Largest height of a candidate witness.
        #[arg(long, default_value_t = 2)]
        bound: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Values of free variables, e.g. `x={[0,1]/[1]@2}`.
        #[arg(long, value_delimiter = ';')]
        assign: Vec<String>,
        formula: Option<String>,
    },
}

fn ratfunc(s: &str) -> Result<RatFunc, Failure> {
    Ok(s.trim().parse::<RatFunc>()?)
}

pub fn run(op: OracleOp, json: bool, out: &mut impl Write) -> Outcome {
    match op {
        OracleOp::Decompose { f } => {
            let parts: Vec<String> = pth_root_decompose(&ratfunc(&f)?).iter().map(RatFunc::to_string).collect();
            emit(out, json, json!({ "lambdas": parts }), &parts.join(" "))
        }
        OracleOp::Recompose { lambdas } => {
            let ls = lambdas.iter().map(|l| ratfunc(l)).collect::<Result<Vec<_>, _>>()?;
            let Some(first) = ls.first() else { return fail("at least one λ is required") };
            if ls.len() as u64 != first.characteristic()
                || ls.iter().any(|l| l.characteristic() != first.characteristic())
            {
                return fail("expected exactly p elements of 𝔽_p(s)");
            }
            let f = pth_root_recompose(&ls);
            emit(out, json, json!({ "value": f.to_string() }), &f.to_string())
        }
        OracleOp::IsPthPower { f } => {
            let b = is_pth_power(&ratfunc(&f)?);
            emit(out, json, json!({ "pth_power": b }), &b.to_string())
        }
        OracleOp::Elements { p, height } => {
            if !fragred::fpalg::is_prime(p) {
                return fail(format!("{p} is not prime"));
            }
            let all: Vec<String> = elements_up_to_height(p, height).iter().map(RatFunc::to_string).collect();
            emit(out, json, json!({ "elements": all }), &all.join("\n"))
        }
        OracleOp::Search { p, bound, budget, assign, formula } => {
            let lang = ring().with_literals(LiteralDomain::RationalFunctions(p), FIELD)?;
            let mut env = BTreeMap::new();
            for a in assign.iter().filter(|a| !a.trim().is_empty()) {
                let Some((k, v)) = a.split_once('=') else { return fail(format!("bad assignment `{a}`")) };
                env.insert(fragred::formula::Var::field(k.trim()), ratfunc(v)?);
            }
            let config = SearchConfig { p, bound, budget };
            for src in inputs(&formula)? {
                let f = parse_formula(&lang, &src)?;
                let env: BTreeMap<_, _> =
                    f.free_variables().into_iter().filter_map(|v| env.get(&v).map(|x| (v, x.clone()))).collect();
                let (status, witness) = match exists_bounded(&f, &env, &config)? {
                    Search::Sat(w) => ("sat", w.into_iter().map(|(v, x)| (v.name, x.to_string())).collect()),
                    Search::Refuted => ("refuted", BTreeMap::new()),
                    Search::Unknown => ("unknown", BTreeMap::new()),
                };
                let mut text = status.to_string();
                for (v, x) in &witness {
                    text.push_str(&format!(" {v}={x}"));
                }
                emit(out, json, json!({ "status": status, "witness": witness }), &text)?;
            }
            Ok(())
        }
    }
}
