//! `fragred` command-line front end.
//!
//! Formulas are read one per line from standard input unless given as an
//! argument. Exit status: 0 on success, 1 on a domain error, 2 on a usage
//! error.

mod oracle;
mod reduce;

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fragred::formula::{parse_formula, Formula, Var};
use fragred::fragments::{mem_fragment, prnx, FragmentDescriptor};
use fragred::models::{eval_with_budget, example_sentence, named_structure, tournament_models, FiniteStructure};
use fragred::redgraph::{build_graph, Hypothesis};
use fragred::signature::{builtin, extend_with_constants, godel_decode, godel_encode, Language, LiteralDomain, FIELD};
use serde_json::json;

/// Environment variable bounding the number of nodes `eval` may visit.
const BUDGET_VAR: &str = "FRAGRED_EVAL_BUDGET";
const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Parser)]
#[command(name = "fragred", version, about = "Fragments, prenex forms and reductions between first-order theories")]
struct Cli {
    #[command(flatten)]
    lang: LangArgs,
    /// Structured JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct LangArgs {
    /// Built-in language (`ring`, `graph`, `val`) or a signature file.
    #[arg(long, global = true, default_value = "ring")]
    lang: String,
    /// Extra field-sort constants, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    constants: Vec<String>,
    /// Literal domain on the field sort: `Q`, `F<p>` or `F<p>(s)`.
    #[arg(long, global = true)]
    literals: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and pretty-print formulas.
    Parse {
        formula: Option<String>,
        /// Print the Gödel number instead.
        #[arg(long, conflicts_with = "decode")]
        godel: bool,
        /// Read Gödel numbers and print the formulas they code.
        #[arg(long)]
        decode: bool,
        /// Print the language's signature and exit.
        #[arg(long)]
        signature: bool,
    },
    /// Decide membership in a fragment.
    Classify {
        #[arg(long)]
        fragment: String,
        formula: Option<String>,
    },
    /// Prenex normal form relative to a fragment.
    Prenex {
        #[arg(long = "relative-to", default_value = "F0")]
        relative_to: String,
        formula: Option<String>,
    },
    /// Apply a reduction map.
    Reduce(reduce::ReduceArgs),
    /// Evaluate sentences (or formulas under `--assign`) in a finite structure.
    Eval {
        /// Structure name (`gamma3`, `N2`, `M1`, `Z4`, `F4`, `V3`, …) or JSON file.
        #[arg(long)]
        structure: String,
        /// Values of free variables, e.g. `u=1,v=0`.
        #[arg(long, value_delimiter = ',')]
        assign: Vec<String>,
        formula: Option<String>,
    },
    /// Arithmetic and witness search in 𝔽_p(s).
    Oracle {
        #[command(subcommand)]
        op: oracle::OracleOp,
    },
    /// Queries on the graph of reductions.
    Graph {
        #[command(subcommand)]
        op: GraphOp,
    },
    /// Worked examples.
    Example {
        #[command(subcommand)]
        which: ExampleOp,
    },
}

#[derive(Subcommand)]
enum GraphOp {
    /// Shortest enabled path between two nodes.
    Path {
        /// Node id, e.g. `kv.A1E`.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Hypotheses: `R4`, `charZero`, `charP`, `kFinite`, `kPerfect`.
        #[arg(long, value_delimiter = ',')]
        assume: Vec<String>,
    },
    /// Mutual-reachability classes.
    Classes {
        /// Hypotheses, as for `path`.
        #[arg(long, value_delimiter = ',')]
        assume: Vec<String>,
    },
    /// All nodes and edges.
    Dump,
}

#[derive(Subcommand)]
enum ExampleOp {
    /// The tournament sentence on `N_c` and `M_c`.
    Tournament {
        #[arg(long, default_value_t = 1)]
        copies: usize,
    },
}

/// A domain error, reported on standard error with exit status 1.
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

pub fn fail<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(msg.into()))
}

impl LangArgs {
    pub fn language(&self) -> Result<Language, Failure> {
        let mut lang = match builtin(&self.lang) {
            Some(l) => l,
            None => {
                let text = std::fs::read_to_string(&self.lang).map_err(|e| {
                    Failure(format!("`{}` is neither a built-in language nor a readable file: {e}", self.lang))
                })?;
                Language::from_text(&text)?
            }
        };
        if !self.constants.is_empty() {
            let names: Vec<&str> = self.constants.iter().map(String::as_str).collect();
            lang = extend_with_constants(&lang, &names, FIELD)?;
        }
        if let Some(lit) = &self.literals {
            let domain: LiteralDomain = lit.parse()?;
            lang = lang.with_literals(domain, FIELD)?;
        }
        Ok(lang)
    }
}

/// The formula argument, or every non-blank line of standard input.
pub fn inputs(arg: &Option<String>) -> Result<Vec<String>, Failure> {
    if let Some(a) = arg {
        return Ok(vec![a.clone()]);
    }
    let mut out = Vec::new();
    for line in io::stdin().lock().lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with(';') {
            out.push(t.to_string());
        }
    }
    Ok(out)
}

pub fn parse_all(lang: &Language, arg: &Option<String>) -> Result<Vec<Formula>, Failure> {
    inputs(arg)?
        .iter()
        .enumerate()
        .map(|(i, src)| parse_formula(lang, src).map_err(|e| Failure(format!("input {}: {e}", i + 1))))
        .collect()
}

pub fn descriptor(s: &str) -> Result<FragmentDescriptor, Failure> {
    Ok(FragmentDescriptor::parse(s)?)
}

pub fn emit(out: &mut impl Write, json: bool, value: serde_json::Value, text: &str) -> Outcome {
    if json {
        writeln!(out, "{value}")?;
    } else {
        writeln!(out, "{text}")?;
    }
    Ok(())
}

fn hypotheses(names: &[String]) -> Result<Vec<Hypothesis>, Failure> {
    names.iter().filter(|s| !s.is_empty()).map(|s| s.parse::<Hypothesis>().map_err(Failure::from)).collect()
}

fn structure(spec: &str) -> Result<FiniteStructure, Failure> {
    if std::path::Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return Ok(FiniteStructure::from_json(&text)?);
    }
    Ok(named_structure(spec)?)
}

fn budget() -> Result<u64, Failure> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| Failure(format!("{BUDGET_VAR} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::Parse { formula, godel, decode, signature } => {
            let lang = cli.lang.language()?;
            if signature {
                return emit(out, json, json!({ "signature": lang.to_text() }), lang.to_text().trim_end());
            }
            if decode {
                for src in inputs(&formula)? {
                    let n = src.parse().map_err(|_| Failure(format!("`{src}` is not a natural number")))?;
                    let f = godel_decode(&lang, &n)?;
                    emit(out, json, json!({ "formula": f.to_string() }), &f.to_string())?;
                }
                return Ok(());
            }
            for f in parse_all(&lang, &formula)? {
                if godel {
                    let n = godel_encode(&lang, &f)?.to_string();
                    emit(out, json, json!({ "formula": f.to_string(), "godel": n }), &n)?;
                } else {
                    let free: Vec<String> =
                        f.free_variables().iter().map(|v| format!("{v}:{}", v.sort.name())).collect();
                    let v = json!({ "formula": f.to_string(), "size": f.size(), "free": free });
                    emit(out, json, v, &f.to_string())?;
                }
            }
        }
        Command::Classify { fragment, formula } => {
            let lang = cli.lang.language()?;
            let d = descriptor(&fragment)?;
            for f in parse_all(&lang, &formula)? {
                let m = mem_fragment(&lang, &d, &f)?;
                emit(
                    out,
                    json,
                    json!({ "formula": f.to_string(), "fragment": d.to_string(), "member": m }),
                    &m.to_string(),
                )?;
            }
        }
        Command::Prenex { relative_to, formula } => {
            let lang = cli.lang.language()?;
            let d = descriptor(&relative_to)?;
            for f in parse_all(&lang, &formula)? {
                let p = prnx(&d, &lang, &f)?;
                let prefix: Vec<String> = p.prefix.iter().map(|(q, x)| format!("{q} {x}:{}", x.sort.name())).collect();
                let v = json!({ "formula": p.formula.to_string(), "prefix": prefix, "matrix": p.matrix.to_string() });
                emit(out, json, v, &p.formula.to_string())?;
            }
        }
        Command::Reduce(args) => reduce::run(&cli.lang, &args, json, out)?,
        Command::Eval { structure: spec, assign, formula } => {
            let s = structure(&spec)?;
            let lang = s.language().clone();
            let budget = budget()?;
            let mut env: BTreeMap<String, u32> = BTreeMap::new();
            for a in assign.iter().filter(|a| !a.is_empty()) {
                let Some((k, v)) = a.split_once('=') else {
                    return fail(format!("bad assignment `{a}`, expected NAME=VALUE"));
                };
                let v: u32 = v.trim().parse().map_err(|_| Failure(format!("bad value in `{a}`")))?;
                env.insert(k.trim().to_string(), v);
            }
            for f in parse_all(&lang, &formula)? {
                let asg: BTreeMap<Var, u32> =
                    f.free_variables().into_iter().filter_map(|v| env.get(&v.name).map(|&x| (v, x))).collect();
                let t = eval_with_budget(&s, &f, &asg, budget)?;
                emit(out, json, json!({ "formula": f.to_string(), "value": t }), &t.to_string())?;
            }
        }
        Command::Oracle { op } => oracle::run(op, json, out)?,
        Command::Graph { op } => graph(op, json, out)?,
        Command::Example { which: ExampleOp::Tournament { copies } } => {
            if copies == 0 {
                return fail("--copies must be at least 1");
            }
            let (n, m) = tournament_models(copies)?;
            let sigma = example_sentence();
            let empty = BTreeMap::new();
            let (tn, tm) =
                (eval_with_budget(&n, &sigma, &empty, budget()?)?, eval_with_budget(&m, &sigma, &empty, budget()?)?);
            let v = json!({ "sentence": sigma.to_string(), "copies": copies, "N": tn, "M": tm });
            emit(out, json, v, &format!("sigma holds in N: {tn}, in M: {tm}"))?;
        }
    }
    Ok(())
}

fn graph(op: GraphOp, json: bool, out: &mut impl Write) -> Outcome {
    let g = build_graph();
    match op {
        GraphOp::Path { from, to, assume } => {
            let hyps = hypotheses(&assume)?;
            match g.reduction_path(&from, &to, &hyps)? {
                Some(path) => {
                    let edges: Vec<String> = path.iter().map(|e| g.describe(e)).collect();
                    let text = if edges.is_empty() { "empty path".to_string() } else { edges.join("\n") };
                    emit(out, json, json!({ "path": edges }), &text)?;
                }
                None => emit(out, json, json!({ "path": null }), "none")?,
            }
        }
        GraphOp::Classes { assume } => {
            let classes = g.equivalence_classes(&hypotheses(&assume)?)?;
            let text: Vec<String> = classes.iter().map(|c| c.join(" ")).collect();
            emit(out, json, json!({ "classes": classes }), &text.join("\n"))?;
        }
        GraphOp::Dump => emit(out, json, g.to_json(), g.to_text().trim_end())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
