//! The graph of many-one reductions between fragments of the theories of
//! `k`, `(k((t)), v_t)` and `(k((t)), v_t, t)`, conditional on hypotheses.
//!
//! Edges are inclusions, reductions constructed in this crate (which
//! [`ReductionGraph::apply`] can run), or cited results that are tracked for
//! reachability only.

use crate::error::ReductionError;
use crate::formula::{Formula, Quantifier, Term, Var};
use crate::fpalg::prime_power;
use crate::fragments::{mem_fragment, prnx, FragmentDescriptor};
use crate::signature::{extend_with_constants, ring, valued_field, Language, Sort, FIELD, RESIDUE};
use crate::{pcoding, vfred};
use serde::Serialize;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub enum Hypothesis {
    /// The resolution-type hypothesis; tracked, never evaluated.
    R4,
    CharZero,
    CharP,
    KFinite,
    /// `k = k^p`.
    KPerfect,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 5] =
        [Hypothesis::R4, Hypothesis::CharZero, Hypothesis::CharP, Hypothesis::KFinite, Hypothesis::KPerfect];

    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::R4 => "R4",
            Hypothesis::CharZero => "charZero",
            Hypothesis::CharP => "charP",
            Hypothesis::KFinite => "kFinite",
            Hypothesis::KPerfect => "kPerfect",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Hypothesis {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, GraphError> {
        Hypothesis::ALL
            .into_iter()
            .find(|h| h.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GraphError::UnknownHypothesis(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown hypothesis `{0}`")]
    UnknownHypothesis(String),
    #[error("contradictory assumptions: {0}")]
    Contradictory(String),
}

/// Adds the consequences of the assumptions (a finite field is perfect and
/// of positive characteristic) and rejects contradictory sets.
pub fn close_assumptions(assume: &[Hypothesis]) -> Result<BTreeSet<Hypothesis>, GraphError> {
    let mut out: BTreeSet<Hypothesis> = assume.iter().copied().collect();
    if out.contains(&Hypothesis::KFinite) {
        out.insert(Hypothesis::KPerfect);
        out.insert(Hypothesis::CharP);
    }
    if out.contains(&Hypothesis::CharZero) && out.contains(&Hypothesis::CharP) {
        return Err(GraphError::Contradictory("charZero with charP or kFinite".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Structure {
    /// `k` in `ℒ_ring`.
    K,
    /// `(k((t)), v_t)` in `ℒ_val`.
    Kv,
    /// `(k((t)), v_t, t)` in `ℒ_val(t)`.
    Kvt,
}

impl Structure {
    pub fn language(self) -> Language {
        match self {
            Structure::K => ring(),
            Structure::Kv => valued_field(),
            Structure::Kvt => val_t(),
        }
    }

    fn display(self) -> &'static str {
        match self {
            Structure::K => "k",
            Structure::Kv => "k((t)),v_t",
            Structure::Kvt => "k((t)),v_t,t",
        }
    }
}

fn val_t() -> Language {
    extend_with_constants(&valued_field(), &["t"], FIELD).expect("fresh constant")
}

/// Colour classes of the picture: nodes of one colour are claimed to be
/// many-one equivalent when `k` is finite.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum Color {
    Grey,
    Orange,
    Blue,
    Pink,
}

#[derive(Clone, Debug, Serialize)]
pub struct Node {
    pub id: &'static str,
    pub structure: Structure,
    /// Fragment in descriptor syntax; `n` stands for the parameter of `∃ₙ`,
    /// `*` for all sentences.
    pub fragment: &'static str,
    pub color: Color,
}

impl Node {
    /// `Th_F(M)`.
    pub fn title(&self) -> String {
        let frag = match self.fragment {
            "*" => "",
            "En" => "∃ₙ",
            "E" => "∃",
            "A1 E" => "∀₁∃",
            "A2 E" => "∀₂∃",
            "A E" => "∀∃",
            "A1@k E" => "∀₁ᵏ∃",
            "A@k E" => "∀ᵏ∃",
            other => other,
        };
        format!("Th_{frag}({})", self.structure.display())
    }

    /// The fragment as a descriptor, with `n` for `∃ₙ`; `None` for the full
    /// theory.
    pub fn descriptor(&self, n: usize) -> Option<FragmentDescriptor> {
        match self.fragment {
            "*" => None,
            "En" => Some(format!("E{n}").parse().expect("descriptor")),
            d => Some(d.parse().expect("descriptor")),
        }
    }

    pub fn language(&self) -> Language {
        self.structure.language()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum EdgeKind {
    Inclusion,
    Constructed,
    Cited,
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub conditions: Vec<Hypothesis>,
    pub kind: EdgeKind,
    /// Which result justifies the edge; empty for inclusions.
    pub label: &'static str,
    /// The constructed map implementing the edge, as named on the command
    /// line.
    pub map: Option<&'static str>,
}

/// Parameters for running constructed edges.
#[derive(Clone, Copy, Debug)]
pub struct EdgeParams {
    /// `|k|` for the finite-field edges.
    pub q: u64,
    /// `char k` for the `p`-basis coding.
    pub p: u64,
    /// `n` for `∃ₙ` nodes.
    pub n: usize,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams { q: 2, p: 2, n: 2 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

const NODES: &[(&str, Structure, &str, Color)] = &[
    ("k.En", Structure::K, "En", Color::Grey),
    ("k.E", Structure::K, "E", Color::Grey),
    ("k.A1E", Structure::K, "A1 E", Color::Grey),
    ("k.A2E", Structure::K, "A2 E", Color::Grey),
    ("k.AE", Structure::K, "A E", Color::Grey),
    ("k.Th", Structure::K, "*", Color::Grey),
    ("kv.En", Structure::Kv, "En", Color::Grey),
    ("kv.E", Structure::Kv, "E", Color::Grey),
    ("kv.A1kE", Structure::Kv, "A1@k E", Color::Grey),
    ("kv.AkE", Structure::Kv, "A@k E", Color::Grey),
    ("kv.A1E", Structure::Kv, "A1 E", Color::Orange),
    ("kv.A2E", Structure::Kv, "A2 E", Color::Blue),
    ("kv.AE", Structure::Kv, "A E", Color::Blue),
    ("kv.Th", Structure::Kv, "*", Color::Pink),
    ("kvt.E", Structure::Kvt, "E", Color::Orange),
    ("kvt.A1kE", Structure::Kvt, "A1@k E", Color::Orange),
    ("kvt.AkE", Structure::Kvt, "A@k E", Color::Orange),
    ("kvt.A1E", Structure::Kvt, "A1 E", Color::Blue),
    ("kvt.AE", Structure::Kvt, "A E", Color::Blue),
    ("kvt.Th", Structure::Kvt, "*", Color::Pink),
];

const INCLUSIONS: &[(&str, &str)] = &[
    ("k.En", "k.E"),
    ("k.E", "k.A1E"),
    ("k.A1E", "k.A2E"),
    ("k.A2E", "k.AE"),
    ("k.AE", "k.Th"),
    ("kv.En", "kv.E"),
    ("kv.E", "kv.A1kE"),
    ("kv.E", "kv.A1E"),
    ("kv.A1kE", "kv.AkE"),
    ("kv.A1kE", "kv.A1E"),
    ("kv.A1E", "kv.A2E"),
    ("kv.A2E", "kv.AE"),
    ("kv.AkE", "kv.AE"),
    ("kv.AE", "kv.Th"),
    ("kvt.E", "kvt.A1kE"),
    ("kvt.E", "kvt.A1E"),
    ("kvt.A1kE", "kvt.AkE"),
    ("kvt.A1kE", "kvt.A1E"),
    ("kvt.AkE", "kvt.AE"),
    ("kvt.A1E", "kvt.AE"),
    ("kvt.AE", "kvt.Th"),
    ("k.En", "kv.En"),
    ("k.E", "kv.E"),
    ("k.A1E", "kv.A1kE"),
    ("k.A2E", "kv.A2E"),
    ("k.AE", "kv.AkE"),
    ("k.AE", "kv.AE"),
    ("k.Th", "kv.Th"),
    ("kv.E", "kvt.E"),
    ("kv.A1kE", "kvt.A1kE"),
    ("kv.AkE", "kvt.AkE"),
    ("kv.A1E", "kvt.A1E"),
    ("kv.AE", "kvt.AE"),
    ("kv.Th", "kvt.Th"),
];

type Labeled = (&'static str, &'static str, &'static [Hypothesis], EdgeKind, &'static str, Option<&'static str>);

const LABELED: &[Labeled] = &[
    ("kv.En", "k.En", &[], EdgeKind::Cited, "existential-transfer", None),
    ("kv.E", "k.E", &[], EdgeKind::Cited, "existential-transfer", None),
    ("kvt.E", "k.E", &[Hypothesis::R4], EdgeKind::Cited, "r4-transfer", None),
    ("kvt.AkE", "k.AE", &[Hypothesis::R4], EdgeKind::Cited, "r4-transfer", None),
    ("kv.A1E", "k.A1E", &[Hypothesis::R4], EdgeKind::Cited, "r4-a1e-transfer", None),
    ("kv.AE", "k.AE", &[Hypothesis::CharZero], EdgeKind::Cited, "char0-ae-transfer", None),
    ("kv.Th", "k.Th", &[Hypothesis::CharZero], EdgeKind::Cited, "char0-transfer", None),
    ("kv.AkE", "kv.A1kE", &[Hypothesis::KFinite], EdgeKind::Constructed, "finite-residue", Some("tau-finres")),
    ("kv.A1kE", "kv.E", &[Hypothesis::KFinite], EdgeKind::Constructed, "finite-residue", Some("tau-finres")),
    ("kvt.A1kE", "kvt.E", &[Hypothesis::KFinite], EdgeKind::Constructed, "finite-residue", Some("tau-finres")),
    ("kvt.AkE", "kvt.A1kE", &[Hypothesis::KFinite], EdgeKind::Constructed, "finite-residue", Some("tau-finres")),
    ("kvt.AE", "kvt.A1E", &[Hypothesis::KPerfect], EdgeKind::Constructed, "p-basis-coding", Some("tau-param")),
    ("kvt.A1E", "kv.A2E", &[], EdgeKind::Constructed, "drop-uniformizer", Some("tau-drop-pi")),
    ("kvt.AE", "kv.AE", &[], EdgeKind::Constructed, "drop-uniformizer", Some("tau-drop-pi")),
    ("kvt.Th", "kv.Th", &[], EdgeKind::Constructed, "drop-uniformizer", Some("tau-drop-pi")),
    ("kvt.E", "kv.A1E", &[], EdgeKind::Constructed, "drop-uniformizer", Some("tau-drop-pi")),
    ("kv.A1E", "kvt.E", &[Hypothesis::KFinite], EdgeKind::Constructed, "a1e-to-e", Some("tau-a1e")),
];

/// Builds the graph.
pub fn build_graph() -> ReductionGraph {
    ReductionGraph::build()
}

impl ReductionGraph {
    pub fn build() -> Self {
        let nodes: Vec<Node> =
            NODES.iter().map(|&(id, structure, fragment, color)| Node { id, structure, fragment, color }).collect();
        let idx = |id: &str| nodes.iter().position(|n| n.id == id).expect("declared node");
        let mut edges: Vec<Edge> = INCLUSIONS
            .iter()
            .map(|&(s, d)| Edge {
                src: idx(s),
                dst: idx(d),
                conditions: Vec::new(),
                kind: EdgeKind::Inclusion,
                label: "",
                map: None,
            })
            .collect();
        edges.extend(LABELED.iter().map(|&(s, d, c, kind, label, map)| Edge {
            src: idx(s),
            dst: idx(d),
            conditions: c.to_vec(),
            kind,
            label,
            map,
        }));
        ReductionGraph { nodes, edges }
    }

    pub fn node_index(&self, id: &str) -> Result<usize, GraphError> {
        self.nodes.iter().position(|n| n.id == id).ok_or_else(|| GraphError::UnknownNode(id.into()))
    }

    pub fn node(&self, id: &str) -> Result<&Node, GraphError> {
        Ok(&self.nodes[self.node_index(id)?])
    }

    pub fn edge(&self, src: &str, dst: &str) -> Result<Option<&Edge>, GraphError> {
        let (s, d) = (self.node_index(src)?, self.node_index(dst)?);
        Ok(self.edges.iter().find(|e| e.src == s && e.dst == d))
    }

    /// Outgoing enabled edges, ordered by `(label, destination)`.
    fn successors(&self, assume: &BTreeSet<Hypothesis>) -> Vec<Vec<&Edge>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in self.edges.iter().filter(|e| e.conditions.iter().all(|c| assume.contains(c))) {
            out[e.src].push(e);
        }
        for es in &mut out {
            es.sort_by_key(|e| (e.label, self.nodes[e.dst].id));
        }
        out
    }

    /// A shortest path of enabled edges; ties go to the edge whose
    /// `(label, destination)` comes first. `Some(vec![])` when `src == dst`.
    pub fn reduction_path(
        &self,
        src: &str,
        dst: &str,
        assume: &[Hypothesis],
    ) -> Result<Option<Vec<&Edge>>, GraphError> {
        let assume = close_assumptions(assume)?;
        let (s, d) = (self.node_index(src)?, self.node_index(dst)?);
        let succ = self.successors(&assume);
        let mut via: Vec<Option<&Edge>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == d {
                let mut path = Vec::new();
                let mut cur = d;
                while let Some(e) = via[cur] {
                    path.push(e);
                    cur = e.src;
                }
                path.reverse();
                return Ok(Some(path));
            }
            for e in &succ[u] {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    via[e.dst] = Some(e);
                    queue.push_back(e.dst);
                }
            }
        }
        Ok(None)
    }

    fn reachable(&self, assume: &BTreeSet<Hypothesis>) -> Vec<Vec<bool>> {
        let succ = self.successors(assume);
        (0..self.nodes.len())
            .map(|s| {
                let mut seen = vec![false; self.nodes.len()];
                seen[s] = true;
                let mut stack = vec![s];
                while let Some(u) = stack.pop() {
                    for e in &succ[u] {
                        if !seen[e.dst] {
                            seen[e.dst] = true;
                            stack.push(e.dst);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    /// Classes of mutually reachable nodes, in node order.
    pub fn equivalence_classes(&self, assume: &[Hypothesis]) -> Result<Vec<Vec<&'static str>>, GraphError> {
        let assume = close_assumptions(assume)?;
        let r = self.reachable(&assume);
        let mut assigned = vec![false; self.nodes.len()];
        let mut classes = Vec::new();
        for i in 0..self.nodes.len() {
            if assigned[i] {
                continue;
            }
            let class: Vec<usize> = (i..self.nodes.len()).filter(|&j| r[i][j] && r[j][i]).collect();
            for &j in &class {
                assigned[j] = true;
            }
            classes.push(class.into_iter().map(|j| self.nodes[j].id).collect());
        }
        Ok(classes)
    }

    /// The coloured node sets of the picture (grey is not a class).
    pub fn color_classes(&self) -> Vec<(Color, Vec<&'static str>)> {
        [Color::Orange, Color::Blue, Color::Pink]
            .into_iter()
            .map(|c| (c, self.nodes.iter().filter(|n| n.color == c).map(|n| n.id).collect()))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .map(|n| {
                serde_json::json!({
                    "id": n.id, "title": n.title(), "structure": n.structure,
                    "fragment": n.fragment, "color": n.color,
                })
            })
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                serde_json::json!({
                    "src": self.nodes[e.src].id, "dst": self.nodes[e.dst].id,
                    "conditions": e.conditions, "kind": e.kind, "label": e.label, "map": e.map,
                })
            })
            .collect();
        serde_json::json!({ "nodes": nodes, "edges": edges })
    }

    /// One line per node and edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&format!("node {} {:?} {}\n", n.id, n.color, n.title()));
        }
        for e in &self.edges {
            out.push_str(&format!("edge {}\n", self.describe(e)));
        }
        out
    }

    /// `src -> dst [kind label; conditions]`.
    pub fn describe(&self, e: &Edge) -> String {
        let mut s = format!("{} -> {}", self.nodes[e.src].id, self.nodes[e.dst].id);
        let kind = match e.kind {
            EdgeKind::Inclusion => "inclusion",
            EdgeKind::Constructed => "constructed",
            EdgeKind::Cited => "cited, no in-crate map",
        };
        s.push_str(&format!(" [{kind}"));
        if !e.label.is_empty() {
            s.push_str(&format!(" {}", e.label));
        }
        if let Some(m) = e.map {
            s.push_str(&format!(" via {m}"));
        }
        if !e.conditions.is_empty() {
            let c: Vec<_> = e.conditions.iter().map(|h| h.name()).collect();
            s.push_str(&format!("; if {}", c.join(", ")));
        }
        s.push(']');
        s
    }

    /// Runs an inclusion or constructed edge on a sentence of the source
    /// fragment. Inclusions within one structure are the identity; from `k`
    /// into the valued field the sentence is moved to the residue sort.
    pub fn apply(&self, e: &Edge, f: &Formula, params: &EdgeParams) -> Result<Formula, ReductionError> {
        let (src, dst) = (&self.nodes[e.src], &self.nodes[e.dst]);
        let lang = src.language();
        if !f.is_sentence() {
            return Err(ReductionError::Params("edges act on sentences".into()));
        }
        match src.descriptor(params.n) {
            Some(d) if !mem_fragment(&lang, &d, f)? => return Err(ReductionError::NotInFragment(d.to_string())),
            None => {
                let diags = crate::formula::well_sorted(&lang, f);
                if !diags.is_empty() {
                    return Err(crate::fragments::FragmentError::IllSorted(diags).into());
                }
            }
            _ => {}
        }
        let e_desc = FragmentDescriptor::parse("E").expect("descriptor");
        match (e.kind, e.map) {
            (EdgeKind::Inclusion, _) if src.structure == Structure::K && dst.structure != Structure::K => to_residue(f),
            (EdgeKind::Inclusion, _) => Ok(f.clone()),
            (EdgeKind::Cited, _) => Err(ReductionError::Params(format!("`{}` has no in-crate map", e.label))),
            (_, Some("tau-finres")) => {
                if prime_power(params.q).is_none() {
                    return Err(ReductionError::Params(format!("q = {} is not a prime power", params.q)));
                }
                vfred::tau_finite_residue(params.q, &e_desc, &lang, f)
            }
            (_, Some("tau-a1e")) => vfred::tau_a1e_to_e(params.q, &lang, f).map(|(g, _)| g),
            (_, Some("tau-param")) => pcoding::tau_param(params.p, &lang, &["t"], &e_desc, f),
            (_, Some("tau-drop-pi")) if src.fragment == "*" => vfred::tau_drop_pi_full(&lang, "t", f).map(|(g, _)| g),
            (_, Some("tau-drop-pi")) => drop_pi_components(&lang, f),
            _ => Err(ReductionError::Params("unknown map".into())),
        }
    }
}

/// Applies the uniformizer removal to each component of a positive boolean
/// combination of `∀…∀[∃]` sentences.
fn drop_pi_components(lang: &Language, f: &Formula) -> Result<Formula, ReductionError> {
    let e = FragmentDescriptor::parse("E").expect("descriptor");
    match f {
        Formula::Top | Formula::Bot => Ok(f.clone()),
        Formula::And(a, b) if !e.contains(f) => Ok(drop_pi_components(lang, a)?.and(drop_pi_components(lang, b)?)),
        Formula::Or(a, b) if !e.contains(f) => Ok(drop_pi_components(lang, a)?.or(drop_pi_components(lang, b)?)),
        _ => {
            let pr = prnx(&e, lang, f)?;
            if pr.prefix.iter().any(|(q, _)| *q != Quantifier::Forall) || !e.contains(&pr.matrix) {
                return Err(ReductionError::NotInFragment("A E".into()));
            }
            vfred::tau_drop_pi(pr.prefix.len(), &e, lang, "t", &pr.formula).map(|(g, _)| g)
        }
    }
}

/// Moves a ring sentence onto the residue sort of the valued field.
pub fn to_residue(f: &Formula) -> Result<Formula, ReductionError> {
    fn var(v: &Var) -> Result<Var, ReductionError> {
        if v.sort != Sort::field() {
            return Err(ReductionError::Language(format!("`{v}` is not a field variable")));
        }
        Ok(Var::new(&v.name, &Sort::new(RESIDUE)))
    }
    fn term(t: &Term) -> Result<Term, ReductionError> {
        Ok(match t {
            Term::Var(v) => Term::Var(var(v)?),
            Term::Const(c) if c == "0" || c == "1" => Term::Const(format!("{c}k")),
            Term::App(g, args) if ["+", "-", "*"].contains(&g.as_str()) => {
                Term::App(format!("{g}k"), args.iter().map(term).collect::<Result<_, _>>()?)
            }
            _ => return Err(ReductionError::Language(format!("`{t}` is not a ring term"))),
        })
    }
    Ok(match f {
        Formula::Top | Formula::Bot => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(term(a)?, term(b)?),
        Formula::Rel(r, _) => return Err(ReductionError::Language(format!("unexpected relation `{r}`"))),
        Formula::Not(a) => to_residue(a)?.not(),
        Formula::And(a, b) => to_residue(a)?.and(to_residue(b)?),
        Formula::Or(a, b) => to_residue(a)?.or(to_residue(b)?),
        Formula::Forall(x, b) => Formula::forall([var(x)?], to_residue(b)?),
        Formula::Exists(x, b) => Formula::exists([var(x)?], to_residue(b)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use Hypothesis::*;

    #[test]
    fn shape() {
        let g = build_graph();
        assert_eq!(g.nodes.len(), 20);
        let drop = g.edges.iter().filter(|e| e.map == Some("tau-drop-pi")).count();
        assert_eq!(drop, 4);
        for e in &g.edges {
            assert!(e.kind != EdgeKind::Constructed || e.map.is_some());
        }
    }

    #[test]
    fn labeled_edges() {
        let g = build_graph();
        let e = g.edge("kv.A1E", "kvt.E").unwrap().unwrap();
        assert_eq!((e.conditions.as_slice(), e.label), ([KFinite].as_slice(), "a1e-to-e"));
        let e = g.edge("kvt.E", "kv.A1E").unwrap().unwrap();
        assert!(e.conditions.is_empty());
        assert_eq!(e.map, Some("tau-drop-pi"));
    }

    #[test]
    fn paths() {
        let g = build_graph();
        let p = g.reduction_path("kvt.AE", "kvt.A1E", &[KPerfect]).unwrap().unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].label, "p-basis-coding");
        assert!(g.reduction_path("kv.A1E", "k.E", &[]).unwrap().is_none());
        assert_eq!(g.reduction_path("kv.E", "kv.E", &[]).unwrap().unwrap().len(), 0);
        let p = g.reduction_path("kv.A1E", "k.E", &[R4, KFinite]).unwrap().unwrap();
        assert!(p.iter().any(|e| e.conditions.contains(&R4)));
        assert!(g.reduction_path("k.E", "kv.E", &[CharZero, KFinite]).is_err());
        assert!(g.node("nope").is_err());
    }

    #[test]
    fn colours_under_finite_k() {
        let g = build_graph();
        let classes = g.equivalence_classes(&[KFinite]).unwrap();
        for (_, set) in g.color_classes() {
            assert!(classes.iter().any(|c| set.iter().all(|id| c.contains(id))), "{set:?}");
        }
        for c in g.equivalence_classes(&[]).unwrap() {
            if c.len() > 1 {
                assert!(c.iter().all(|id| id.ends_with("Th") || id.contains('E')));
            }
        }
    }

    #[test]
    fn monotone() {
        let g = build_graph();
        let small = g.reachable(&close_assumptions(&[]).unwrap());
        let big = g.reachable(&close_assumptions(&[R4, KFinite]).unwrap());
        for i in 0..g.nodes.len() {
            for j in 0..g.nodes.len() {
                assert!(!small[i][j] || big[i][j]);
            }
        }
    }

    #[test]
    fn apply_edges() {
        let g = build_graph();
        let params = EdgeParams::default();
        let f = parse_formula(&ring(), "(forall (x field) (exists (y field) (= (* x y) 1)))").unwrap();
        let e = g.edge("k.A1E", "kv.A1kE").unwrap().unwrap();
        let out = g.apply(e, &f, &params).unwrap();
        assert_eq!(out.to_string(), "(forall (x residue) (exists (y residue) (= (*k x y) 1k)))");
        let e = g.edge("kv.A1kE", "kv.E").unwrap().unwrap();
        let out = g.apply(e, &out, &params).unwrap();
        assert!(mem_fragment(&valued_field(), &"E".parse().unwrap(), &out).unwrap());

        let h = parse_formula(
            &val_t(),
            "(and (forall (x field) (exists (y field) (= (* x y) t))) (exists (y field) (= y t)))",
        )
        .unwrap();
        let e = g.edge("kvt.A1E", "kv.A2E").unwrap().unwrap();
        let out = g.apply(e, &h, &params).unwrap();
        assert!(mem_fragment(&valued_field(), &"A2 E".parse().unwrap(), &out).unwrap());
    }

    #[test]
    fn dump() {
        let g = build_graph();
        let v = g.to_json();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 20);
        assert!(g.to_text().contains("edge kv.A1E -> kvt.E [constructed a1e-to-e via tau-a1e; if kFinite]"));
    }
}
