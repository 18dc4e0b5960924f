//! Property tests for the invariants of each module. Formulas come from the
//! seeded corpus generator; proptest drives the seeds.

use std::collections::{BTreeMap, BTreeSet};

use fragred::corpus::Generator;
use fragred::ffred::{express_constants, fold_constants, tau_rat_const, ConstCount, CurveDatum};
use fragred::formula::{well_sorted, Formula, Var};
use fragred::fpalg::{pth_root_decompose, pth_root_recompose, random_ratfunc, RatFunc};
use fragred::fragments::{mem_fragment, prnx, relativize, FragmentDescriptor};
use fragred::models::{
    all_assignments, embeddings, eval, finite_field, gamma3, gamma4, modular_ring, trivially_valued_field,
    FiniteStructure,
};
use fragred::redgraph::{build_graph, EdgeKind, EdgeParams, Hypothesis};
use fragred::signature::{
    extend_with_constants, godel_decode, godel_encode, graph, ring, valued_field, Language, LanguageInclusion, Sort,
};
use fragred::vfred::tau_a1e_to_e;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn d(s: &str) -> FragmentDescriptor {
    FragmentDescriptor::parse(s).expect("descriptor")
}

fn f0() -> FragmentDescriptor {
    FragmentDescriptor::quantifier_free()
}

fn languages() -> Vec<Language> {
    vec![
        ring(),
        extend_with_constants(&ring(), &["t"], "field").unwrap(),
        valued_field(),
        extend_with_constants(&valued_field(), &["varpi"], "field").unwrap(),
        graph(),
    ]
}

fn uv() -> [Var; 2] {
    [Var::field("u"), Var::field("v")]
}

/// Checks `a ≡ b` on `s` under every assignment of `free`.
fn equivalent(s: &FiniteStructure, a: &Formula, b: &Formula, free: &[Var]) -> Result<(), TestCaseError> {
    for asg in all_assignments(s, free) {
        let (x, y) = (eval(s, a, &asg), eval(s, b, &asg));
        prop_assert!(x.is_ok() && x == y, "{a} is {x:?} but {b} is {y:?} under {asg:?}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn godel_round_trip_and_injectivity(seed in any::<u64>(), which in 0usize..5) {
        let lang = &languages()[which];
        let free: Vec<Var> = if which == 4 { vec![] } else { vec![Var::field("u")] };
        let mut g = Generator::new(lang, seed).with_free(&free);
        let (a, b) = (g.formula(12), g.formula(12));
        let (na, nb) = (godel_encode(lang, &a).unwrap(), godel_encode(lang, &b).unwrap());
        prop_assert_eq!(godel_decode(lang, &na).unwrap(), a.clone());
        prop_assert_eq!(na == nb, a == b);
    }

    #[test]
    fn substitution_maps_free_variables(seed in any::<u64>()) {
        let lang = ring();
        let mut g = Generator::new(&lang, seed).with_free(&uv());
        let f = g.formula(10);
        let [u, v] = uv();
        let w = Var::field("w");
        let m1 = BTreeMap::from([(u.clone(), v.clone())]);
        let m2 = BTreeMap::from([(v.clone(), w.clone())]);
        let once = f.substitute(&m1).unwrap();
        let expected: BTreeSet<Var> =
            f.free_variables().into_iter().map(|x| m1.get(&x).cloned().unwrap_or(x)).collect();
        prop_assert_eq!(once.free_variables(), expected);
        prop_assert!(well_sorted(&lang, &once).is_empty());
        // Functoriality: (m2 ∘ m1) in one step equals two steps.
        let composed = BTreeMap::from([(u.clone(), w.clone()), (v.clone(), w.clone())]);
        let twice = once.substitute(&m2).unwrap();
        let direct = f.substitute(&composed).unwrap();
        let s = modular_ring(3).unwrap();
        equivalent(&s, &twice, &direct, &[w])?;
    }

    #[test]
    fn prenex_is_equivalent_on_small_structures(seed in any::<u64>(), which in 0usize..3) {
        let (lang, structures, free): (Language, Vec<FiniteStructure>, Vec<Var>) = match which {
            0 => (ring(), vec![modular_ring(2).unwrap(), modular_ring(4).unwrap(), finite_field(4).unwrap()], uv().to_vec()),
            1 => (graph(), vec![gamma3(), gamma4()], vec![]),
            _ => (valued_field(), vec![trivially_valued_field(2).unwrap()], vec![Var::field("u")]),
        };
        let mut g = Generator::new(&lang, seed).with_free(&free);
        let f = g.formula(9);
        let p = prnx(&f0(), &lang, &f).unwrap();
        prop_assert!(p.matrix.is_quantifier_free());
        prop_assert!(well_sorted(&lang, &p.formula).is_empty());
        prop_assert_eq!(p.formula.free_variables(), f.free_variables());
        for s in &structures {
            equivalent(s, &f, &p.formula, &free)?;
        }
        // Idempotent on its own output.
        prop_assert_eq!(prnx(&f0(), &lang, &p.formula).unwrap().formula, p.formula.clone());
    }

    #[test]
    fn existential_prenex_has_an_existential_prefix(seed in any::<u64>()) {
        let lang = ring();
        let mut g = Generator::new(&lang, seed).with_free(&uv());
        let f = g.member(&d("E"), 6);
        let p = prnx(&f0(), &lang, &f).unwrap();
        let n = p.prefix_len();
        prop_assert!(mem_fragment(&lang, &d(&format!("E{n}[F0]")), &p.formula).unwrap(), "{}", p.formula);
    }

    #[test]
    fn fragment_relative_prenex_keeps_members(seed in any::<u64>()) {
        let lang = ring();
        let mut g = Generator::new(&lang, seed).with_free(&uv());
        let f = g.member(&d("A E"), 6);
        let p = prnx(&d("E"), &lang, &f).unwrap();
        prop_assert!(d("E").contains(&p.matrix));
        prop_assert!(mem_fragment(&lang, &d("A[E]"), &p.formula).unwrap());
        equivalent(&modular_ring(3).unwrap(), &f, &p.formula, &uv())?;
    }

    #[test]
    fn generated_members_belong_and_descriptors_nest(seed in any::<u64>(), which in 0usize..5) {
        let chain = ["E", "A1[E]", "A1 E", "A2 E", "A^2 E"];
        let lang = valued_field();
        let mut g = Generator::new(&lang, seed).with_free(&[Var::field("u")]);
        let f = g.member(&d(chain[which]), 6);
        prop_assert!(well_sorted(&lang, &f).is_empty());
        for (i, desc) in chain.iter().enumerate() {
            let m = mem_fragment(&lang, &d(desc), &f).unwrap();
            if i >= which {
                prop_assert!(m, "{f} not in {desc}");
            }
        }
        prop_assert!(mem_fragment(&lang, &d("A E"), &f).unwrap());
    }

    #[test]
    fn relativization_preserves_sorts_and_variables(seed in any::<u64>()) {
        let lang = ring();
        let x = Var::field("x");
        let eta = Formula::exists([Var::field("w")], Var::field("w").term().mul(Var::field("w").term()).eq(x.term()));
        let eta_neg = eta.clone().not();
        let mut g = Generator::new(&lang, seed).with_free(&uv());
        let f = g.formula(10);
        let r = relativize(&f, &eta, &eta_neg).unwrap();
        prop_assert!(well_sorted(&lang, &r).is_empty());
        prop_assert_eq!(r.free_variables(), f.free_variables());
    }

    #[test]
    fn existential_sentences_go_up_along_embeddings(seed in any::<u64>()) {
        let lang = graph();
        let mut g = Generator::new(&lang, seed);
        let f = g.member(&d("E"), 6);
        prop_assume!(!embeddings(&gamma3(), &gamma4()).unwrap().is_empty());
        if eval(&gamma3(), &f, &BTreeMap::new()).unwrap() {
            prop_assert!(eval(&gamma4(), &f, &BTreeMap::new()).unwrap(), "{f}");
        }
    }

    #[test]
    fn pth_root_reconstruction(seed in any::<u64>(), pi in 0usize..3, h in 0usize..6) {
        let p = [2u64, 3, 5][pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_ratfunc(&mut rng, p, h);
        let g = random_ratfunc(&mut rng, p, h);
        let parts = pth_root_decompose(&f);
        prop_assert_eq!(parts.len(), p as usize);
        prop_assert_eq!(pth_root_recompose(&parts), f.clone());
        let diff = pth_root_decompose(&f.checked_sub(&g).unwrap());
        prop_assert_eq!(diff.iter().all(RatFunc::is_zero), f == g);
    }

    #[test]
    fn a1e_commutes_with_language_inclusion(seed in any::<u64>(), q in 2u64..5) {
        let small = ring();
        let big = extend_with_constants(&valued_field(), &["c"], "field").unwrap();
        prop_assert!(LanguageInclusion::new(&small, &big).is_ok());
        let mut g = Generator::new(&small, seed);
        let f = g.member(&d("A1 E"), 6);
        let (a, la) = tau_a1e_to_e(q, &small, &f).unwrap();
        let (b, lb) = tau_a1e_to_e(q, &big, &f).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(LanguageInclusion::new(&la, &lb).is_ok());
    }

    #[test]
    fn curve_constants_round_trip(seed in any::<u64>()) {
        let c = CurveDatum::parse("k0 Q\nmonomial 1 0 2\nmonomial -1 5 0\nmonomial -1 0 0\nassert genus-at-least-two\n").unwrap();
        let mut g = Generator::new(&c.input_language(), seed).with_free(&[Var::field("u")]);
        let f = g.formula(10);
        let mut names = fragred::formula::FreshNames::avoiding(&f);
        let (v, w) = (names.fresh_var("v", &Sort::field()), names.fresh_var("w", &Sort::field()));
        let f0 = express_constants(&c, &f, &v, &w);
        prop_assert!(!f0.mentions_constant("x") && !f0.mentions_constant("y"));
        prop_assert!(well_sorted(&c.base_language(), &f0).is_empty());
        prop_assert_eq!(fold_constants(&c, &f0, &v, &w), f);
    }

    #[test]
    fn enabling_hypotheses_only_adds_paths(mask in 0u8..32, extra in 0u8..32) {
        let all = [Hypothesis::R4, Hypothesis::CharZero, Hypothesis::CharP, Hypothesis::KFinite, Hypothesis::KPerfect];
        let pick = |m: u8| -> Vec<Hypothesis> { all.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, h)| *h).collect() };
        let (small, big) = (pick(mask), pick(mask | extra));
        let g = build_graph();
        let (Ok(cs), Ok(cb)) = (g.equivalence_classes(&small), g.equivalence_classes(&big)) else {
            // Contradictory assumptions are rejected outright.
            return Ok(());
        };
        prop_assert!(cb.len() <= cs.len());
        for a in &g.nodes {
            for b in &g.nodes {
                if g.reduction_path(a.id, b.id, &small).unwrap().is_some() {
                    prop_assert!(g.reduction_path(a.id, b.id, &big).unwrap().is_some(), "{} → {}", a.id, b.id);
                }
            }
        }
    }

    #[test]
    fn constructed_edges_land_in_their_target(seed in any::<u64>()) {
        let g = build_graph();
        let params = EdgeParams { q: 2, p: 2, n: 2 };
        for (i, e) in g.edges.iter().enumerate().filter(|(_, e)| e.kind == EdgeKind::Constructed) {
            let (src, dst) = (&g.nodes[e.src], &g.nodes[e.dst]);
            let Some(desc) = src.descriptor(params.n) else { continue };
            let mut gen = Generator::new(&src.language(), seed ^ i as u64);
            let f = gen.member(&desc, 5);
            let out = g.apply(e, &f, &params).map_err(|err| TestCaseError::fail(format!("{}: {f}: {err}", g.describe(e))))?;
            let target = dst.descriptor(params.n).expect("constructed edges end at a fragment");
            prop_assert!(out.is_sentence());
            let m = mem_fragment(&dst.language(), &target, &out);
            prop_assert!(m == Ok(true), "{}: {f} ↦ {out}: {m:?}", g.describe(e));
        }
    }
}

#[test]
fn finite_field_witnesses_enumerate_the_field() {
    let u = Var::field("u");
    let x = Var::field("x");
    // ∀x (x = x ∨ x = u): the ψ part is trivially true, isolating φ_q's frame.
    let f = Formula::forall([x.clone()], x.term().eq(x.term()).or(x.term().eq(u.term())));
    for q in [2u64, 3, 4] {
        let (phi, _) = tau_rat_const(ConstCount::Finite(q), &f).unwrap();
        let Formula::And(_, frame) = &phi else { panic!("{phi}") };
        let s = finite_field(q).unwrap();
        let mut body = frame.as_ref();
        let mut ys = Vec::new();
        while let Formula::Exists(y, b) = body {
            ys.push(y.clone());
            body = b;
        }
        assert_eq!(ys.len(), q as usize);
        let mut free = ys.clone();
        free.push(u.clone());
        let mut witnesses = 0;
        for asg in all_assignments(&s, &free) {
            if eval(&s, body, &asg).unwrap() {
                witnesses += 1;
                let vals: BTreeSet<u32> = ys.iter().map(|y| asg[y]).collect();
                assert_eq!(vals.len(), q as usize, "witnesses must be all of 𝔽_{q}");
            }
        }
        // q! orderings of the field, for each of the q values of u.
        let fact: u64 = (1..=q).product();
        assert_eq!(witnesses as u64, fact * q);
    }
}
