use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use fragred::models::example_sentence;

fn fragred(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fragred"))
        .args(args)
        .env_remove("FRAGRED_EVAL_BUDGET")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn");
    child.stdin.take().expect("stdin").write_all(stdin.unwrap_or("").as_bytes()).expect("write");
    child.wait_with_output().expect("wait")
}

fn ok(args: &[&str], stdin: Option<&str>) -> String {
    let out = fragred(args, stdin);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("fragred-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).expect("write scratch file");
    path
}

#[test]
fn tournament_example() {
    assert_eq!(ok(&["example", "tournament", "--copies", "2"], None), "sigma holds in N: true, in M: false\n");
}

#[test]
fn classify_separates_the_two_universal_fragments() {
    let sigma = example_sentence().to_string();
    assert_eq!(ok(&["--lang", "graph", "classify", "--fragment", "A2 E", &sigma], None), "false\n");
    assert_eq!(ok(&["--lang", "graph", "classify", "--fragment", "A^2 E", &sigma], None), "true\n");
}

#[test]
fn rat_noconst_example() {
    let out = ok(
        &["reduce", "--map", "tau-rat-noconst", "--gamma", "(exists (w field) (= x (* w w)))"],
        Some("(exists (y field) (= (* y t) 1))\n"),
    );
    assert_eq!(
        out,
        "(forall (x'1 field) (or (exists (y field) (= (* y x'1) 1)) (exists (w field) (= x'1 (* w w)))))\n"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(fragred(&["no-such-command"], None).status.code(), Some(2));
    assert_eq!(fragred(&["classify"], None).status.code(), Some(2));
    let bad = fragred(&["classify", "--fragment", "E", "(= x"], None);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.starts_with("error: "), "{err}");
    assert!(!err.contains("panicked"));
    assert_eq!(fragred(&["graph", "path", "--from", "nowhere", "--to", "k.E"], None).status.code(), Some(1));
}

#[test]
fn stdin_streams_one_formula_per_line() {
    let out = ok(&["classify", "--fragment", "E"], Some("(= 0 0)\n\n; comment\n(forall (x field) (= x x))\n"));
    assert_eq!(out, "true\nfalse\n");
}

#[test]
fn prenex_and_parse() {
    let out = ok(&["prenex", "(not (exists (x field) (= (* x x) u)))"], None);
    assert_eq!(out, "(forall (x field) (not (= (* x x) u)))\n");
    let json = ok(&["--json", "parse", "(exists (y field) (= (* x y) 1))"], None);
    let v: serde_json::Value = serde_json::from_str(&json).expect("json");
    assert_eq!(v["free"], serde_json::json!(["x:field"]));
}

#[test]
fn godel_round_trip_through_the_cli() {
    let f = "(forall (x field) (exists (y field) (= (* x y) 1)))";
    let n = ok(&["--lang", "val", "parse", "--godel", f], None);
    assert_eq!(ok(&["--lang", "val", "parse", "--decode", n.trim()], None).trim(), f);
}

#[test]
fn eval_honours_the_budget() {
    let f = "(forall (x field) (exists (y field) (= (* y y) x)))";
    assert_eq!(ok(&["eval", "--structure", "F4", f], None), "true\n");
    assert_eq!(ok(&["eval", "--structure", "Z3", f], None), "false\n");
    assert_eq!(ok(&["eval", "--structure", "Z4", "--assign", "u=2", "(= (+ u u) 0)"], None), "true\n");
    let limited = Command::new(env!("CARGO_BIN_EXE_fragred"))
        .args(["eval", "--structure", "F4", f])
        .env("FRAGRED_EVAL_BUDGET", "5")
        .output()
        .expect("run");
    assert_eq!(limited.status.code(), Some(1));
}

#[test]
fn graph_queries() {
    let p = ok(&["graph", "path", "--from", "kvt.AE", "--to", "kvt.A1E", "--assume", "kPerfect"], None);
    assert_eq!(p.lines().count(), 1);
    assert!(p.contains("p-basis-coding"));
    assert_eq!(ok(&["graph", "path", "--from", "kv.A1E", "--to", "k.E"], None), "none\n");
    assert_eq!(ok(&["graph", "path", "--from", "kv.E", "--to", "kv.E"], None), "empty path\n");
    let classes = ok(&["graph", "classes", "--assume", "kFinite"], None);
    assert!(classes
        .lines()
        .any(|l| ["kv.A1E", "kvt.E", "kvt.A1kE", "kvt.AkE"].iter().all(|id| l.split(' ').any(|w| w == *id))));
    let dump: serde_json::Value = serde_json::from_str(&ok(&["--json", "graph", "dump"], None)).expect("json");
    assert!(dump["nodes"].as_array().is_some_and(|n| !n.is_empty()));
}

#[test]
fn oracle_commands() {
    assert_eq!(ok(&["oracle", "decompose", "{[0,1,1]/[1]@2}"], None), "{[0,1]/[1]@2} {[1]/[1]@2}\n");
    assert_eq!(ok(&["oracle", "recompose", "{[0,1]/[1]@2}", "{[1]/[1]@2}"], None), "{[0,1,1]/[1]@2}\n");
    assert_eq!(ok(&["oracle", "is-pth-power", "{[1,0,1]/[1]@2}"], None), "true\n");
    let found = ok(
        &["oracle", "search", "--p", "3", "--assign", "x={[1,0,0,1]/[1]@3}", "(exists (y field) (= (* (* y y) y) x))"],
        None,
    );
    assert_eq!(found, "sat y={[1,1]/[1]@3}\n");
    assert_eq!(ok(&["oracle", "elements", "--p", "2", "--height", "0"], None), "{[0]/[1]@2}\n{[1]/[1]@2}\n");
}

#[test]
fn output_is_deterministic() {
    let args =
        ["--json", "reduce", "--map", "tau-noparam", "--n", "2", "(forall (x field) (exists (y field) (= (* x y) u)))"];
    assert_eq!(fragred(&args, None).stdout, fragred(&args, None).stdout);
}

/// Each map's output, re-read through the CLI over the declared language,
/// belongs to the declared target fragment.
#[test]
fn reduce_outputs_classify_into_their_targets() {
    let curve0 =
        scratch("curve0", "k0 Q\nmonomial 1 0 2\nmonomial -1 5 0\nmonomial -1 0 0\nassert genus-at-least-two\n");
    let curvep = scratch(
        "curvep",
        "k0 F2\nmonomial 1 0 2\nmonomial 1 0 1\nmonomial 1 5 0\nassert genus-at-least-two\nassert separable-in-y\nassert perfect\n",
    );
    let (c0, cp) = (curve0.to_str().expect("path"), curvep.to_str().expect("path"));
    let a1e = "(forall (x field) (exists (y field) (= (* x y) u)))";
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["--map", "chi", "--r", "3"], ""),
        (vec!["--map", "pi", "--p", "3", "--n", "2"], ""),
        (vec!["--map", "tau-param", "--basis", "c1"], a1e),
        (vec!["--map", "tau-noparam", "--n", "2"], a1e),
        (vec!["--map", "tau-ff", "--gamma", "(exists (w field) (= z (* w w)))"], a1e),
        (vec!["--map", "tau-rat-const", "--q", "3"], a1e),
        (vec!["--map", "tau-rat-const", "--q", "inf"], a1e),
        (
            vec!["--map", "tau-rat-noconst", "--gamma", "(exists (w field) (= z (* w w)))"],
            "(exists (y field) (= (* y t) u))",
        ),
        (
            vec!["--map", "tau-curve-0", "--curve", c0, "--gamma", "(exists (w field) (= (* w z) 1))"],
            "(exists (z field) (= z (* x y)))",
        ),
        (vec!["--map", "tau-curve-p", "--curve", cp], "(exists (z field) (= z (+ x y)))"),
        (vec!["--lang", "val", "--map", "tau-drop-pi"], "(forall (g group) (exists (z field) (<=G g (v (* z t)))))"),
        (
            vec!["--lang", "val", "--map", "tau-a1e", "--q", "2"],
            "(forall (a residue) (exists (x field) (= (res x) a)))",
        ),
        (
            vec!["--lang", "val", "--map", "tau-finres", "--q", "3"],
            "(forall (a residue) (exists (b residue) (= (+k a b) 1k)))",
        ),
    ];
    for (flags, input) in cases {
        let mut args = vec!["--json", "reduce"];
        args.extend(flags.iter());
        if !input.is_empty() {
            args.push(input);
        }
        let out = ok(&args, None);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}: {out}"));
        for img in v["images"].as_array().expect("images") {
            let sig = scratch("sig", img["signature"].as_str().expect("signature"));
            let lang = sig.to_str().expect("path");
            let formula = img["output"].as_str().expect("output");
            let target = img["target"].as_str().expect("target");
            let reparsed = ok(&["--lang", lang, "parse", formula], None);
            assert_eq!(reparsed.trim(), formula, "{args:?}");
            assert_eq!(
                ok(&["--lang", lang, "classify", "--fragment", target, formula], None),
                "true\n",
                "{args:?}: {formula} ∉ {target}"
            );
        }
    }
    let _ = std::fs::remove_file(curve0);
    let _ = std::fs::remove_file(curvep);
}
