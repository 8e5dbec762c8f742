use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn tracerw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracerw")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = tracerw(&full);
    (code(&o), serde_json::from_str(&stdout(&o)).expect("json output"))
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn foata_golden_word() {
    let o = tracerw(&["foata", &data("ex1.json"), "acbdab"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "{a,c}{b,d}{a}{b}");
    let (c, v) = json(&["foata", "builtin:ex1", "acbdab"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["steps"][1], serde_json::json!(["b", "d"]));
}

#[test]
fn trace_equivalence() {
    let (_, v) = json(&["eq", &data("ex1.json"), "acbdab", "cadbab"]);
    assert_eq!(v["result"]["equivalent"], true);
    let (_, v) = json(&["eq", &data("ex1.json"), "ab", "ba"]);
    assert_eq!(v["result"]["equivalent"], false);
}

#[test]
fn alex_edges_match_the_oracle() {
    let o = tracerw(&["rtl", "edges", &data("alex.json"), "--bound", "6", "--oracle"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).trim_end().ends_with("OK: 0 differences"));
}

#[test]
fn grid_bundle_answers_sentences() {
    let dir = tmp();
    let bundle = path(&dir, "grid.bundle");
    let o = tracerw(&["rtl", "compile", &data("grid.json"), "--out", &bundle, "--stats"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = tracerw(&["fo", "check", &bundle, "E x. edge(f,x,x)"]);
    assert_eq!(stdout(&o).trim(), "true");
    let formula = path(&dir, "loop.fo");
    std::fs::write(&formula, "E x. edge(f,x,x)\n").unwrap();
    let (c, v) = json(&["fo", "check", &bundle, &formula, "--witness"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["holds"], true);
    assert_eq!(v["result"]["witness"]["x"], "ε");
    let (_, v) = json(&["fo", "check", &bundle, "edge(a,x,y)"]);
    assert_eq!(v["result"]["sentence"], false);
    assert!(v["result"]["witness"]["y"].is_string());
    let (c, v) = json(&["rtl", "successors", &bundle, "ab", "a"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["samples"], serde_json::json!(["{a,b}{a}"]));
}

#[test]
fn unfolding_and_event_structures() {
    let dir = tmp();
    let rtl = path(&dir, "gt.json");
    let bundle = path(&dir, "gt.bundle");
    assert_eq!(code(&tracerw(&["unfold", &data("grid-tree-automaton.json"), "--out", &rtl])), 0);
    assert_eq!(code(&tracerw(&["rtl", "compile", &rtl, "--out", &bundle])), 0);
    let o = tracerw(&["fo", "check", &bundle, "A x. E y. edge(c,x,y)"]);
    assert_eq!(stdout(&o).trim(), "true");
    let with_rec = tracerw(&["unfold", "builtin:grid", "--rec", &format!("L={}", data("ab-powers.json"))]);
    assert_eq!(code(&with_rec), 0);
    let doc: Value = serde_json::from_str(&stdout(&with_rec)).unwrap();
    assert!(doc["labels"].as_array().unwrap().contains(&Value::from("L")));
    let es = |q: &str| stdout(&tracerw(&["es", &data("ab-powers.json"), "--query", q])).trim().to_string();
    assert_eq!(es("prime aa"), "true");
    assert_eq!(es("prime ab"), "false");
    assert_eq!(es("le a aa"), "true");
    assert_eq!(es("conflict a b"), "true");
}

#[test]
fn minsky_verdicts() {
    assert_eq!(stdout(&tracerw(&["minsky", "run", &data("inc-halt.txt"), "--budget", "100"])).trim(), "halts at depth 1");
    assert_eq!(
        stdout(&tracerw(&["minsky", "run", &data("dec-loop.txt"), "--budget", "10000"])).trim(),
        "no halt within budget"
    );
    let dir = tmp();
    let rtl = path(&dir, "m.json");
    let bundle = path(&dir, "m.bundle");
    assert_eq!(code(&tracerw(&["minsky", "compile", &data("inc-halt.txt"), "--out", &rtl])), 0);
    assert_eq!(code(&tracerw(&["rtl", "compile", &rtl, "--out", &bundle])), 0);
    let (c, v) = json(&["fo", "check", &bundle, "E x. E y. edge(i,x,x) & edge(f,y,y) & edge(*,x,y)"]);
    assert_eq!(c, 2);
    assert_eq!(v["error"]["kind"], "reachability-not-automatic");
}

#[test]
fn gtrs_commands() {
    let (c, v) = json(&["gtrs", "explore", &data("gtrs-grid.json"), "--budget", "40"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["vertices"].as_array().unwrap().len(), 40);
    assert_eq!(v["result"]["truncated"], true);
    let (_, v) = json(&["gtrs", "decompose", &data("gtrs-grid.json"), "--n", "5", "--budget", "100"]);
    let comps = v["result"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0]["frontier"].as_array().unwrap().len(), 3);
    let dir = tmp();
    let tree = path(&dir, "tree.json");
    assert_eq!(code(&tracerw(&["gtrs", "tree", &data("semi-line.json"), "--root", "0", "--depth", "1", "--out", &tree])), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&tree).unwrap()).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 5 + 25);
    let dot = stdout(&tracerw(&["export", "dot", &tree]));
    assert!(dot.starts_with("digraph G {") && dot.contains("label=\"c\""));
    let dotfile = path(&dir, "d.dot");
    tracerw(&["gtrs", "decompose", "builtin:grid", "--n", "5", "--budget", "100", "--dot", &dotfile]);
    assert_eq!(std::fs::read_to_string(&dotfile).unwrap().matches("doublecircle").count(), 3);
}

#[test]
fn data_files_match_builtins() {
    for (kind, name, file) in [
        ("alphabet", "ex1", "ex1.json"),
        ("rtl", "alex", "alex.json"),
        ("rtl", "alexbis", "alexbis.json"),
        ("rtl", "grid", "grid.json"),
        ("automaton", "grid", "grid-automaton.json"),
        ("automaton", "grid-tree", "grid-tree-automaton.json"),
        ("language", "ab-powers", "ab-powers.json"),
        ("gtrs", "grid", "gtrs-grid.json"),
        ("gtrs", "semi-line-tree", "gtrs-semi-line-tree.json"),
        ("graph", "semi-line", "semi-line.json"),
    ] {
        let out = stdout(&tracerw(&["builtin", kind, name]));
        let want: Value = serde_json::from_str(&std::fs::read_to_string(data(file)).unwrap()).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&out).unwrap(), want, "{file}");
    }
}

/// Every document the tool writes reads back to the same document.
#[test]
fn written_documents_round_trip() {
    use tracerw::io::{read_json, GraphDoc, RtlDoc};
    let dir = tmp();
    let rtl_cases: Vec<Vec<String>> = vec![
        vec!["unfold".into(), data("grid-tree-automaton.json")],
        vec!["unfold".into(), "builtin:grid".into(), "--rec".into(), format!("L={}", data("ab-powers.json"))],
        vec!["minsky".into(), "compile".into(), data("count.txt")],
        vec!["builtin".into(), "rtl".into(), "alex".into()],
    ];
    for (i, args) in rtl_cases.into_iter().enumerate() {
        let file = path(&dir, &format!("rtl-{i}.json"));
        let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
        a.extend(["--out", &file]);
        assert_eq!(code(&tracerw(&a)), 0);
        let doc: RtlDoc = read_json(Path::new(&file)).unwrap();
        assert_eq!(RtlDoc::of(&doc.build().unwrap()), doc, "{args:?}");
    }
    let tree = path(&dir, "tree.json");
    let explored = path(&dir, "explored.json");
    tracerw(&["gtrs", "tree", &data("semi-line.json"), "--root", "1", "--depth", "1", "--out", &tree]);
    tracerw(&["gtrs", "explore", "builtin:grid", "--budget", "30", "--out", &explored]);
    for file in [tree, explored] {
        let doc: GraphDoc = read_json(Path::new(&file)).unwrap();
        let rebuilt = GraphDoc { truncated: doc.truncated, ..GraphDoc::of(&doc.build().unwrap()) };
        assert_eq!(rebuilt, doc);
    }
    let bundle = PathBuf::from(path(&dir, "b"));
    tracerw(&["rtl", "compile", &data("alexbis.json"), "--out", bundle.to_str().unwrap()]);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(bundle.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["format"], "tracerw-bundle");
    for file in manifest["relations"].as_object().unwrap().values() {
        assert!(bundle.join(file.as_str().unwrap()).is_file());
    }
    let pres = tracerw::io::read_bundle(&bundle).unwrap();
    let again = PathBuf::from(path(&dir, "b2"));
    tracerw::io::write_bundle(&again, &pres).unwrap();
    for name in ["manifest.json", "vertices.json", "relation-0.json"] {
        assert_eq!(std::fs::read(bundle.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn exit_codes() {
    let dir = tmp();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&tracerw(&["foata", &bad, "ab"])), 1);
    assert_eq!(code(&tracerw(&["foata", &data("ex1.json"), "axb"])), 1);
    assert_eq!(code(&tracerw(&["no-such-command"])), 1);
    assert_eq!(code(&tracerw(&["foata", &path(&dir, "missing.json"), "ab"])), 1);
    let lang = path(&dir, "lang.json");
    std::fs::write(&lang, r#"{"alphabet":{"letters":["a","b"],"independent":[["a","b"]]},"kind":"regex","regex":"ab"}"#).unwrap();
    let (c, v) = json(&["es", &lang, "--query", "prime a"]);
    assert_eq!(c, 2);
    assert_eq!(v["error"]["kind"], "invariant");
    let (c, v) = json(&["--state-budget", "3", "rtl", "edges", &data("alex.json"), "--bound", "2"]);
    assert_eq!(c, 3);
    assert_eq!(v["error"]["kind"], "resource");
    assert_eq!(code(&tracerw(&["rtl", "edges", &data("alex.json"), "--bound", "11", "--oracle"])), 3);
}

#[test]
fn json_envelope() {
    let (c, v) = json(&["minsky", "run", "builtin:inc-halt", "--budget", "10"]);
    assert_eq!(c, 0);
    assert_eq!(v["command"], "minsky run");
    assert_eq!(v["exit_code"], 0);
    assert!(v["elapsed_ms"].is_u64());
    assert_eq!(v["result"]["depth"], 1);
}

#[test]
fn selftest_is_reproducible() {
    let a = tracerw(&["selftest", "--seed", "11", "--cases", "4"]);
    let b = tracerw(&["selftest", "--seed", "11", "--cases", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("OK:"));
}
