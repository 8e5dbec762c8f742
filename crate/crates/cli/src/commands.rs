use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use tracerw::automata::foata_automaton;
use tracerw::fo::{decide, witness, Formula};
use tracerw::gtrs::{tree_of, Graph};
use tracerw::io::{
    to_json, write_bundle, write_json, AlphabetDoc, AutomatonDoc, ConcurrentDoc, GraphDoc, GtrsDoc, RecLangDoc, RtlDoc,
};
use tracerw::rtl::{brute_force_edges, compile, compile_minsky, gen, run_machine, Edge, HaltVerdict};
use tracerw::trace::{trace_equiv, FoataWord};
use tracerw::unfolding::{es_presentation, es_query, unfold_rtl_rec, EsQuery};
use tracerw::{Error, Result};

use crate::load;
use crate::Outcome;

fn steps_json(t: &FoataWord) -> Value {
    let al = t.alphabet();
    Value::Array(
        t.steps()
            .iter()
            .map(|s| Value::Array(s.iter().map(|a| Value::String(al.name(a).to_string())).collect()))
            .collect(),
    )
}

fn write_or_print<T: serde::Serialize>(doc: &T, out: Option<&Path>) -> Result<Outcome> {
    let value = serde_json::to_value(doc).expect("documents serialize");
    match out {
        Some(p) => {
            write_json(p, doc)?;
            Ok(Outcome::ok(format!("wrote {}", p.display()), json!({ "path": p.display().to_string(), "document": value })))
        }
        None => Ok(Outcome::ok(to_json(doc), value)),
    }
}

pub fn foata(alphabet: &str, word: &str) -> Result<Outcome> {
    let al = load::alphabet(alphabet)?;
    let t = FoataWord::try_normalize(&al, &al.parse_word(word)?)?;
    Ok(Outcome::ok(t.to_string(), json!({ "foata": t.to_string(), "steps": steps_json(&t) })))
}

pub fn eq(alphabet: &str, u: &str, v: &str) -> Result<Outcome> {
    let al = load::alphabet(alphabet)?;
    let (wu, wv) = (al.parse_word(u)?, al.parse_word(v)?);
    let same = trace_equiv(&al, &wu, &wv);
    let (tu, tv) = (FoataWord::normalize(&al, &wu), FoataWord::normalize(&al, &wv));
    let text = if same { "equivalent" } else { "not equivalent" };
    Ok(Outcome::ok(
        format!("{text}\n{u}: {tu}\n{v}: {tv}"),
        json!({ "equivalent": same, "u": tu.to_string(), "v": tv.to_string() }),
    ))
}

pub fn rtl_compile(system: &str, out: &Path, stats: bool) -> Result<Outcome> {
    let sys = load::rtl(system)?;
    let pres = compile(&sys)?;
    let manifest = write_bundle(out, &pres)?;
    let table: BTreeMap<&String, Value> = pres
        .relations()
        .iter()
        .map(|(l, r)| (l, json!({ "states": r.dfa().num_states(), "transitions": r.dfa().num_transitions() })))
        .collect();
    let mut text = format!("wrote bundle {} ({} relations)", out.display(), manifest.relations.len());
    if stats {
        for (l, r) in pres.relations() {
            let (s, t) = (r.dfa().num_states(), r.dfa().num_transitions());
            text += &format!("\n  {l}: {s} state{}, {t} transition{}", plural(s), plural(t));
        }
    }
    Ok(Outcome::ok(text, json!({ "bundle": out.display().to_string(), "relations": table })))
}

fn fmt_edge((u, l, v): &Edge) -> String {
    format!("{u} -{l}-> {v}")
}

fn edge_json((u, l, v): &Edge) -> Value {
    json!([u.to_string(), l, v.to_string()])
}

pub fn rtl_edges(system: &str, bound: usize, oracle: bool) -> Result<Outcome> {
    let sys = load::rtl(system)?;
    let edges = compile(&sys)?.edges_bounded(bound);
    if !oracle {
        let text = edges.iter().map(fmt_edge).collect::<Vec<_>>().join("\n");
        return Ok(Outcome::ok(text, json!({ "edges": edges.iter().map(edge_json).collect::<Vec<_>>() })));
    }
    let expected = brute_force_edges(&sys, bound)?;
    let missing: Vec<&Edge> = expected.difference(&edges).collect();
    let extra: Vec<&Edge> = edges.difference(&expected).collect();
    let diff = missing.len() + extra.len();
    let mut text = format!("compiled edges: {}\noracle edges: {}\n", edges.len(), expected.len());
    for e in &missing {
        text += &format!("missing {}\n", fmt_edge(e));
    }
    for e in &extra {
        text += &format!("extra {}\n", fmt_edge(e));
    }
    text += &if diff == 0 { "OK: 0 differences".to_string() } else { format!("MISMATCH: {diff} differences") };
    Ok(Outcome {
        text,
        json: json!({
            "edges": edges.len(),
            "oracle_edges": expected.len(),
            "differences": diff,
            "missing": missing.iter().map(|e| edge_json(e)).collect::<Vec<_>>(),
            "extra": extra.iter().map(|e| edge_json(e)).collect::<Vec<_>>(),
        }),
        code: if diff == 0 { 0 } else { 2 },
    })
}

pub fn rtl_successors(bundle: &str, trace: &str, label: &str, samples: usize) -> Result<Outcome> {
    let pres = load::bundle(bundle)?;
    let t = pres.alphabet().parse_trace(trace)?;
    pres.relation(label)?;
    let succ = pres.successors(&t, label)?;
    let mut found = Vec::new();
    for steps in 0..=t.steps().len() + 8 {
        found = succ.enumerate(steps);
        if found.len() >= samples {
            break;
        }
    }
    found.sort();
    found.truncate(samples);
    let names: Vec<String> = found.iter().map(FoataWord::to_string).collect();
    let text = format!(
        "{} successors of {t}: {} automaton states{}\n{}",
        label,
        succ.dfa().num_states(),
        if succ.is_empty() { ", empty" } else { "" },
        names.join("\n")
    );
    Ok(Outcome::ok(
        text,
        json!({
            "empty": succ.is_empty(),
            "automaton": serde_json::to_value(AutomatonDoc::of(succ.dfa(), false)).expect("documents serialize"),
            "samples": names,
        }),
    ))
}

fn assignment_json(a: &[(String, FoataWord)]) -> Value {
    Value::Object(a.iter().map(|(x, t)| (x.clone(), Value::String(t.to_string()))).collect())
}

fn fmt_assignment(a: &[(String, FoataWord)]) -> String {
    a.iter().map(|(x, t)| format!("{x} = {t}")).collect::<Vec<_>>().join(", ")
}

pub fn fo_check(bundle: &str, formula: &str, want_witness: bool) -> Result<Outcome> {
    let f = Formula::parse(&load::text_or_file(formula)?)?;
    let pres = load::bundle(bundle)?;
    if !f.free_vars().is_empty() {
        let w = witness(&f, &pres)?;
        let text = match &w {
            Some(a) => format!("satisfiable\nwitness: {}", fmt_assignment(a)),
            None => "unsatisfiable".to_string(),
        };
        return Ok(Outcome::ok(
            text,
            json!({ "sentence": false, "holds": w.is_some(), "witness": w.as_deref().map(assignment_json) }),
        ));
    }
    let holds = decide(&f, &pres)?;
    let mut text = holds.to_string();
    let mut wit = Value::Null;
    if want_witness && holds {
        let mut body = &f;
        while let Formula::Exists(_, b) = body {
            body = b;
        }
        if !body.free_vars().is_empty() {
            if let Some(a) = witness(body, &pres)? {
                text += &format!("\nwitness: {}", fmt_assignment(&a));
                wit = assignment_json(&a);
            }
        }
    }
    Ok(Outcome::ok(text, json!({ "sentence": true, "holds": holds, "witness": wit })))
}

pub fn unfold(automaton: &str, rec: &[String], out: Option<&Path>) -> Result<Outcome> {
    let a = load::concurrent(automaton)?;
    let mut langs = Vec::new();
    for spec in rec {
        let (name, file) = spec
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected NAME=LANG, got `{spec}`")))?;
        langs.push((name.to_string(), load::rec_lang(file)?));
    }
    let refs: Vec<(&str, _)> = langs.iter().map(|(n, l)| (n.as_str(), l.clone())).collect();
    let sys = unfold_rtl_rec(&a, &refs)?;
    write_or_print(&RtlDoc::of(&sys), out)
}

pub fn es(language: &str, query: &str) -> Result<Outcome> {
    let rec = load::rec_lang(language)?;
    let q = EsQuery::parse(rec.alphabet(), query)?;
    let pres = es_presentation(&rec)?;
    let (f, holds) = es_query(&pres, &q)?;
    Ok(Outcome::ok(holds.to_string(), json!({ "holds": holds, "formula": f.to_string() })))
}

pub fn gtrs_explore(system: &str, budget: usize, dot: Option<&Path>, out: Option<&Path>) -> Result<Outcome> {
    let g = load::gtrs(system)?;
    let frag = g.explore(budget);
    let graph = frag.to_graph();
    if let Some(p) = dot {
        std::fs::write(p, graph.to_dot(&BTreeSet::new())).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    let doc = GraphDoc { truncated: frag.truncated, ..GraphDoc::of(&graph) };
    if let Some(p) = out {
        write_json(p, &doc)?;
    }
    let open = frag.open.iter().filter(|&&o| o).count();
    let text = format!(
        "vertices: {}\nedges: {}\nopen vertices: {open}\ntruncated: {}",
        frag.terms.len(),
        frag.edges.len(),
        frag.truncated
    );
    Ok(Outcome::ok(text, serde_json::to_value(&doc).expect("documents serialize")))
}

pub fn gtrs_decompose(system: &str, n: usize, budget: usize, include_truncated: bool, dot: Option<&Path>) -> Result<Outcome> {
    let g = load::gtrs(system)?;
    let d = g.decompose(n, budget);
    if let Some(p) = dot {
        let frontier: BTreeSet<usize> = d.components.iter().flat_map(|c| c.frontier.iter().copied()).collect();
        let text = d.fragment.to_graph().to_dot(&frontier);
        std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    let terms = &d.fragment.terms;
    let mut table: BTreeMap<&str, (usize, usize, usize, bool)> = BTreeMap::new();
    for c in d.components.iter().filter(|c| include_truncated || !c.truncated) {
        let e = table.entry(&c.signature).or_insert((0, c.vertices.len(), c.frontier.len(), c.exact));
        e.0 += 1;
    }
    let truncated = d.components.iter().filter(|c| c.truncated).count();
    let mut text = format!(
        "n = {n}, delta = {}, components: {} ({truncated} cut by the budget), signatures: {}\n",
        g.delta(),
        d.components.len(),
        table.len()
    );
    text += "class  count  vertices  frontier  form\n";
    for (i, (_, (count, size, fr, exact))) in table.iter().enumerate() {
        let form = if *exact { "exact" } else { "heuristic" };
        text += &format!("{i:>5}  {count:>5}  {size:>8}  {fr:>8}  {form}\n");
    }
    let comps: Vec<Value> = d
        .components
        .iter()
        .map(|c| {
            json!({
                "vertices": c.vertices.iter().map(|&v| terms[v].to_string()).collect::<Vec<_>>(),
                "frontier": c.frontier.iter().map(|&v| terms[v].to_string()).collect::<Vec<_>>(),
                "signature": c.signature,
                "exact": c.exact,
                "truncated": c.truncated,
            })
        })
        .collect();
    Ok(Outcome::ok(
        text,
        json!({ "n": n, "delta": g.delta(), "signatures": table.len(), "components": comps }),
    ))
}

pub fn gtrs_tree(graph: &str, root: &str, depth: usize, out: Option<&Path>) -> Result<Outcome> {
    let g = load::graph(graph)?;
    write_or_print(&GraphDoc::of(&tree_of(&g, root, depth)?), out)
}

pub fn minsky_compile(machine: &str, out: Option<&Path>) -> Result<Outcome> {
    let m = load::minsky(machine)?;
    let (sys, sentence) = compile_minsky(&m)?;
    let doc = RtlDoc::of(&sys);
    match out {
        Some(p) => {
            write_json(p, &doc)?;
            Ok(Outcome::ok(
                format!("wrote {}\nhalting sentence: {sentence}", p.display()),
                json!({ "path": p.display().to_string(), "sentence": sentence.to_string() }),
            ))
        }
        None => Ok(Outcome::ok(
            to_json(&doc),
            json!({ "document": serde_json::to_value(&doc).expect("documents serialize"), "sentence": sentence.to_string() }),
        )),
    }
}

pub fn minsky_run(machine: &str, budget: usize) -> Result<Outcome> {
    let m = load::minsky(machine)?;
    let v = run_machine(&m, budget)?;
    let depth = match v {
        HaltVerdict::HaltsAt(d) => Some(d),
        HaltVerdict::NoHaltWithin(_) => None,
    };
    Ok(Outcome::ok(v.to_string(), json!({ "halts": depth.is_some(), "depth": depth, "budget": budget })))
}

pub fn export_dot(input: &str, bound: usize) -> Result<Outcome> {
    let is_bundle = input.starts_with("builtin:") || Path::new(input).is_dir();
    let (graph, frontier) = if is_bundle {
        let pres = load::bundle(input)?;
        let edges = pres.edges_bounded(bound);
        let mut names: BTreeSet<FoataWord> = BTreeSet::new();
        for (u, _, v) in &edges {
            names.insert(u.clone());
            names.insert(v.clone());
        }
        let names: Vec<FoataWord> = names.into_iter().collect();
        let idx = |t: &FoataWord| names.binary_search(t).expect("endpoint listed");
        let graph = Graph {
            vertices: names.iter().map(FoataWord::to_string).collect(),
            edges: edges.iter().map(|(u, l, v)| (idx(u), l.clone(), idx(v))).collect(),
        };
        (graph, BTreeSet::new())
    } else {
        let doc: GraphDoc = tracerw::io::read_json(Path::new(input))?;
        (doc.build()?, doc.frontier_indices()?)
    };
    let dot = graph.to_dot(&frontier);
    Ok(Outcome::ok(dot.clone(), json!({ "dot": dot })))
}

pub fn builtin(kind: &str, name: &str, out: Option<&Path>) -> Result<Outcome> {
    let arg = format!("builtin:{name}");
    match kind {
        "alphabet" => write_or_print(&AlphabetDoc::of(load::alphabet(&arg)?.as_ref()), out),
        "rtl" => write_or_print(&RtlDoc::of(&load::rtl(&arg)?), out),
        "automaton" => write_or_print(&ConcurrentDoc::of(&load::concurrent(&arg)?), out),
        "language" => write_or_print(&RecLangDoc::of(&load::rec_lang(&arg)?), out),
        "gtrs" => write_or_print(&GtrsDoc::of(&load::gtrs(&arg)?), out),
        "graph" => write_or_print(&GraphDoc::of(&load::graph(&arg)?), out),
        "minsky" => {
            let m = load::minsky(&arg)?;
            let text: String = m.to_string();
            if let Some(p) = out {
                std::fs::write(p, &text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            }
            Ok(Outcome::ok(text.clone(), json!({ "machine": text })))
        }
        other => Err(Error::Parse(format!("unknown built-in kind `{other}`"))),
    }
}

pub fn selftest(seed: u64, cases: usize) -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut words = 0;
    for case in 0..cases {
        let letters = rng.gen_range(2..=5);
        let al = gen::random_alphabet(&mut rng, letters);
        let level = foata_automaton(&al);
        for _ in 0..100 {
            let len = rng.gen_range(0..=8);
            let w: Vec<u8> = (0..len).map(|_| rng.gen_range(0..al.len() as u8)).collect();
            let t = FoataWord::normalize(&al, &w);
            let codes = t.step_codes();
            if !level.accepts(&codes) || !trace_equiv(&al, &w, &t.linearize()) {
                failures.push(format!("case {case}: Foata form of {} is wrong", al.fmt_word(&w)));
            }
            words += 1;
        }
        let sys = gen::random_system(&mut rng, 3, 3);
        let got = compile(&sys)?.edges_bounded(4);
        let want = brute_force_edges(&sys, 4)?;
        if got != want {
            failures.push(format!("case {case}: {} edge differences", got.symmetric_difference(&want).count()));
        }
    }
    let ok = failures.is_empty();
    let text = if ok {
        format!("OK: {cases} systems, {words} words (seed {seed})")
    } else {
        format!("FAIL (seed {seed})\n{}", failures.join("\n"))
    };
    Ok(Outcome {
        text,
        json: json!({ "seed": seed, "cases": cases, "words": words, "failures": failures }),
        code: if ok { 0 } else { 2 },
    })
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}
