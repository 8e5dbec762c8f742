//! WebAssembly bindings for the static page in `www/`.
//!
//! Each exported function returns a JSON string; failures come back as
//! `{"error": ...}` so the page never has to catch exceptions.

use std::cell::OnceCell;
use std::collections::BTreeSet;
use std::fmt::Write;

use serde_json::{json, Value};
use tracerw::fo::{decide, Formula};
use tracerw::gtrs::{decompose_fragment, Gtrs, Term};
use tracerw::rtl::{compile, AutomaticPresentation, RtlSystem};
use tracerw::Alphabet;
use wasm_bindgen::prelude::*;

fn reply(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Foata normal form of `word`. `letters` is space separated, `independent`
/// lists pairs such as `ac bd`.
pub fn foata_json(letters: &str, independent: &str, word: &str) -> Result<Value, String> {
    let names: Vec<&str> = letters.split_whitespace().collect();
    let pairs = independent
        .split_whitespace()
        .map(|p| {
            let cs: Vec<String> = p.chars().map(String::from).collect();
            match cs.as_slice() {
                [a, b] => Ok((a.clone(), b.clone())),
                _ => Err(format!("independent pair `{p}` must be two one-character letters")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pair_refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let al = Alphabet::new(&names, &pair_refs).map_err(|e| e.to_string())?;
    let t = al.parse_trace(word).map_err(|e| e.to_string())?;
    let steps: Vec<Vec<&str>> = t.steps().iter().map(|s| s.iter().map(|a| al.name(a)).collect()).collect();
    Ok(json!({ "normal_form": t.to_string(), "steps": steps, "prime": t.is_prime() }))
}

thread_local! {
    static GRID: OnceCell<AutomaticPresentation> = const { OnceCell::new() };
}

/// Decides a sentence on the grid with labels `a`, `b` and the diagonal loop `f`.
pub fn grid_sentence_json(sentence: &str) -> Result<Value, String> {
    let f = Formula::parse(sentence).map_err(|e| e.to_string())?;
    GRID.with(|cell| {
        let pres = match cell.get() {
            Some(p) => p,
            None => {
                let p = compile(&RtlSystem::alexbis()).map_err(|e| e.to_string())?;
                cell.get_or_init(|| p)
            }
        };
        let holds = decide(&f, pres).map_err(|e| e.to_string())?;
        Ok(json!({ "sentence": f.to_string(), "holds": holds }))
    })
}

/// Depth of the unary chain under argument `i` of the root.
fn chain(t: &Term, i: usize) -> usize {
    t.args.get(i).map(|a| a.size() - 1).unwrap_or(0)
}

/// SVG of the explored grid configuration graph. Vertices sit at their
/// counter values; frontier vertices of the cut at `n` are drawn hollow.
pub fn grid_svg_json(budget: usize, n: usize) -> Result<Value, String> {
    if budget > 2000 {
        return Err("budget is capped at 2000 in the browser".into());
    }
    let frag = Gtrs::grid().explore(budget);
    let dec = decompose_fragment(&frag, n);
    let frontier: BTreeSet<usize> = dec.components.iter().flat_map(|c| c.frontier.iter().copied()).collect();
    let pos: Vec<(usize, usize)> = frag.terms.iter().map(|t| (chain(t, 0), chain(t, 1))).collect();
    let side = pos.iter().map(|p| p.0.max(p.1)).max().unwrap_or(0) + 1;
    let cell = (480 / side).clamp(8, 60) as f64;
    let at = |(i, j): (usize, usize)| (20.0 + i as f64 * cell, 20.0 + (side - 1 - j) as f64 * cell);
    let px = 40.0 + (side - 1) as f64 * cell;
    let mut svg = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" font-size="10">"#);
    for (s, l, t) in &frag.edges {
        let ((x1, y1), (x2, y2)) = (at(pos[*s]), at(pos[*t]));
        let colour = if l == "a" { "#c0392b" } else { "#2471a3" };
        let _ = write!(svg, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{colour}"/>"#);
    }
    for (v, t) in frag.terms.iter().enumerate() {
        let (x, y) = at(pos[v]);
        let fill = if frontier.contains(&v) { "white" } else if frag.open[v] { "#aaa" } else { "black" };
        let _ = write!(
            svg,
            r#"<circle cx="{x}" cy="{y}" r="3.5" fill="{fill}" stroke="black"><title>{t} (size {})</title></circle>"#,
            t.size()
        );
    }
    svg.push_str("</svg>");
    Ok(json!({
        "svg": svg,
        "vertices": frag.terms.len(),
        "edges": frag.edges.len(),
        "components": dec.components.len(),
        "frontier": frontier.len(),
        "signatures": dec.signature_count(),
        "truncated": frag.truncated,
    }))
}

#[wasm_bindgen]
pub fn foata(letters: &str, independent: &str, word: &str) -> String {
    reply(foata_json(letters, independent, word))
}

#[wasm_bindgen]
pub fn grid_sentence(sentence: &str) -> String {
    reply(grid_sentence_json(sentence))
}

#[wasm_bindgen]
pub fn grid_svg(budget: usize, n: usize) -> String {
    reply(grid_svg_json(budget, n))
}
