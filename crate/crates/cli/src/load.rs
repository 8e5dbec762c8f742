//! Input loading. Every loader accepts `builtin:NAME` in place of a path.

use std::path::Path;
use std::sync::Arc;

use tracerw::automata::RecTraceLang;
use tracerw::gtrs::{Graph, Gtrs};
use tracerw::io::{read_bundle, read_json, AlphabetDoc, ConcurrentDoc, GraphDoc, GtrsDoc, RecLangDoc, RtlDoc};
use tracerw::rtl::{AutomaticPresentation, MinskyMachine, RtlSystem};
use tracerw::unfolding::{ab_powers, ConcurrentAutomaton};
use tracerw::{Alphabet, Error, Result};

fn builtin(arg: &str) -> Option<&str> {
    arg.strip_prefix("builtin:")
}

pub fn alphabet(arg: &str) -> Result<Arc<Alphabet>> {
    match builtin(arg) {
        Some("ex1") => Alphabet::new(&["a", "b", "c", "d"], &[("a", "c"), ("b", "d"), ("c", "d")]),
        Some("ab") => Alphabet::new(&["a", "b"], &[("a", "b")]),
        Some(other) => Err(Error::Parse(format!("unknown built-in alphabet `{other}`"))),
        None => read_json::<AlphabetDoc>(Path::new(arg))?.build(),
    }
}

pub fn rtl(arg: &str) -> Result<RtlSystem> {
    match builtin(arg) {
        Some(name) => RtlSystem::builtin(name),
        None => read_json::<RtlDoc>(Path::new(arg))?.build(),
    }
}

pub fn concurrent(arg: &str) -> Result<ConcurrentAutomaton> {
    match builtin(arg) {
        Some(name) => ConcurrentAutomaton::builtin(name),
        None => read_json::<ConcurrentDoc>(Path::new(arg))?.build(),
    }
}

/// `builtin:ab-powers[:K]` is `{[(ab)^i] | i ≤ K}` over independent `a`, `b`.
pub fn rec_lang(arg: &str) -> Result<RecTraceLang> {
    match builtin(arg) {
        Some(name) => {
            let k = match name.strip_prefix("ab-powers") {
                Some("") => 3,
                Some(rest) => rest
                    .strip_prefix(':')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad power bound in `{name}`")))?,
                None => return Err(Error::Parse(format!("unknown built-in language `{name}`"))),
            };
            ab_powers(&Alphabet::new(&["a", "b"], &[("a", "b")])?, k)
        }
        None => read_json::<RecLangDoc>(Path::new(arg))?.build(),
    }
}

pub fn gtrs(arg: &str) -> Result<Gtrs> {
    match builtin(arg) {
        Some(name) => Gtrs::builtin(name),
        None => read_json::<GtrsDoc>(Path::new(arg))?.build(),
    }
}

/// `builtin:semi-line[:N]`, default `N = 4`.
pub fn graph(arg: &str) -> Result<Graph> {
    match builtin(arg) {
        Some(name) => {
            let n = match name.strip_prefix("semi-line") {
                Some("") => 4,
                Some(rest) => rest
                    .strip_prefix(':')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad length in `{name}`")))?,
                None => return Err(Error::Parse(format!("unknown built-in graph `{name}`"))),
            };
            Ok(Graph::semi_line(n))
        }
        None => read_json::<GraphDoc>(Path::new(arg))?.build(),
    }
}

pub fn bundle(arg: &str) -> Result<AutomaticPresentation> {
    match builtin(arg) {
        Some(name) => {
            let sys = match name.strip_prefix("unfold-") {
                Some(aut) => tracerw::unfolding::unfold_rtl(&ConcurrentAutomaton::builtin(aut)?)?,
                None => RtlSystem::builtin(name)?,
            };
            tracerw::rtl::compile(&sys)
        }
        None => read_bundle(Path::new(arg)),
    }
}

pub fn minsky(arg: &str) -> Result<MinskyMachine> {
    let text = match builtin(arg) {
        Some("inc-halt") => "1: inc 1 2\n2: halt\n".to_string(),
        Some("dec-loop") => "1: dec 1 1 1\n2: halt\n".to_string(),
        Some("count") => "1: inc 1 2\n2: dec 1 2 3\n3: halt\n".to_string(),
        Some(other) => return Err(Error::Parse(format!("unknown built-in machine `{other}`"))),
        None => std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?,
    };
    MinskyMachine::parse(&text)
}

/// The argument itself, or the contents of the file it names.
pub fn text_or_file(arg: &str) -> Result<String> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}
