//! Seeded random alphabets, trace languages and RTL systems.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{RtlRule, RtlSystem};
use crate::automata::{Dfa, Domain, LevelRegLang, RecTraceLang, State};
use crate::trace::{all_traces, Alphabet, FoataWord};

/// Alphabet with `n` letters `a, b, …`, each pair independent with
/// probability one half.
pub fn random_alphabet<R: Rng>(rng: &mut R, n: usize) -> Arc<Alphabet> {
    let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Alphabet::new(&names, &pairs).expect("generated alphabet is valid")
}

/// Random DFA over `domain` with at most `max_states` states.
pub fn random_dfa<R: Rng>(rng: &mut R, domain: &Domain, max_states: usize) -> Dfa {
    let n = rng.gen_range(1..=max_states);
    let syms = domain.symbols();
    let mut trans = vec![Vec::new(); n];
    for out in trans.iter_mut() {
        for &s in &syms {
            if rng.gen_bool(0.6) {
                out.push((s, rng.gen_range(0..n) as State));
            }
        }
    }
    let finals = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Dfa::from_parts(domain.clone(), trans, 0, finals).expect("generated DFA is valid")
}

/// A recognizable language: a trace-closed random DFA when one turns up
/// quickly, otherwise a small finite set of traces.
pub fn random_rec<R: Rng>(rng: &mut R, alphabet: &Arc<Alphabet>, max_states: usize) -> RecTraceLang {
    if rng.gen_bool(0.6) {
        for _ in 0..20 {
            if let Ok(l) = RecTraceLang::new(random_dfa(rng, &Domain::letters(alphabet), max_states)) {
                return l;
            }
        }
    }
    random_finite_rec(rng, alphabet, 3)
}

/// Up to three traces of at most `max_letters` letters.
pub fn random_finite_rec<R: Rng>(rng: &mut R, alphabet: &Arc<Alphabet>, max_letters: usize) -> RecTraceLang {
    let pool = all_traces(alphabet, max_letters);
    let k = rng.gen_range(1..=3);
    let picks: Vec<FoataWord> = pool.choose_multiple(rng, k).cloned().collect();
    RecTraceLang::from_traces(alphabet, &picks).expect("finite languages are recognizable")
}

/// A level-regular language: a random step automaton cut down to normal forms.
pub fn random_levelreg<R: Rng>(rng: &mut R, alphabet: &Arc<Alphabet>, max_states: usize) -> LevelRegLang {
    if rng.gen_bool(0.3) {
        return random_rec(rng, alphabet, max_states).foata_encoding().expect("encodable");
    }
    let dfa = random_dfa(rng, &Domain::steps(alphabet), max_states);
    let foata = LevelRegLang::foata(alphabet);
    LevelRegLang::new(dfa.intersect(foata.dfa()).expect("same domain")).expect("subset of Foata")
}

/// Random system with up to three rules over a random alphabet of at most
/// `max_letters` letters.
pub fn random_system<R: Rng>(rng: &mut R, max_letters: usize, max_states: usize) -> RtlSystem {
    let n = rng.gen_range(2..=max_letters.max(2));
    let alphabet = random_alphabet(rng, n);
    let labels = ["p", "q"];
    let rules = (0..rng.gen_range(1..=3))
        .map(|_| {
            let label = labels.choose(rng).expect("nonempty");
            let ctx = random_levelreg(rng, &alphabet, max_states);
            let lhs = random_rec(rng, &alphabet, max_states);
            let rhs = random_rec(rng, &alphabet, max_states);
            RtlRule::new(label, ctx, lhs, rhs)
        })
        .collect();
    RtlSystem::new(&alphabet, &labels, rules).expect("generated system is valid")
}
